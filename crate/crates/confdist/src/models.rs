//! Scalar models: one trait, four families.
//!
//! Every family exposes exact CDF/PDF/quantile evaluations of a single real
//! observation indexed by a single real parameter, with the CDF strictly
//! increasing in `y` and non-increasing in `theta` (stochastic ordering) on
//! the stated domains. All downstream inversion machinery (confidence
//! distributions, posteriors, coverage audits) works through this interface.

use crate::error::{Error, Result};
use crate::specfun;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Closed interval, possibly half-infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// The whole real line.
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn describe(&self) -> String {
        format!("[{}, {}]", self.lo, self.hi)
    }
}

/// Location-family kernel: the distribution of `z = (y - theta) / sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Normal,
    ExtremeValue,
}

impl Kernel {
    pub fn cdf(&self, z: f64) -> f64 {
        match self {
            Kernel::Normal => specfun::normal_cdf(z),
            Kernel::ExtremeValue => specfun::extreme_value_cdf(z),
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        match self {
            Kernel::Normal => specfun::normal_pdf(z),
            Kernel::ExtremeValue => specfun::extreme_value_pdf(z),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            Kernel::Normal => specfun::normal_quantile(u),
            Kernel::ExtremeValue => specfun::extreme_value_quantile(u),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Normal => "normal",
            Kernel::ExtremeValue => "extreme_value",
        }
    }
}

/// A scalar continuous model: one observation, one parameter.
pub trait ScalarModel: Send + Sync {
    /// Short family identifier used in CSV output.
    fn id(&self) -> &'static str;

    /// Parameter domain (closed; open endpoints are represented by pulling
    /// the bound in by a relative 1e-9, documented per family).
    fn param_domain(&self) -> Interval;

    /// Observation domain.
    fn obs_domain(&self) -> Interval;

    /// Distribution function F(y; theta).
    fn cdf(&self, y: f64, theta: f64) -> f64;

    /// Density f(y; theta).
    fn pdf(&self, y: f64, theta: f64) -> f64;

    /// Inverse of `cdf` in y: the u-quantile of the observation at `theta`.
    fn quantile(&self, u: f64, theta: f64) -> Result<f64>;

    /// A smooth pivot z(y, theta) whose distribution is parameter-free,
    /// strictly increasing in y. Defaults to the probability integral
    /// transform F(y; theta) itself.
    fn pivot(&self, y: f64, theta: f64) -> f64 {
        self.cdf(y, theta)
    }

    /// Natural scale of the observation around its typical value at `theta`;
    /// used to seed brackets and integration windows.
    fn scale(&self, theta: f64) -> f64;

    /// Check that `theta` lies in the parameter domain.
    fn validate_theta(&self, theta: f64) -> Result<()> {
        if !theta.is_finite() || !self.param_domain().contains(theta) {
            return Err(Error::OutsideDomain {
                what: "parameter",
                value: theta,
                domain: self.param_domain().describe(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Location families
// ---------------------------------------------------------------------------

/// Pure location model: `y = theta + sigma * z` with `z` from a fixed kernel.
#[derive(Debug, Clone, Copy)]
pub struct LocationModel {
    pub kernel: Kernel,
    pub sigma: f64,
}

impl LocationModel {
    pub fn new(kernel: Kernel, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "location scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(LocationModel { kernel, sigma })
    }
}

impl ScalarModel for LocationModel {
    fn id(&self) -> &'static str {
        match self.kernel {
            Kernel::Normal => "location:normal",
            Kernel::ExtremeValue => "location:extreme_value",
        }
    }

    fn param_domain(&self) -> Interval {
        Interval::REAL
    }

    fn obs_domain(&self) -> Interval {
        Interval::REAL
    }

    fn cdf(&self, y: f64, theta: f64) -> f64 {
        self.kernel.cdf((y - theta) / self.sigma)
    }

    fn pdf(&self, y: f64, theta: f64) -> f64 {
        self.kernel.pdf((y - theta) / self.sigma) / self.sigma
    }

    fn quantile(&self, u: f64, theta: f64) -> Result<f64> {
        Ok(theta + self.sigma * self.kernel.quantile(u)?)
    }

    fn pivot(&self, y: f64, theta: f64) -> f64 {
        (y - theta) / self.sigma
    }

    fn scale(&self, _theta: f64) -> f64 {
        self.sigma
    }
}

/// Normal mean known to satisfy `theta >= theta0`: the sampling model is the
/// unrestricted Normal(theta, sigma^2); only the parameter domain is clipped.
#[derive(Debug, Clone, Copy)]
pub struct BoundedMeanNormal {
    pub theta0: f64,
    pub sigma: f64,
}

impl BoundedMeanNormal {
    pub fn new(theta0: f64, sigma: f64) -> Result<Self> {
        if !theta0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lower bound must be finite, got {theta0}"
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(BoundedMeanNormal { theta0, sigma })
    }
}

impl ScalarModel for BoundedMeanNormal {
    fn id(&self) -> &'static str {
        "bounded"
    }

    fn param_domain(&self) -> Interval {
        Interval::new(self.theta0, f64::INFINITY)
    }

    fn obs_domain(&self) -> Interval {
        Interval::REAL
    }

    fn cdf(&self, y: f64, theta: f64) -> f64 {
        specfun::normal_cdf((y - theta) / self.sigma)
    }

    fn pdf(&self, y: f64, theta: f64) -> f64 {
        specfun::normal_pdf((y - theta) / self.sigma) / self.sigma
    }

    fn quantile(&self, u: f64, theta: f64) -> Result<f64> {
        Ok(theta + self.sigma * specfun::normal_quantile(u)?)
    }

    fn pivot(&self, y: f64, theta: f64) -> f64 {
        (y - theta) / self.sigma
    }

    fn scale(&self, _theta: f64) -> f64 {
        self.sigma
    }
}

// ---------------------------------------------------------------------------
// Curved radius
// ---------------------------------------------------------------------------

/// Radius of a bivariate standard normal displaced by `rho >= 0`: the data
/// pair is reduced to `r = sqrt(y1^2 + y2^2)`, whose distribution given the
/// parameter is noncentral chi with two degrees of freedom. The model is
/// represented directly in this reduced (r | rho) form; the rotation angle
/// carries no information about `rho`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurvedRadiusModel;

impl CurvedRadiusModel {
    /// Reduce a raw data pair to the radius statistic.
    pub fn radius(y1: f64, y2: f64) -> f64 {
        y1.hypot(y2)
    }
}

impl ScalarModel for CurvedRadiusModel {
    fn id(&self) -> &'static str {
        "curved"
    }

    fn param_domain(&self) -> Interval {
        Interval::new(0.0, f64::INFINITY)
    }

    fn obs_domain(&self) -> Interval {
        Interval::new(0.0, f64::INFINITY)
    }

    fn cdf(&self, y: f64, theta: f64) -> f64 {
        specfun::noncentral_chi_cdf(y.max(0.0), theta)
    }

    fn pdf(&self, y: f64, theta: f64) -> f64 {
        if y < 0.0 {
            0.0
        } else {
            specfun::noncentral_chi_pdf(y, theta)
        }
    }

    fn quantile(&self, u: f64, theta: f64) -> Result<f64> {
        specfun::noncentral_chi_quantile(u, theta)
    }

    fn scale(&self, _theta: f64) -> f64 {
        1.0
    }
}

// ---------------------------------------------------------------------------
// Variance curvature
// ---------------------------------------------------------------------------

/// Normal whose variance bends with the mean: `y ~ Normal(theta, sigma^2)`
/// with `sigma^2(theta) = 1 + gamma * theta^2 / (2n)`, kept exact (no series
/// truncation) so it can serve as the oracle for the O(1/n) expansions.
///
/// The moderate-deviation window `|theta| <= sqrt(n)` is where the expansion
/// formulas are valid; [`VarianceCurvatureNormal::window`] exposes it and the
/// expansion layer enforces it. The model functions themselves are total on
/// the parameter domain, which is the whole line for `gamma >= 0` and the
/// open interval where the variance stays positive for `gamma < 0`
/// (represented with its endpoints pulled in by a relative 1e-9). Stochastic
/// ordering in `theta` holds on the window but can fail far outside it when
/// `gamma > 0` — out there only the asymptotic expansion story makes sense.
#[derive(Debug, Clone, Copy)]
pub struct VarianceCurvatureNormal {
    pub gamma: f64,
    pub n: f64,
}

impl VarianceCurvatureNormal {
    pub fn new(gamma: f64, n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sample size must be positive and finite, got {n}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "curvature must be finite, got {gamma}"
            )));
        }
        // sigma^2 at the window edge |theta| = sqrt(n) is 1 + gamma/2; the
        // variance must stay positive across the whole window.
        if 1.0 + gamma / 2.0 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "curvature {gamma} makes the variance non-positive on the \
                 moderate-deviation window (needs gamma > -2)"
            )));
        }
        Ok(VarianceCurvatureNormal { gamma, n })
    }

    /// Standard deviation at `theta`.
    pub fn sigma(&self, theta: f64) -> f64 {
        (1.0 + self.gamma * theta * theta / (2.0 * self.n)).sqrt()
    }

    /// Half-width of the moderate-deviation window.
    pub fn window(&self) -> f64 {
        self.n.sqrt()
    }
}

impl ScalarModel for VarianceCurvatureNormal {
    fn id(&self) -> &'static str {
        "curvature"
    }

    fn param_domain(&self) -> Interval {
        if self.gamma >= 0.0 {
            Interval::REAL
        } else {
            let b = (2.0 * self.n / -self.gamma).sqrt() * (1.0 - 1e-9);
            Interval::new(-b, b)
        }
    }

    fn obs_domain(&self) -> Interval {
        Interval::REAL
    }

    fn cdf(&self, y: f64, theta: f64) -> f64 {
        specfun::normal_cdf((y - theta) / self.sigma(theta))
    }

    fn pdf(&self, y: f64, theta: f64) -> f64 {
        let s = self.sigma(theta);
        specfun::normal_pdf((y - theta) / s) / s
    }

    fn quantile(&self, u: f64, theta: f64) -> Result<f64> {
        Ok(theta + self.sigma(theta) * specfun::normal_quantile(u)?)
    }

    fn pivot(&self, y: f64, theta: f64) -> f64 {
        (y - theta) / self.sigma(theta)
    }

    fn scale(&self, theta: f64) -> f64 {
        self.sigma(theta)
    }
}

// ---------------------------------------------------------------------------
// Descriptors and sampling
// ---------------------------------------------------------------------------

/// Typed model descriptor (the CLI parses its flags into this).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Location { kernel: Kernel, sigma: f64 },
    Bounded { theta0: f64, sigma: f64 },
    Curved,
    Curvature { gamma: f64, n: f64 },
}

/// Build a model from a descriptor, validating its parameters.
pub fn make_model(spec: &ModelSpec) -> Result<Box<dyn ScalarModel>> {
    Ok(match *spec {
        ModelSpec::Location { kernel, sigma } => Box::new(LocationModel::new(kernel, sigma)?),
        ModelSpec::Bounded { theta0, sigma } => Box::new(BoundedMeanNormal::new(theta0, sigma)?),
        ModelSpec::Curved => Box::new(CurvedRadiusModel),
        ModelSpec::Curvature { gamma, n } => Box::new(VarianceCurvatureNormal::new(gamma, n)?),
    })
}

/// Deterministic stream of uniform draws strictly inside (0, 1).
pub struct UniformSource {
    rng: ChaCha8Rng,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        UniformSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Next uniform variate in the open interval (0, 1): 52 random bits
    /// centered in their cell. With 52 bits the value `k + 0.5` is exactly
    /// representable for every k, so after scaling the endpoints 0.0 and 1.0
    /// are genuinely unreachable (53 bits would round the top cell to 1.0).
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
    }
}

/// Draw `count` observations at `theta` by inverse-CDF sampling,
/// deterministic in `seed`.
pub fn sample(
    model: &dyn ScalarModel,
    theta: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate_theta(theta)?;
    let mut src = UniformSource::new(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(model.quantile(src.next_uniform(), theta)?);
    }
    Ok(out)
}
