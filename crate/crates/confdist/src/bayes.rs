//! Posterior construction from prior × likelihood, posterior survivor values
//! and quantiles, closed-form posteriors for the noncentral-radius model, and
//! the data-dependent default prior computed from model sensitivity.
//!
//! A [`Posterior`] is normalized once at construction by peak-anchored
//! adaptive quadrature; evaluation afterwards is cheap. Improper flat priors
//! are supported by normalizing the product prior × likelihood directly —
//! a product whose integral diverges is reported as
//! [`Error::NonIntegrable`](crate::Error::NonIntegrable), never silently
//! truncated.

use crate::error::{Error, Result};
use crate::models::{Interval, ScalarModel};
use crate::num::deriv::central_derivative;
use crate::num::quad::{integrate, integrate_peaked};
use crate::num::root::solve_bracketed;
use crate::report::sig10;
use crate::specfun::{noncentral_chi_cdf, noncentral_chi_quantile};

/// Relative finite-difference step for CDF partials. Deliberately much larger
/// than the usual ~1e-5: the two partials are read off CDF *values*, whose
/// rounding noise is amplified by 1/(2h), and one Richardson level keeps the
/// truncation error of the larger step far below the 1e-6 accuracy target.
const FD_STEP_REL: f64 = 2e-3;

/// Minimum magnitude of a CDF central difference, relative to the CDF values
/// themselves, for the difference to count as resolved rather than rounding
/// noise (about a thousand ulps).
const FD_COND_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Absolute tolerance for the normalization quadrature.
const NORM_TOL: f64 = 1e-10;

/// Absolute tolerance for the per-segment mass refinement and for partial
/// (survivor) integrals. Segments number at most a few hundred, so the total
/// drift stays well under 1e-9.
const SEG_TOL: f64 = 1e-12;

/// How the linear coefficient of an expansion prior scales with sample size:
/// `exp(aθ/√n + cθ²/2n)` or `exp(aθ/n + cθ²/2n)`. Both arise as O(1/n)
/// perturbations of a flat prior, differing in whether the tilt acts at the
/// √n (standardized) or n (raw) scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiltScale {
    SqrtN,
    N,
}

/// A prior weight function over the parameter.
///
/// `Custom` borrows its closure, so a prior built from a model-dependent
/// sensitivity (e.g. [`default_prior`]) can capture local references without
/// boxing.
#[derive(Clone, Copy)]
pub enum Prior<'p> {
    /// Improper constant weight 1. Only the product with the likelihood is
    /// ever normalized, so impropriety is fine as long as that product decays.
    Flat,
    /// `exp(aθ/s(n) + cθ²/2n)` with `s(n)` chosen by `scale`.
    Expansion {
        a: f64,
        c: f64,
        n: f64,
        scale: TiltScale,
    },
    /// Arbitrary non-negative weight.
    Custom(&'p (dyn Fn(f64) -> f64 + Send + Sync)),
}

impl std::fmt::Debug for Prior<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Prior::Flat => write!(f, "Flat"),
            Prior::Expansion { a, c, n, scale } => f
                .debug_struct("Expansion")
                .field("a", a)
                .field("c", c)
                .field("n", n)
                .field("scale", scale)
                .finish(),
            Prior::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Prior<'_> {
    /// Prior weight at `theta`. Not normalized; may be improper.
    pub fn weight(&self, theta: f64) -> f64 {
        match self {
            Prior::Flat => 1.0,
            Prior::Expansion { a, c, n, scale } => {
                let tilt = match scale {
                    TiltScale::SqrtN => a * theta / n.sqrt(),
                    TiltScale::N => a * theta / n,
                };
                (tilt + c * theta * theta / (2.0 * n)).exp()
            }
            Prior::Custom(f) => f(theta),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Prior::Expansion { a, c, n, .. } = self {
            if !(n.is_finite() && *n > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "expansion prior needs finite n > 0, got n={n}"
                )));
            }
            if !a.is_finite() || !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "expansion prior coefficients must be finite, got a={a}, c={c}"
                )));
            }
        }
        Ok(())
    }
}

/// A normalized posterior `c · π(θ) · f(y⁰; θ)` for one observed data point.
///
/// Construction performs the normalization quadrature and caches the octave
/// segmentation together with per-segment masses and suffix sums, so survivor
/// evaluations later touch a single partial segment each.
pub struct Posterior<'a> {
    model: &'a dyn ScalarModel,
    prior: Prior<'a>,
    y0: f64,
    /// Integral of prior × likelihood over the support window.
    normalizer: f64,
    /// Window carrying the entire posterior mass to working precision.
    support: Interval,
    /// Sorted segment edges spanning `support`.
    breaks: Vec<f64>,
    /// `suffix[k]` = mass of segments `k..` divided by nothing (raw scale);
    /// `suffix[0] == normalizer`, `suffix[breaks.len()-1] == 0`.
    suffix: Vec<f64>,
    /// Largest integrand value seen during normalization (raw scale).
    peak: f64,
}

impl std::fmt::Debug for Posterior<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Posterior")
            .field("model", &self.model.id())
            .field("prior", &self.prior)
            .field("y0", &self.y0)
            .field("normalizer", &self.normalizer)
            .field("support", &self.support.describe())
            .field("segments", &(self.breaks.len().saturating_sub(1)))
            .finish()
    }
}

impl<'a> Posterior<'a> {
    /// Build the posterior for `model` given data `y0` and `prior`.
    ///
    /// Errors when `y0` lies outside the observation domain, the prior is
    /// malformed, the product prior × likelihood fails to integrate
    /// ([`Error::NonIntegrable`](crate::Error::NonIntegrable)), or it
    /// evaluates non-finite anywhere the quadrature looks.
    pub fn new(model: &'a dyn ScalarModel, prior: Prior<'a>, y0: f64) -> Result<Self> {
        prior.validate()?;
        if !model.obs_domain().contains(y0) {
            return Err(Error::OutsideDomain {
                what: "data point",
                value: y0,
                domain: model.obs_domain().describe(),
            });
        }

        let dom = model.param_domain();
        let anchor = y0.clamp(
            if dom.lo.is_finite() { dom.lo } else { y0 },
            if dom.hi.is_finite() { dom.hi } else { y0 },
        );
        let scale = model.scale(anchor);
        let g = |theta: f64| prior.weight(theta) * model.pdf(y0, theta);

        let window = integrate_peaked(g, anchor, scale, dom.lo, dom.hi, NORM_TOL)?;

        // Re-derive per-segment masses at a tolerance fine enough that the
        // suffix sums and later partial integrals agree to ~1e-10.
        let breaks = window.breaks;
        let nseg = breaks.len() - 1;
        let mut masses = Vec::with_capacity(nseg);
        for k in 0..nseg {
            masses.push(integrate(g, breaks[k], breaks[k + 1], SEG_TOL)?);
        }
        let mut suffix = vec![0.0; nseg + 1];
        for k in (0..nseg).rev() {
            suffix[k] = suffix[k + 1] + masses[k];
        }
        let normalizer = suffix[0];
        if !(normalizer.is_finite() && normalizer > 0.0) {
            return Err(Error::ZeroDensity { at: y0 });
        }

        Ok(Posterior {
            model,
            prior,
            y0,
            normalizer,
            support: Interval::new(window.lo, window.hi),
            breaks,
            suffix,
            peak: window.peak,
        })
    }

    /// The model this posterior was built over.
    pub fn model(&self) -> &dyn ScalarModel {
        self.model
    }

    /// Observed data point.
    pub fn y0(&self) -> f64 {
        self.y0
    }

    /// Normalizing constant: the integral of prior × likelihood.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Window outside which the posterior density is below 1e-16 of its peak
    /// (or the parameter domain ends).
    pub fn support(&self) -> Interval {
        self.support
    }

    /// Largest normalized density value seen during construction.
    pub fn peak_density(&self) -> f64 {
        self.peak / self.normalizer
    }

    /// Normalized posterior density at `theta`.
    ///
    /// Outside the parameter domain the density is 0 by convention; inside
    /// the domain but outside [`support`](Self::support) it is evaluated
    /// directly (and is below 1e-16 of the peak by construction).
    pub fn density(&self, theta: f64) -> f64 {
        if !self.model.param_domain().contains(theta) {
            return 0.0;
        }
        self.prior.weight(theta) * self.model.pdf(self.y0, theta) / self.normalizer
    }

    /// Posterior survivor value `s(θ) = ∫_θ^∞ density`.
    ///
    /// Decreasing from 1 at the lower end of the support to 0 at the upper
    /// end; constant 1 below the support window and 0 above it.
    pub fn survivor(&self, theta: f64) -> f64 {
        if theta <= self.support.lo {
            return 1.0;
        }
        if theta >= self.support.hi {
            return 0.0;
        }
        // First break strictly above theta; support bounds guarantee
        // 1 <= idx <= breaks.len() - 1.
        let idx = self.breaks.partition_point(|&b| b <= theta);
        let g = |t: f64| self.prior.weight(t) * self.model.pdf(self.y0, t);
        let partial = integrate(g, theta, self.breaks[idx], SEG_TOL)
            .expect("integrand was finite over this segment during construction");
        ((partial + self.suffix[idx]) / self.normalizer).clamp(0.0, 1.0)
    }

    /// Tabulate the survivor over a grid.
    pub fn survivor_grid(&self, thetas: &[f64]) -> Vec<f64> {
        thetas.iter().map(|&t| self.survivor(t)).collect()
    }

    /// Solve `survivor(θ) = β` for θ.
    ///
    /// Errors when `β` is outside (0,1); the root always exists inside the
    /// support window because the survivor spans [0,1] across it.
    pub fn quantile(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::OutsideDomain {
                what: "posterior probability level",
                value: beta,
                domain: "(0, 1)".to_string(),
            });
        }
        let (lo, hi) = (self.support.lo, self.support.hi);
        let xtol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        solve_bracketed(|t| self.survivor(t) - beta, lo, hi, xtol)
    }

    /// CSV export of density and survivor over a grid:
    /// columns `theta,density,survivor`.
    pub fn to_csv(&self, thetas: &[f64]) -> String {
        let mut out = String::from("theta,density,survivor\n");
        for &t in thetas {
            out.push_str(&format!(
                "{},{},{}\n",
                sig10(t),
                sig10(self.density(t)),
                sig10(self.survivor(t))
            ));
        }
        out
    }
}

/// Closed-form posterior survivor for the noncentral-radius model under the
/// flat planar prior (weight ∝ ρ on the radius scale): `s(ρ) = 1 − H₂(ρ; r⁰)`
/// — the noncentral CDF with the roles of data and parameter exchanged.
pub fn curved_survivor(r0: f64, rho: f64) -> Result<f64> {
    for (what, v) in [("observed radius", r0), ("radius parameter", rho)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::OutsideDomain {
                what,
                value: v,
                domain: "[0, inf)".to_string(),
            });
        }
    }
    Ok(1.0 - noncentral_chi_cdf(rho, r0))
}

/// Closed-form posterior β-quantile for the noncentral-radius model under the
/// flat planar prior: the (1−β)-quantile of the noncentral chi distribution
/// with noncentrality `r0`.
pub fn curved_posterior_quantile(r0: f64, beta: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(Error::OutsideDomain {
            what: "observed radius",
            value: r0,
            domain: "[0, inf)".to_string(),
        });
    }
    noncentral_chi_quantile(1.0 - beta, r0)
}

/// The data-dependent default prior at `theta`:
/// `−F_;θ(y⁰; θ) / F_y(y⁰; θ)`, both partial derivatives taken by central
/// differences with Richardson extrapolation. Geometrically this is `dy/dθ`
/// along the fixed-p-value contour through `(y⁰, θ)` — the amount the data
/// would have to move to compensate a unit move of the parameter.
///
/// Requires `theta` interior to the parameter domain and `y0` interior to the
/// observation domain (central differences step outside otherwise), and a
/// nonzero density at `(y⁰, θ)`.
pub fn default_prior(model: &dyn ScalarModel, y0: f64, theta: f64) -> Result<f64> {
    let dom = model.param_domain();
    let h_theta = FD_STEP_REL * (1.0 + theta.abs());
    if !(dom.contains(theta - h_theta) && dom.contains(theta + h_theta)) {
        return Err(Error::OutsideDomain {
            what: "parameter (must be interior for differentiation)",
            value: theta,
            domain: dom.describe(),
        });
    }
    let obs = model.obs_domain();
    let h_y = FD_STEP_REL * (1.0 + y0.abs());
    if !(obs.contains(y0 - h_y) && obs.contains(y0 + h_y)) {
        return Err(Error::OutsideDomain {
            what: "data point (must be interior for differentiation)",
            value: y0,
            domain: obs.describe(),
        });
    }

    let (f_theta, _) = cdf_partial(|t| model.cdf(y0, t), theta);
    let (f_y, resolved) = cdf_partial(|y| model.cdf(y, theta), y0);
    // An unresolved denominator means the CDF sweep in y moved by only a few
    // ulps: the density at (y0, theta) is below differencing resolution.
    if !f_y.is_finite() || !resolved || f_y.abs() < 1e-300 {
        return Err(Error::ZeroDensity { at: y0 });
    }
    Ok(-f_theta / f_y)
}

/// Richardson-extrapolated central difference of a CDF section, together with
/// whether the underlying differences stood clear of rounding noise.
fn cdf_partial<F: Fn(f64) -> f64>(g: F, x: f64) -> (f64, bool) {
    let h = FD_STEP_REL * (1.0 + x.abs());
    let (p1, m1) = (g(x + h), g(x - h));
    let (p2, m2) = (g(x + 0.5 * h), g(x - 0.5 * h));
    let d1 = (p1 - m1) / (2.0 * h);
    let d2 = (p2 - m2) / h;
    let deriv = (4.0 * d2 - d1) / 3.0;
    let mag = p1.abs().max(m1.abs()).max(1e-300);
    let resolved = (p1 - m1).abs().min((p2 - m2).abs()) >= FD_COND_FLOOR * mag;
    (deriv, resolved)
}

/// Sensitivity of the parameter at the data point, computed from the pivot:
/// `|z_;θ(y⁰; θ)| / |z_y(y⁰; θ)|`.
///
/// For scalar models this equals [`default_prior`] (the pivot is any smooth
/// relabeling of the CDF contours, and the ratio of partials is invariant
/// under relabeling); it is kept separate because models that override
/// [`ScalarModel::pivot`] give an independent difference scheme to check the
/// CDF-based route against.
pub fn sensitivity(model: &dyn ScalarModel, y0: f64, theta: f64) -> Result<f64> {
    let dom = model.param_domain();
    let h_theta = crate::num::deriv::step_at(theta);
    if !(dom.contains(theta - h_theta) && dom.contains(theta + h_theta)) {
        return Err(Error::OutsideDomain {
            what: "parameter (must be interior for differentiation)",
            value: theta,
            domain: dom.describe(),
        });
    }
    let z_theta = central_derivative(|t| model.pivot(y0, t), theta);
    let z_y = central_derivative(|y| model.pivot(y, theta), y0);
    if !z_y.is_finite() || z_y.abs() < 1e-300 {
        return Err(Error::ZeroDensity { at: y0 });
    }
    Ok((z_theta / z_y).abs())
}

/// Build the posterior under the default prior and return the largest
/// absolute discrepancy `max_θ |s(θ) − p(θ)|` between its survivor and the
/// confidence p-value over `thetas`.
///
/// With the default prior the two inversion routes agree up to quadrature
/// and differentiation error, so this is a numeric verification of that
/// reconciliation for any concrete model.
pub fn default_posterior_equals_confidence(
    model: &dyn ScalarModel,
    y0: f64,
    thetas: &[f64],
) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::InvalidArgument(
            "empty parameter grid".to_string(),
        ));
    }
    for &t in thetas {
        model.validate_theta(t)?;
    }
    // The CDF-difference route loses all precision where the CDF saturates
    // at 1 (the likelihood there is ~1e-15 of the peak, but the normalization
    // sweep still has to look). The pivot route computes the same ratio of
    // partials through a better-conditioned relabeling, so fall back to it;
    // if both fail, the NaN surfaces as a non-finite-integrand error rather
    // than silently skewing the normalizer.
    let weight = |t: f64| {
        default_prior(model, y0, t)
            .or_else(|_| sensitivity(model, y0, t))
            .unwrap_or(f64::NAN)
    };
    let post = Posterior::new(model, Prior::Custom(&weight), y0)?;
    let mut worst = 0.0f64;
    for &t in thetas {
        let p = crate::confidence::p_value(model, y0, t)?;
        let s = post.survivor(t);
        worst = worst.max((s - p).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confidence::p_value;
    use crate::models::{
        sample, BoundedMeanNormal, CurvedRadiusModel, Kernel, LocationModel,
        VarianceCurvatureNormal,
    };
    use crate::num::grid;
    use crate::specfun::{normal_cdf, normal_quantile};

    #[test]
    fn flat_location_survivor_matches_confidence() {
        // For pure location models the flat-prior posterior survivor and the
        // confidence p-value are the same function of theta.
        for kernel in [Kernel::Normal, Kernel::ExtremeValue] {
            let model = LocationModel::new(kernel, 1.0).expect("valid location model");
            let draws = sample(&model, 0.3, 20, 42).expect("sampling y0 values");
            for &y0 in &draws {
                let post = Posterior::new(&model, Prior::Flat, y0).expect("flat posterior");
                for &theta in &grid(y0 - 4.0, y0 + 4.0, 0.5).unwrap() {
                    let s = post.survivor(theta);
                    let p = p_value(&model, y0, theta).unwrap();
                    assert!(
                        (s - p).abs() < 1e-8,
                        "{} y0={y0}: survivor {s} vs p-value {p} at theta={theta}",
                        model.id()
                    );
                }
            }
        }
    }

    #[test]
    fn bounded_flat_posterior_matches_truncated_normal() {
        // Flat prior on [theta0, inf) with a normal likelihood gives the
        // truncated normal survivor Phi(y0 - theta) / Phi(y0 - theta0).
        let model = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let y0 = 1.0;
        let post = Posterior::new(&model, Prior::Flat, y0).expect("flat posterior");
        let denom = normal_cdf(y0);
        for &theta in &grid(0.0, 4.0, 0.125).unwrap() {
            let want = normal_cdf(y0 - theta) / denom;
            let got = post.survivor(theta);
            assert!(
                (got - want).abs() < 1e-8,
                "survivor {got} vs closed form {want} at theta={theta}"
            );
        }
        // Full mass at the lower bound, and the specific interior value
        // Phi(0)/Phi(1) = 0.59428671...
        assert_eq!(post.survivor(0.0), 1.0, "survivor at the bound is 1");
        let mid = post.survivor(1.0);
        let want_mid = 0.5 / normal_cdf(1.0);
        assert!(
            (mid - want_mid).abs() < 1e-8,
            "survivor at theta=1: {mid} vs {want_mid}"
        );
        assert!(
            (mid - 0.594_286_708_672_530).abs() < 1e-9,
            "frozen interior survivor value, got {mid}"
        );
    }

    #[test]
    fn bounded_flat_quantile_closed_form() {
        // Solving Phi(y0 - theta) = beta * Phi(y0 - theta0) gives
        // theta = y0 - z_{beta * Phi(y0)} for theta0 = 0.
        let model = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let y0 = 1.0;
        let post = Posterior::new(&model, Prior::Flat, y0).unwrap();
        for beta in [0.05, 0.25, 0.5, 0.9, 0.99] {
            let got = post.quantile(beta).expect("quantile");
            let want = y0 - normal_quantile(beta * normal_cdf(y0)).unwrap();
            assert!(
                (got - want).abs() < 1e-8,
                "beta={beta}: quantile {got} vs closed form {want}"
            );
        }
        let median = post.quantile(0.5).unwrap();
        assert!(
            (median - 1.2002).abs() < 5e-4,
            "median of the truncated posterior near 1.2002, got {median}"
        );
    }

    #[test]
    fn location_flat_quantile_median_is_data_point() {
        let model = LocationModel::new(Kernel::Normal, 1.0).unwrap();
        let post = Posterior::new(&model, Prior::Flat, 2.5).unwrap();
        let median = post.quantile(0.5).unwrap();
        assert!(
            (median - 2.5).abs() < 1e-9,
            "symmetric flat posterior median is y0, got {median}"
        );
    }

    #[test]
    fn flat_prior_on_curvature_family_is_not_integrable() {
        // sigma(theta) grows like |theta|/sqrt(2n/gamma), so the likelihood
        // decays only like 1/theta and the flat product diverges.
        let model = VarianceCurvatureNormal::new(1.0, 10.0).unwrap();
        let err = Posterior::new(&model, Prior::Flat, 1.0).unwrap_err();
        assert!(
            matches!(err, Error::NonIntegrable { .. }),
            "expected NonIntegrable, got {err:?}"
        );
    }

    #[test]
    fn default_prior_tames_curvature_tails() {
        // The default prior decays like 1/theta, which restores an
        // integrable 1/theta^2 tail; construction must succeed. Same
        // fallback chain as default_posterior_equals_confidence: far out the
        // CDF saturates and the pivot route carries the weight.
        let model = VarianceCurvatureNormal::new(1.0, 10.0).unwrap();
        let weight = |t: f64| {
            default_prior(&model, 1.0, t)
                .or_else(|_| sensitivity(&model, 1.0, t))
                .unwrap_or(f64::NAN)
        };
        let post = Posterior::new(&model, Prior::Custom(&weight), 1.0)
            .expect("default-prior posterior integrates");
        assert!(post.normalizer() > 0.0);
    }

    #[test]
    fn default_prior_is_one_for_location_models() {
        for kernel in [Kernel::Normal, Kernel::ExtremeValue] {
            let model = LocationModel::new(kernel, 1.0).unwrap();
            for theta in [-2.0, -0.5, 0.0, 1.0, 3.0] {
                let w = default_prior(&model, 0.7, theta).unwrap();
                assert!(
                    (w - 1.0).abs() < 1e-6,
                    "{} default prior at theta={theta}: {w}",
                    model.id()
                );
            }
        }
    }

    #[test]
    fn default_prior_curvature_example() {
        // Exact sensitivity is 1 + gamma * y0 * theta / 2n + O(1/n^2); at
        // gamma=1, n=10, y0=1, theta=0.5 that is 1.0125 up to the O(1/n^2)
        // remainder.
        let model = VarianceCurvatureNormal::new(1.0, 10.0).unwrap();
        let w = default_prior(&model, 1.0, 0.5).unwrap();
        assert!(
            (w - 1.0125).abs() < 2e-3,
            "curvature default prior near 1.0125, got {w}"
        );
    }

    /// Location-normal CDF with the parameter measured on a doubled scale:
    /// F(y; theta) = Phi(y - 2 theta). The fixed-p contour moves dy/dtheta=2.
    struct DoubledLocation;

    impl ScalarModel for DoubledLocation {
        fn id(&self) -> &'static str {
            "test:doubled-location"
        }
        fn param_domain(&self) -> Interval {
            Interval::REAL
        }
        fn obs_domain(&self) -> Interval {
            Interval::REAL
        }
        fn cdf(&self, y: f64, theta: f64) -> f64 {
            normal_cdf(y - 2.0 * theta)
        }
        fn pdf(&self, y: f64, theta: f64) -> f64 {
            crate::specfun::normal_pdf(y - 2.0 * theta)
        }
        fn quantile(&self, u: f64, theta: f64) -> Result<f64> {
            Ok(2.0 * theta + normal_quantile(u)?)
        }
        fn scale(&self, _theta: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn default_prior_respects_parameter_rescaling() {
        let w = default_prior(&DoubledLocation, 0.4, -0.3).unwrap();
        assert!(
            (w - 2.0).abs() < 1e-6,
            "doubled parameter scale gives default prior 2, got {w}"
        );
    }

    #[test]
    fn sensitivity_matches_default_prior() {
        // The pivot route (location: z = (y-theta)/sigma; curvature model
        // uses its own standardization) must agree with the CDF route.
        let curvature = VarianceCurvatureNormal::new(1.0, 10.0).unwrap();
        let bounded = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let location = LocationModel::new(Kernel::ExtremeValue, 2.0).unwrap();
        let models: [(&dyn ScalarModel, f64, &[f64]); 3] = [
            (&curvature, 1.0, &[-1.5, -0.25, 0.5, 2.0]),
            (&bounded, 1.0, &[0.5, 1.0, 2.5]),
            (&location, -0.3, &[-2.0, 0.0, 1.0]),
        ];
        for (model, y0, thetas) in models {
            for &theta in thetas {
                let a = default_prior(model, y0, theta).unwrap();
                let b = sensitivity(model, y0, theta).unwrap();
                assert!(
                    (a - b).abs() < 1e-6,
                    "{} at theta={theta}: cdf route {a} vs pivot route {b}",
                    model.id()
                );
            }
        }
    }

    #[test]
    fn default_prior_rejects_boundary_parameter() {
        let model = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let err = default_prior(&model, 1.0, 0.0).unwrap_err();
        assert!(
            matches!(err, Error::OutsideDomain { .. }),
            "boundary theta cannot be differentiated, got {err:?}"
        );
    }

    #[test]
    fn curved_flat_planar_prior_matches_closed_form() {
        // A flat prior on the plane is weight rho on the radius scale; the
        // resulting posterior survivor is 1 - H2(rho; r0) by the density
        // exchange identity rho * h2(r0; rho) = r0 * h2(rho; r0).
        let model = CurvedRadiusModel;
        let r0 = 5.0;
        let weight = |rho: f64| rho;
        let post = Posterior::new(&model, Prior::Custom(&weight), r0).expect("planar prior");
        for &rho in &grid(0.25, 10.0, 0.25).unwrap() {
            let got = post.survivor(rho);
            let want = curved_survivor(r0, rho).unwrap();
            assert!(
                (got - want).abs() < 1e-8,
                "quadrature survivor {got} vs closed form {want} at rho={rho}"
            );
        }
        for beta in [0.1, 0.5, 0.9] {
            let got = post.quantile(beta).unwrap();
            let want = curved_posterior_quantile(r0, beta).unwrap();
            assert!(
                (got - want).abs() < 1e-6,
                "beta={beta}: quadrature quantile {got} vs chi quantile {want}"
            );
        }
    }

    #[test]
    fn curved_survivor_trivial_values() {
        assert_eq!(
            curved_survivor(3.0, 0.0).unwrap(),
            1.0,
            "no mass below radius zero"
        );
        let s = curved_survivor(0.0, 2.0).unwrap();
        let want = (-2.0f64 * 2.0 / 2.0).exp();
        assert!(
            (s - want).abs() < 1e-12,
            "central case reduces to the Rayleigh tail, {s} vs {want}"
        );
        assert!(curved_survivor(-1.0, 2.0).is_err(), "negative data rejected");
        assert!(
            curved_survivor(1.0, -2.0).is_err(),
            "negative parameter rejected"
        );
    }

    #[test]
    fn bayes_error_is_positive_for_curved_model() {
        // s(rho) - p(rho) > 0 throughout: the flat planar prior overstates
        // upper-tail posterior probability relative to confidence.
        let r0 = 5.0;
        for &rho in &grid(0.15, 10.0, 0.05).unwrap() {
            let s = curved_survivor(r0, rho).unwrap();
            let p = noncentral_chi_cdf(r0, rho);
            assert!(
                s - p > 0.0,
                "survivor minus p-value should be positive at rho={rho}: s={s} p={p}"
            );
        }
    }

    #[test]
    fn posterior_densities_are_normalized() {
        let ev = LocationModel::new(Kernel::ExtremeValue, 1.5).unwrap();
        let normal = LocationModel::new(Kernel::Normal, 1.0).unwrap();
        let bounded = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let curved = CurvedRadiusModel;
        let planar = |rho: f64| rho;
        let posts: Vec<Posterior> = vec![
            Posterior::new(&ev, Prior::Flat, 0.8).unwrap(),
            Posterior::new(&bounded, Prior::Flat, 1.0).unwrap(),
            Posterior::new(&curved, Prior::Custom(&planar), 5.0).unwrap(),
            Posterior::new(
                &normal,
                Prior::Expansion {
                    a: 0.5,
                    c: 1.0,
                    n: 10.0,
                    scale: TiltScale::SqrtN,
                },
                0.0,
            )
            .unwrap(),
        ];
        for post in &posts {
            let sup = post.support();
            let mass = integrate(|t| post.density(t), sup.lo, sup.hi, 1e-11)
                .unwrap_or_else(|e| panic!("normalization sweep for {}: {e:?}", post.model().id()));
            assert!(
                (mass - 1.0).abs() < 1e-8,
                "posterior over {} integrates to {mass}",
                post.model().id()
            );
        }
    }

    #[test]
    fn growing_prior_on_exponential_tail_is_rejected() {
        // The extreme-value kernel decays only exponentially on one side, so
        // a prior growing like exp(c theta^2 / 2n) makes the product diverge;
        // construction must fail rather than return a truncated normalizer.
        let ev = LocationModel::new(Kernel::ExtremeValue, 1.5).unwrap();
        let err = Posterior::new(
            &ev,
            Prior::Expansion {
                a: 0.5,
                c: 1.0,
                n: 10.0,
                scale: TiltScale::SqrtN,
            },
            0.0,
        )
        .unwrap_err();
        assert!(
            matches!(
                err,
                Error::NonIntegrable { .. } | Error::NonFiniteIntegrand { .. }
            ),
            "diverging product must be rejected, got {err:?}"
        );
    }

    #[test]
    fn quantile_survivor_roundtrip() {
        let location = LocationModel::new(Kernel::Normal, 2.0).unwrap();
        let bounded = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let posts: Vec<Posterior> = vec![
            Posterior::new(&location, Prior::Flat, -1.0).unwrap(),
            Posterior::new(&bounded, Prior::Flat, 2.0).unwrap(),
        ];
        for post in &posts {
            for beta in [0.01, 0.2, 0.5, 0.8, 0.99] {
                let q = post.quantile(beta).unwrap();
                let s = post.survivor(q);
                assert!(
                    (s - beta).abs() < 1e-8,
                    "{}: survivor(quantile({beta})) = {s}",
                    post.model().id()
                );
            }
        }
    }

    #[test]
    fn expansion_prior_weights_and_scalings() {
        let sqrt_n = Prior::Expansion {
            a: 0.5,
            c: 1.0,
            n: 10.0,
            scale: TiltScale::SqrtN,
        };
        let raw_n = Prior::Expansion {
            a: 0.5,
            c: 1.0,
            n: 10.0,
            scale: TiltScale::N,
        };
        let theta = 1.3;
        let want_sqrt = (0.5 * theta / 10.0f64.sqrt() + theta * theta / 20.0).exp();
        let want_raw = (0.5 * theta / 10.0 + theta * theta / 20.0).exp();
        assert!((sqrt_n.weight(theta) - want_sqrt).abs() < 1e-15);
        assert!((raw_n.weight(theta) - want_raw).abs() < 1e-15);
        assert!(sqrt_n.weight(theta) > raw_n.weight(theta));

        let bad = Prior::Expansion {
            a: 0.5,
            c: 1.0,
            n: -1.0,
            scale: TiltScale::N,
        };
        let model = LocationModel::new(Kernel::Normal, 1.0).unwrap();
        assert!(
            Posterior::new(&model, bad, 0.0).is_err(),
            "negative n in expansion prior is rejected"
        );
    }

    #[test]
    fn expansion_prior_tilts_the_posterior_upward() {
        // A positive tilt moves posterior mass to the right of the flat case.
        let model = LocationModel::new(Kernel::Normal, 1.0).unwrap();
        let flat = Posterior::new(&model, Prior::Flat, 0.0).unwrap();
        let tilted = Posterior::new(
            &model,
            Prior::Expansion {
                a: 1.0,
                c: 0.5,
                n: 25.0,
                scale: TiltScale::SqrtN,
            },
            0.0,
        )
        .unwrap();
        let (mf, mt) = (flat.quantile(0.5).unwrap(), tilted.quantile(0.5).unwrap());
        assert!(
            mt > mf + 0.05,
            "tilted median {mt} should exceed flat median {mf}"
        );
    }

    #[test]
    fn default_posterior_matches_confidence_location() {
        let model = LocationModel::new(Kernel::Normal, 1.0).unwrap();
        let gap =
            default_posterior_equals_confidence(&model, 0.3, &grid(-3.0, 3.5, 0.25).unwrap())
                .unwrap();
        assert!(gap < 1e-8, "location reconciliation gap {gap}");
    }

    #[test]
    fn default_posterior_matches_confidence_curvature() {
        let model = VarianceCurvatureNormal::new(1.0, 20.0).unwrap();
        let gap =
            default_posterior_equals_confidence(&model, 0.7, &grid(-4.0, 4.0, 0.1).unwrap())
                .unwrap();
        assert!(gap < 1e-5, "curvature reconciliation gap {gap}");
    }

    #[test]
    fn default_posterior_matches_confidence_bounded_interior() {
        let model = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let gap =
            default_posterior_equals_confidence(&model, 5.0, &grid(0.5, 8.0, 0.25).unwrap())
                .unwrap();
        assert!(gap < 1e-5, "bounded interior reconciliation gap {gap}");
    }

    #[test]
    fn posterior_csv_shape() {
        let model = LocationModel::new(Kernel::Normal, 1.0).unwrap();
        let post = Posterior::new(&model, Prior::Flat, 0.0).unwrap();
        let csv = post.to_csv(&grid(-1.0, 1.0, 0.5).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta,density,survivor");
        assert_eq!(lines.len(), 6, "header plus five grid rows");
        assert!(
            lines[3].starts_with("0,0.3989422804,"),
            "center row carries the standard normal mode: {}",
            lines[3]
        );
    }

    #[test]
    fn posterior_rejects_bad_inputs() {
        let bounded = BoundedMeanNormal::new(0.0, 1.0).unwrap();
        let curved = CurvedRadiusModel;
        assert!(
            matches!(
                Posterior::new(&curved, Prior::Flat, -1.0),
                Err(Error::OutsideDomain { .. })
            ),
            "negative observed radius rejected"
        );
        let post = Posterior::new(&bounded, Prior::Flat, 1.0).unwrap();
        for bad in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(
                post.quantile(bad).is_err(),
                "probability level {bad} must be rejected"
            );
        }
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn survivor_is_decreasing(y0 in -3.0f64..3.0, a in -2.0f64..2.0, d in 0.01f64..2.0) {
                let model = LocationModel::new(Kernel::Normal, 1.0).unwrap();
                let post = Posterior::new(&model, Prior::Flat, y0).unwrap();
                let (s1, s2) = (post.survivor(a), post.survivor(a + d));
                prop_assert!(s2 <= s1 + 1e-12, "survivor rose from {s1} to {s2}");
            }

            #[test]
            fn quantile_roundtrip(beta in 0.001f64..0.999) {
                let model = BoundedMeanNormal::new(0.0, 1.0).unwrap();
                let post = Posterior::new(&model, Prior::Flat, 1.5).unwrap();
                let q = post.quantile(beta).unwrap();
                prop_assert!((post.survivor(q) - beta).abs() < 1e-8);
            }
        }
    }
}
