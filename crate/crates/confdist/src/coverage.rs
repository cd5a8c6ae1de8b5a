//! Frequentist audits of quantile procedures: for a rule `y ↦ θ̂_β(y)` that
//! asserts "the parameter exceeds θ̂_β(y)", what fraction of repeated samples
//! actually makes that assertion true?
//!
//! The audit runs two independent ways: a Monte Carlo oracle (sample `Y|θ`,
//! apply the rule, count strict successes) and deterministic quadrature for
//! the two models where the coverage event has a tractable region (the
//! bounded mean and the noncentral radius). Grid sweeps are embarrassingly
//! parallel; each cell derives its own seed from the cell index so reports
//! are reproducible regardless of scheduling.

use crate::bayes::{curved_posterior_quantile, Prior};
use crate::confidence::confidence_quantile;
use crate::error::{Error, Result};
use crate::models::{sample, BoundedMeanNormal, Interval, ScalarModel, UniformSource};
use crate::num::quad::integrate;
use crate::num::root::solve_bracketed;
use crate::report::sig10;
use crate::specfun::{noncentral_chi_cdf, normal_cdf, normal_pdf, normal_quantile};

/// Where a quantile rule comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Confidence,
    BayesFlat,
    BayesPrior { a: f64, c: f64 },
    Expansion,
}

/// A lower-bound rule `y ↦ θ̂_β(y)` whose assertion is `θ > θ̂_β(y)`.
pub struct QuantileProcedure {
    pub id: String,
    pub provenance: Provenance,
    rule: Box<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for QuantileProcedure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuantileProcedure")
            .field("id", &self.id)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl QuantileProcedure {
    pub fn new(
        id: impl Into<String>,
        provenance: Provenance,
        rule: Box<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>,
    ) -> Self {
        QuantileProcedure {
            id: id.into(),
            provenance,
            rule,
        }
    }

    /// Evaluate the rule at data `y` and level `beta`.
    pub fn bound(&self, y: f64, beta: f64) -> Result<f64> {
        (self.rule)(y, beta)
    }

    /// Numeric check that the rule is non-decreasing in `y` at fixed `beta`.
    pub fn check_monotone(&self, beta: f64, y_grid: &[f64]) -> Result<()> {
        let mut prev: Option<(f64, f64)> = None;
        for &y in y_grid {
            let b = self.bound(y, beta)?;
            if let Some((py, pb)) = prev {
                let slack = 1e-9 * (1.0 + pb.abs());
                if b < pb - slack {
                    return Err(Error::InvalidArgument(format!(
                        "rule {} is not monotone at beta={beta}: bound({py}) = {pb} \
                         but bound({y}) = {b}",
                        self.id
                    )));
                }
            }
            prev = Some((y, b));
        }
        Ok(())
    }
}

/// The exact-coverage procedure: invert the p-value function of `model`.
pub fn confidence_procedure<M: ScalarModel + Clone + 'static>(model: M) -> QuantileProcedure {
    let id = format!("confidence:{}", model.id());
    QuantileProcedure::new(
        id,
        Provenance::Confidence,
        Box::new(move |y, beta| Ok(confidence_quantile(&model, y, beta)?.theta)),
    )
}

/// Closed-form flat-prior posterior quantile rule for the bounded mean:
/// `θ̂_β(y) = y − σ·z_q` with `q = β·Φ((y−θ₀)/σ)`, always at or above `θ₀`.
pub fn bounded_bayes_procedure(theta0: f64, sigma: f64) -> Result<QuantileProcedure> {
    BoundedMeanNormal::new(theta0, sigma)?;
    Ok(QuantileProcedure::new(
        "bayes-flat:bounded",
        Provenance::BayesFlat,
        Box::new(move |y, beta| {
            let q = beta * normal_cdf((y - theta0) / sigma);
            Ok(y - sigma * normal_quantile(q)?)
        }),
    ))
}

/// Closed-form flat-planar-prior posterior quantile rule for the noncentral
/// radius: the (1−β)-quantile of the noncentral chi with noncentrality `r`.
pub fn curved_bayes_procedure() -> QuantileProcedure {
    QuantileProcedure::new(
        "bayes-flat:curved",
        Provenance::BayesFlat,
        Box::new(curved_posterior_quantile),
    )
}

// ---------------------------------------------------------------------------
// Monte Carlo audit
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of the actual proportion of true assertions
/// `Pr{θ̂_β(Y) < θ; θ}`: simulate `Y|θ`, apply the rule, count strict
/// successes. Returns `(actual, stderr)` with
/// `stderr = sqrt(actual·(1−actual)/n_rep)`. Deterministic given `seed`.
pub fn propn_mc(
    model: &dyn ScalarModel,
    proc: &QuantileProcedure,
    theta: f64,
    beta: f64,
    n_rep: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutsideDomain {
            what: "claimed probability level",
            value: beta,
            domain: "(0, 1)".to_string(),
        });
    }
    if n_rep < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 repetitions for a meaningful audit, got {n_rep}"
        )));
    }
    let draws = sample(model, theta, n_rep, seed)?;
    let mut hits = 0usize;
    for y in draws {
        if proc.bound(y, beta)? < theta {
            hits += 1;
        }
    }
    let actual = hits as f64 / n_rep as f64;
    let stderr = (actual * (1.0 - actual) / n_rep as f64).sqrt();
    Ok((actual, stderr))
}

// ---------------------------------------------------------------------------
// Deterministic coverage for the bounded mean
// ---------------------------------------------------------------------------

/// Step for the sign-change scan that locates coverage-region boundaries.
const SCAN_STEP: f64 = 0.05;
/// Bisection tolerance for refined boundary points.
const SCAN_XTOL: f64 = 1e-10;
/// Sign-change scans run over [-SCAN_HALF, SCAN_HALF] on the standard scale.
const SCAN_HALF: f64 = 10.0;

/// Locate the sub-level set `{x in [lo, hi] : g(x) < 0}` of a continuous
/// function by scanning for sign changes on a fixed grid and refining each
/// crossing by bisection. Returns the set as disjoint intervals.
fn negative_set<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let mut boundaries = Vec::new();
    let mut x_prev = lo;
    let mut neg_prev = g(lo) < 0.0;
    let open_at_lo = neg_prev;
    let n = ((hi - lo) / step).round() as usize;
    for k in 1..=n {
        let x = lo + step * k as f64;
        let neg = g(x) < 0.0;
        if neg != neg_prev {
            // Bisection keeps the invariant: sign(g(a)) != sign(g(b)).
            let (mut a, mut b) = (x_prev, x);
            while b - a > SCAN_XTOL {
                let mid = 0.5 * (a + b);
                if (g(mid) < 0.0) == neg_prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            boundaries.push(0.5 * (a + b));
        }
        x_prev = x;
        neg_prev = neg;
    }
    let mut intervals = Vec::new();
    let mut start = if open_at_lo { Some(lo) } else { None };
    for b in boundaries {
        match start.take() {
            Some(s) => intervals.push((s, b)),
            None => start = Some(b),
        }
    }
    if let Some(s) = start {
        intervals.push((s, hi));
    }
    intervals
}

/// Actual coverage of the flat-prior posterior quantile rule for the bounded
/// mean, on the standard scale (bound at 0, unit standard deviation, `theta`
/// measured above the bound).
///
/// The assertion is true exactly when the standardized error `z = y − θ`
/// falls in `S = {z : Φ(z) < β·Φ(θ+z)}`, so the coverage is `∫_S φ(z) dz`.
/// The boundary of `S` is located by a sign-change scan over `z ∈ [−10, 10]`
/// refined by bisection, and `φ` is integrated over each piece.
pub fn propn_bounded_quadrature(theta: f64, beta: f64) -> Result<f64> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::OutsideDomain {
            what: "parameter offset above the bound",
            value: theta,
            domain: "[0, inf)".to_string(),
        });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutsideDomain {
            what: "claimed probability level",
            value: beta,
            domain: "(0, 1)".to_string(),
        });
    }
    let g = |z: f64| normal_cdf(z) - beta * normal_cdf(theta + z);
    let pieces = negative_set(g, -SCAN_HALF, SCAN_HALF, SCAN_STEP);
    let mut total = 0.0;
    for (a, b) in pieces {
        // A piece that reaches the scan edge extends to the corresponding
        // tail; beyond |z| = 40 the normal mass is zero to working precision.
        let lo = if a <= -SCAN_HALF { -40.0 } else { a };
        let hi = if b >= SCAN_HALF { 40.0 } else { b };
        total += integrate(normal_pdf, lo, hi, 1e-12)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Deterministic coverage for the noncentral radius
// ---------------------------------------------------------------------------

/// Actual coverage of the flat-planar-prior posterior quantile rule for the
/// noncentral radius, threshold path.
///
/// The assertion `ρ̂_β(R) < ρ` is the event `1−β < H₂(ρ; R)`, and
/// `H₂(ρ; r)` is decreasing in the noncentrality `r`, so the event is
/// `R < r*` with `H₂(ρ; r*) = 1−β`. The threshold exists only when the
/// supremum `H₂(ρ; 0) = 1 − exp(−ρ²/2)` exceeds `1−β`; otherwise no data
/// value makes the assertion true and the coverage is exactly 0.
pub fn propn_curved_quadrature(rho: f64, beta: f64) -> Result<f64> {
    check_curved_args(rho, beta)?;
    let target = 1.0 - beta;
    if 1.0 - (-0.5 * rho * rho).exp() <= target {
        return Ok(0.0);
    }
    let g = |r: f64| noncentral_chi_cdf(rho, r) - target;
    // g(0) > 0 by the existence check; far noncentralities push the CDF at
    // rho to zero, so the bracket end just needs to clear rho by a wide
    // normal-tail margin.
    let hi = rho + 15.0;
    let r_star = solve_bracketed(g, 0.0, hi, 1e-12 * (1.0 + hi))?;
    Ok(noncentral_chi_cdf(r_star, rho))
}

/// Same coverage by the indicator path: integrate the sampling density of
/// `R` over the region where the assertion holds, locating that region by
/// sign-change scan rather than assuming it is a single interval.
pub fn propn_curved_indicator(rho: f64, beta: f64) -> Result<f64> {
    check_curved_args(rho, beta)?;
    let target = 1.0 - beta;
    // Negative exactly where the assertion is true.
    let g = |r: f64| target - noncentral_chi_cdf(rho, r);
    let hi = rho + 15.0;
    let pieces = negative_set(g, 0.0, hi, SCAN_STEP);
    let mut total = 0.0;
    for (a, b) in pieces {
        total += integrate(
            |r| crate::specfun::noncentral_chi_pdf(r, rho),
            a,
            b,
            1e-12,
        )?;
    }
    Ok(total.clamp(0.0, 1.0))
}

fn check_curved_args(rho: f64, beta: f64) -> Result<()> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::OutsideDomain {
            what: "radius parameter",
            value: rho,
            domain: "[0, inf)".to_string(),
        });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutsideDomain {
            what: "claimed probability level",
            value: beta,
            domain: "(0, 1)".to_string(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Prior-averaged coverage
// ---------------------------------------------------------------------------

/// Average a pointwise coverage function against a prior restricted to a
/// finite window, by quadrature: `∫ propn(θ)·π(θ)dθ / ∫ π(θ)dθ`.
///
/// A window collapsed to a point is a point mass: returns `propn_at` there.
pub fn propn_prior_avg_quad<F: Fn(f64) -> Result<f64>>(
    prior: &Prior,
    window: Interval,
    propn_at: F,
) -> Result<f64> {
    if !(window.lo.is_finite() && window.hi.is_finite() && window.lo <= window.hi) {
        return Err(Error::InvalidArgument(format!(
            "prior averaging needs a finite window, got {}",
            window.describe()
        )));
    }
    if window.lo == window.hi {
        return propn_at(window.lo);
    }
    let mass = integrate(|t| prior.weight(t), window.lo, window.hi, 1e-12)?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "prior weight does not normalize on {}: integral {mass}",
            window.describe()
        )));
    }
    // The integrand error from propn_at is bounded by its Result contract;
    // cache-free evaluation keeps this simple and the grids small.
    let mut failure: Option<Error> = None;
    let weighted = integrate(
        |t| match propn_at(t) {
            Ok(p) => p * prior.weight(t),
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
                f64::NAN
            }
        },
        window.lo,
        window.hi,
        1e-10 * mass.max(1.0),
    );
    match (weighted, failure) {
        (_, Some(e)) => Err(e),
        (Ok(v), None) => Ok((v / mass).clamp(0.0, 1.0)),
        (Err(e), None) => Err(e),
    }
}

/// Monte Carlo prior-averaged coverage: draw `θ ~ π` restricted to the
/// window (inverse-CDF on a dense tabulation), then `Y|θ`, apply the rule,
/// count strict successes. Returns `(actual, stderr)`.
pub fn propn_prior_avg_mc(
    model: &dyn ScalarModel,
    proc: &QuantileProcedure,
    prior: &Prior,
    beta: f64,
    window: Interval,
    n_rep: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutsideDomain {
            what: "claimed probability level",
            value: beta,
            domain: "(0, 1)".to_string(),
        });
    }
    if n_rep < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 repetitions for a meaningful audit, got {n_rep}"
        )));
    }
    if !(window.lo.is_finite() && window.hi.is_finite() && window.lo <= window.hi) {
        return Err(Error::InvalidArgument(format!(
            "prior averaging needs a finite window, got {}",
            window.describe()
        )));
    }
    let sampler = PriorSampler::new(prior, window)?;
    let mut source = UniformSource::new(seed);
    let mut hits = 0usize;
    for _ in 0..n_rep {
        let theta = sampler.draw(source.next_uniform());
        model.validate_theta(theta)?;
        let y = model.quantile(source.next_uniform(), theta)?;
        if proc.bound(y, beta)? < theta {
            hits += 1;
        }
    }
    let actual = hits as f64 / n_rep as f64;
    let stderr = (actual * (1.0 - actual) / n_rep as f64).sqrt();
    Ok((actual, stderr))
}

/// Inverse-CDF sampler for a prior restricted to a finite window, built on a
/// dense trapezoid tabulation (4096 cells). The sampled law is the
/// piecewise-linear interpolant of the weight, accurate to O((width/4096)²).
struct PriorSampler {
    grid: Vec<f64>,
    cum: Vec<f64>,
}

impl PriorSampler {
    fn new(prior: &Prior, window: Interval) -> Result<Self> {
        const CELLS: usize = 4096;
        if window.lo == window.hi {
            return Ok(PriorSampler {
                grid: vec![window.lo, window.hi],
                cum: vec![0.0, 1.0],
            });
        }
        let h = (window.hi - window.lo) / CELLS as f64;
        let mut grid = Vec::with_capacity(CELLS + 1);
        let mut weights = Vec::with_capacity(CELLS + 1);
        for k in 0..=CELLS {
            let t = window.lo + h * k as f64;
            let w = prior.weight(t);
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "prior weight must be finite and non-negative on the window; \
                     got {w} at {t}"
                )));
            }
            grid.push(t);
            weights.push(w);
        }
        let mut cum = vec![0.0];
        for k in 0..CELLS {
            let m = 0.5 * (weights[k] + weights[k + 1]) * h;
            cum.push(cum[k] + m);
        }
        let total = *cum.last().unwrap();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prior weight does not normalize on [{}, {}]: mass {total}",
                window.lo, window.hi
            )));
        }
        for c in &mut cum {
            *c /= total;
        }
        Ok(PriorSampler { grid, cum })
    }

    /// Map a uniform u in (0,1) through the tabulated inverse CDF.
    fn draw(&self, u: f64) -> f64 {
        if self.grid.len() == 2 && self.grid[0] == self.grid[1] {
            return self.grid[0];
        }
        let idx = self.cum.partition_point(|&c| c <= u).clamp(1, self.cum.len() - 1);
        let (c0, c1) = (self.cum[idx - 1], self.cum[idx]);
        let (t0, t1) = (self.grid[idx - 1], self.grid[idx]);
        if c1 > c0 {
            t0 + (t1 - t0) * (u - c0) / (c1 - c0)
        } else {
            t0
        }
    }
}

// ---------------------------------------------------------------------------
// Curve tabulations
// ---------------------------------------------------------------------------

/// Tabulate the excess of the flat-planar posterior survivor over the
/// p-value for the noncentral radius at observed `r0`:
/// rows of `(ρ, s(ρ) − p(ρ))`.
pub fn bayes_error_curve(r0: f64, rho_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(Error::OutsideDomain {
            what: "observed radius",
            value: r0,
            domain: "[0, inf)".to_string(),
        });
    }
    rho_grid
        .iter()
        .map(|&rho| {
            let s = crate::bayes::curved_survivor(r0, rho)?;
            let p = noncentral_chi_cdf(r0, rho);
            Ok((rho, s - p))
        })
        .collect()
}

/// Tabulate the lower boundary of the assertion region over a data grid:
/// rows of `(y, θ̂_β(y))`.
pub fn neyman_region_boundary(
    proc: &QuantileProcedure,
    beta: f64,
    y_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    y_grid
        .iter()
        .map(|&y| Ok((y, proc.bound(y, beta)?)))
        .collect()
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// How a coverage row was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// One audited grid cell.
#[derive(Debug, Clone)]
pub struct CoverageRow {
    pub theta: f64,
    pub beta: f64,
    pub claimed: f64,
    pub actual: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub n_rep: Option<usize>,
    pub seed: Option<u64>,
}

/// A full audit: one row per (θ, β) cell, in grid order.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub procedure: String,
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    /// CSV with the fixed column order
    /// `procedure,theta,beta,claimed,actual,method,stderr,n_rep,seed`;
    /// quadrature rows leave the Monte Carlo fields empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("procedure,theta,beta,claimed,actual,method,stderr,n_rep,seed\n");
        for r in &self.rows {
            let stderr = r.stderr.map(sig10).unwrap_or_default();
            let n_rep = r.n_rep.map(|n| n.to_string()).unwrap_or_default();
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.procedure,
                sig10(r.theta),
                sig10(r.beta),
                sig10(r.claimed),
                sig10(r.actual),
                r.method.name(),
                stderr,
                n_rep,
                seed,
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Grid sweeps (parallel with sequential fallback)
// ---------------------------------------------------------------------------

/// Apply `f` to each indexed cell in parallel, preserving input order.
#[cfg(feature = "parallel")]
pub fn map_cells<T: Sync, R: Send, F: Fn(usize, &T) -> R + Sync>(cells: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    cells.par_iter().enumerate().map(|(i, c)| f(i, c)).collect()
}

/// Sequential stand-in with the identical contract (no `rayon` linked).
#[cfg(not(feature = "parallel"))]
pub fn map_cells<T: Sync, R: Send, F: Fn(usize, &T) -> R + Sync>(cells: &[T], f: F) -> Vec<R> {
    map_cells_seq(cells, f)
}

/// Always-sequential variant, kept available for benchmarking the parallel
/// speedup and for verifying scheduling-independence of results.
pub fn map_cells_seq<T: Sync, R: Send, F: Fn(usize, &T) -> R + Sync>(cells: &[T], f: F) -> Vec<R> {
    cells.iter().enumerate().map(|(i, c)| f(i, c)).collect()
}

fn cross(thetas: &[f64], betas: &[f64]) -> Vec<(f64, f64)> {
    let mut cells = Vec::with_capacity(thetas.len() * betas.len());
    for &t in thetas {
        for &b in betas {
            cells.push((t, b));
        }
    }
    cells
}

/// Monte Carlo audit over a (θ, β) grid. Cell `i` uses seed
/// `base_seed.wrapping_add(i)`, so any sub-grid rerun with matching indices
/// reproduces its rows exactly.
pub fn mc_report(
    model: &dyn ScalarModel,
    proc: &QuantileProcedure,
    thetas: &[f64],
    betas: &[f64],
    n_rep: usize,
    base_seed: u64,
) -> Result<CoverageReport> {
    let cells = cross(thetas, betas);
    let rows: Result<Vec<CoverageRow>> = map_cells(&cells, |i, &(theta, beta)| {
        let seed = base_seed.wrapping_add(i as u64);
        let (actual, stderr) = propn_mc(model, proc, theta, beta, n_rep, seed)?;
        Ok(CoverageRow {
            theta,
            beta,
            claimed: beta,
            actual,
            method: Method::MonteCarlo,
            stderr: Some(stderr),
            n_rep: Some(n_rep),
            seed: Some(seed),
        })
    })
    .into_iter()
    .collect();
    Ok(CoverageReport {
        procedure: proc.id.clone(),
        rows: rows?,
    })
}

/// Deterministic audit over a (θ, β) grid using a pointwise coverage
/// function such as [`propn_bounded_quadrature`] or
/// [`propn_curved_quadrature`].
pub fn quadrature_report<F: Fn(f64, f64) -> Result<f64> + Sync>(
    procedure_id: impl Into<String>,
    thetas: &[f64],
    betas: &[f64],
    propn_at: F,
) -> Result<CoverageReport> {
    let cells = cross(thetas, betas);
    let rows: Result<Vec<CoverageRow>> = map_cells(&cells, |_, &(theta, beta)| {
        let actual = propn_at(theta, beta)?;
        Ok(CoverageRow {
            theta,
            beta,
            claimed: beta,
            actual,
            method: Method::Quadrature,
            stderr: None,
            n_rep: None,
            seed: None,
        })
    })
    .into_iter()
    .collect();
    Ok(CoverageReport {
        procedure: procedure_id.into(),
        rows: rows?,
    })
}
