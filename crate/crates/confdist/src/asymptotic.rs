//! Second-order expansion machinery for the variance-curvature Normal
//! family: quantile expansions for the model, the confidence bound, the
//! likelihood-normalized bound and the posterior bound; the vertical and
//! horizontal separations between posterior and confidence bounds; the
//! induced actual-coverage formula; and the location-scale effect of
//! tilting/bending a Normal. Every expansion is validated against an exact
//! oracle (the model itself, or the completed-square Normal).
//!
//! The formulas are moderate-deviation results: they are accurate for
//! `|theta|, |y| <= sqrt(n)`. Checked entry points enforce that window as a
//! hard error; every formula also has a `*_raw` twin that runs the bare
//! algebra with no window check, for plotting the curves across a full
//! figure range.

use crate::coverage::{propn_mc, Provenance, QuantileProcedure};
use crate::error::{Error, Result};
use crate::models::{ScalarModel, VarianceCurvatureNormal};
use crate::num::root::solve_expanding;
use crate::report::sig10;
use crate::specfun::{normal_pdf, normal_quantile};

/// Root tolerance for the exact-model confidence oracle. Tight enough to
/// resolve the expansion error itself down to the 1e-9 scale it reaches on
/// the largest sample sizes used in order-of-accuracy checks.
const EXACT_XTOL: f64 = 1e-12;

/// Coefficient set for the posterior/confidence comparison: model curvature
/// `gamma` with nominal sample size `n`, prior tilt `a` (entering at order
/// 1/n) and prior bend `c` from the prior weight `exp(a·theta/n +
/// c·theta²/2n)`, all at claimed level `beta`.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionParams {
    gamma: f64,
    n: f64,
    a: f64,
    c: f64,
    beta: f64,
    z_beta: f64,
}

/// Shared validation for (curvature, sample size) pairs: the variance
/// `1 + gamma·theta²/2n` must stay positive across the whole window
/// (`gamma > -2`) and the curvature correction itself must be a small
/// perturbation (`|gamma| < 2n`).
fn check_curvature(gamma: f64, n: f64) -> Result<()> {
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
    if 1.0 + gamma / 2.0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "curvature {gamma} makes the variance non-positive on the window \
             (needs gamma > -2)"
        )));
    }
    if gamma.abs() >= 2.0 * n {
        return Err(Error::InvalidArgument(format!(
            "curvature correction gamma/2n must stay below 1, got gamma = \
             {gamma} at n = {n}"
        )));
    }
    Ok(())
}

fn check_window(what: &'static str, value: f64, n: f64) -> Result<()> {
    let bound = n.sqrt();
    if !(value.abs() <= bound) {
        return Err(Error::WindowViolation { what, value, bound });
    }
    Ok(())
}

impl ExpansionParams {
    pub fn new(gamma: f64, n: f64, a: f64, c: f64, beta: f64) -> Result<Self> {
        check_curvature(gamma, n)?;
        if !(a.is_finite() && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "prior tilt and bend must be finite, got a = {a}, c = {c}"
            )));
        }
        let z_beta = normal_quantile(beta)?;
        Ok(ExpansionParams {
            gamma,
            n,
            a,
            c,
            beta,
            z_beta,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn z_beta(&self) -> f64 {
        self.z_beta
    }

    /// Half-width of the moderate-deviation window.
    pub fn window(&self) -> f64 {
        self.n.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Quantile expansions
// ---------------------------------------------------------------------------

/// Second-order quantile of the model itself: where the data falls with
/// probability `beta` when the parameter is `theta`.
pub fn model_quantile_expansion(theta: f64, beta: f64, gamma: f64, n: f64) -> Result<f64> {
    check_curvature(gamma, n)?;
    let z = normal_quantile(beta)?;
    check_window("model quantile argument", theta, n)?;
    Ok(model_quantile_expansion_raw(theta, z, gamma, n))
}

/// Bare algebra: `theta + z_beta·(1 + gamma·theta²/4n)`, the linearization
/// of `theta + z_beta·sigma(theta)`; error against the exact quantile is
/// dominated by the next square-root term, `z_beta·(gamma·theta²/2n)²/8`.
pub fn model_quantile_expansion_raw(theta: f64, z_beta: f64, gamma: f64, n: f64) -> f64 {
    theta + z_beta * (1.0 + gamma * theta * theta / (4.0 * n))
}

/// Second-order lower confidence bound at level `beta` from observed `y`.
pub fn conf_quantile(y: f64, beta: f64, gamma: f64, n: f64) -> Result<f64> {
    check_curvature(gamma, n)?;
    let z = normal_quantile(beta)?;
    check_window("observed data", y, n)?;
    Ok(conf_quantile_raw(y, z, gamma, n))
}

/// Bare algebra: `y − z_beta·{1 + gamma·(y − z_beta)²/4n}`.
pub fn conf_quantile_raw(y: f64, z_beta: f64, gamma: f64, n: f64) -> f64 {
    let t = y - z_beta;
    y - z_beta * (1.0 + gamma * t * t / (4.0 * n))
}

/// The weight by which the confidence-quantile differential element is
/// contracted relative to the flat element: equal to 1 at `theta = 0` and
/// at `theta = y0`, and below 1 between those points when `gamma > 0`.
pub fn inverse_weight(theta: f64, y0: f64, gamma: f64, n: f64) -> Result<f64> {
    check_curvature(gamma, n)?;
    check_window("weight argument", theta, n)?;
    check_window("observed data", y0, n)?;
    Ok(inverse_weight_raw(theta, y0, gamma, n))
}

/// Bare algebra: `exp{gamma·theta·(theta − y0)/2n}`.
pub fn inverse_weight_raw(theta: f64, y0: f64, gamma: f64, n: f64) -> f64 {
    (gamma * theta * (theta - y0) / (2.0 * n)).exp()
}

/// The likelihood-normalized bound: the confidence bound rescaled by the
/// constant factor `1 + gamma/2n`.
pub fn likelihood_quantile(conf_q: f64, gamma: f64, n: f64) -> Result<f64> {
    check_curvature(gamma, n)?;
    check_window("confidence bound", conf_q, n)?;
    Ok(likelihood_quantile_raw(conf_q, gamma, n))
}

/// Bare algebra: `conf_q·(1 + gamma/2n)`.
pub fn likelihood_quantile_raw(conf_q: f64, gamma: f64, n: f64) -> f64 {
    conf_q * (1.0 + gamma / (2.0 * n))
}

/// Second-order posterior quantile, expressed as a correction of the
/// confidence bound: `conf_q·(1 + (gamma + c)/2n) + a/n + c·y/2n`.
///
/// With `c = −gamma` and `a = gamma·y/2` the correction cancels exactly:
/// that data-dependent prior reproduces the confidence bound.
pub fn bayes_quantile_expansion(conf_q: f64, y: f64, params: &ExpansionParams) -> Result<f64> {
    check_window("confidence bound", conf_q, params.n)?;
    check_window("observed data", y, params.n)?;
    Ok(bayes_quantile_expansion_raw(conf_q, y, params))
}

/// Bare algebra for the posterior quantile correction.
pub fn bayes_quantile_expansion_raw(conf_q: f64, y: f64, params: &ExpansionParams) -> f64 {
    let two_n = 2.0 * params.n;
    conf_q * (1.0 + (params.gamma + params.c) / two_n)
        + params.a / params.n
        + params.c * y / two_n
}

// ---------------------------------------------------------------------------
// Gaps between the posterior and confidence bounds
// ---------------------------------------------------------------------------

/// Vertical separation `bayes_q(y) − conf_q(y)` at fixed data, computed by
/// composing the two quantile expansions (so the composition identity holds
/// to rounding by construction).
pub fn vertical_gap(y: f64, params: &ExpansionParams) -> Result<f64> {
    check_window("observed data", y, params.n)?;
    Ok(vertical_gap_raw(y, params))
}

/// Bare-algebra composition `bayes_raw(conf_raw(y), y) − conf_raw(y)`.
pub fn vertical_gap_raw(y: f64, params: &ExpansionParams) -> f64 {
    let conf = conf_quantile_raw(y, params.z_beta, params.gamma, params.n);
    bayes_quantile_expansion_raw(conf, y, params) - conf
}

/// Vertical separation in closed form,
/// `a/n + y·(gamma + 2c)/2n − z_beta·(gamma + c)/2n`, obtained from the
/// composition by replacing the confidence bound with its first-order value
/// `y − z_beta`; agrees with [`vertical_gap`] to the next expansion order.
pub fn vertical_gap_closed_form(y: f64, params: &ExpansionParams) -> Result<f64> {
    check_window("observed data", y, params.n)?;
    Ok(vertical_gap_closed_form_raw(y, params))
}

/// Bare algebra for the closed-form vertical separation.
pub fn vertical_gap_closed_form_raw(y: f64, params: &ExpansionParams) -> f64 {
    let two_n = 2.0 * params.n;
    params.a / params.n + y * (params.gamma + 2.0 * params.c) / two_n
        - params.z_beta * (params.gamma + params.c) / two_n
}

/// Horizontal separation at a fixed parameter value: the data shift
/// `y_conf(theta) − y_bayes(theta)` between the two quantile curves,
/// `theta·gamma/2n + a/n + (c/2n)·(2·theta + z_beta)`.
pub fn horizontal_gap(theta: f64, params: &ExpansionParams) -> Result<f64> {
    check_window("parameter", theta, params.n)?;
    Ok(horizontal_gap_raw(theta, params))
}

/// Bare algebra for the horizontal separation.
pub fn horizontal_gap_raw(theta: f64, params: &ExpansionParams) -> f64 {
    let two_n = 2.0 * params.n;
    theta * params.gamma / two_n
        + params.a / params.n
        + (params.c / two_n) * (2.0 * theta + params.z_beta)
}

// ---------------------------------------------------------------------------
// Actual coverage of the expansion posterior bound
// ---------------------------------------------------------------------------

/// Actual coverage of the second-order posterior bound:
/// `beta − {horizontal gap}·phi(z_beta)`. With `a = c = 0` the deficit is
/// `theta·gamma·phi(z_beta)/2n` — below the claim for positive `theta`,
/// above it for negative.
///
/// A value outside `(0, 1)` means the formula was pushed past its window
/// and is reported as a window violation rather than clamped.
pub fn propn_formula(theta: f64, params: &ExpansionParams) -> Result<f64> {
    check_window("parameter", theta, params.n)?;
    let v = propn_formula_raw(theta, params);
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::WindowViolation {
            what: "proportion formula value",
            value: v,
            bound: 1.0,
        });
    }
    Ok(v)
}

/// Bare algebra for the coverage formula (may leave `(0, 1)` off-window).
pub fn propn_formula_raw(theta: f64, params: &ExpansionParams) -> f64 {
    params.beta - horizontal_gap_raw(theta, params) * normal_pdf(params.z_beta)
}

/// The second-order posterior bound packaged as an auditable quantile rule
/// (bare-algebra form, since simulated data can land slightly off-window).
pub fn expansion_procedure(params: &ExpansionParams) -> QuantileProcedure {
    let p = *params;
    QuantileProcedure::new(
        "expansion:curvature",
        Provenance::Expansion,
        Box::new(move |y, beta| {
            let z = normal_quantile(beta)?;
            let conf = conf_quantile_raw(y, z, p.gamma, p.n);
            Ok(bayes_quantile_expansion_raw(conf, y, &p))
        }),
    )
}

// ---------------------------------------------------------------------------
// Tilt and bend of a Normal
// ---------------------------------------------------------------------------

/// Coefficients of a modulating factor `exp{a_half·y/sqrt(n) + c_bend·y²/2n}`
/// applied to a unit Normal: a tilt at root-n scale and a bend at n scale.
#[derive(Debug, Clone, Copy)]
pub struct TiltBend {
    pub a_half: f64,
    pub c_bend: f64,
}

impl TiltBend {
    pub fn new(a_half: f64, c_bend: f64) -> Result<Self> {
        if !(a_half.is_finite() && c_bend.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tilt and bend coefficients must be finite, got a = {a_half}, \
                 c = {c_bend}"
            )));
        }
        Ok(TiltBend { a_half, c_bend })
    }
}

/// The bend must leave the modulated density integrable: `1 − c/n > 0`.
fn check_bend(tb: &TiltBend, n: f64) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sample size must be positive and finite, got {n}"
        )));
    }
    let shrink = 1.0 - tb.c_bend / n;
    if !(shrink > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bend coefficient {} must stay below the sample size {n} for the \
             modulated density to remain normalizable",
            tb.c_bend
        )));
    }
    Ok(shrink)
}

/// Second-order quantile of the tilted and bent Normal centered at `theta`:
/// the modulation is a pure location-scale adjustment,
/// `theta·(1 + c/n) + a/sqrt(n) + (1 + c/2n)·z_beta`.
pub fn tilt_bend_quantile(theta: f64, beta: f64, tb: &TiltBend, n: f64) -> Result<f64> {
    check_bend(tb, n)?;
    let z = normal_quantile(beta)?;
    check_window("center", theta, n)?;
    Ok(tilt_bend_quantile_raw(theta, z, tb, n))
}

/// Bare algebra for the tilt/bend quantile expansion.
pub fn tilt_bend_quantile_raw(theta: f64, z_beta: f64, tb: &TiltBend, n: f64) -> f64 {
    theta * (1.0 + tb.c_bend / n) + tb.a_half / n.sqrt() + (1.0 + tb.c_bend / (2.0 * n)) * z_beta
}

/// Exact quantile of the tilted and bent Normal by completing the square:
/// the modulated density is Normal with mean `(theta + a/sqrt(n))/(1 − c/n)`
/// and variance `1/(1 − c/n)`. Valid for every `theta`; this is the oracle
/// the expansion is measured against.
pub fn tilt_bend_exact_quantile(theta: f64, beta: f64, tb: &TiltBend, n: f64) -> Result<f64> {
    let shrink = check_bend(tb, n)?;
    let z = normal_quantile(beta)?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "center must be finite, got {theta}"
        )));
    }
    let mean = (theta + tb.a_half / n.sqrt()) / shrink;
    let sd = shrink.sqrt().recip();
    Ok(mean + sd * z)
}

/// Posterior quantile under the tilt/bend modulation, anchored at observed
/// `y0`: structurally the same location-scale adjustment with the center
/// replaced by the data point.
pub fn posterior_tilt_quantile(y0: f64, beta: f64, tb: &TiltBend, n: f64) -> Result<f64> {
    check_bend(tb, n)?;
    let z = normal_quantile(beta)?;
    check_window("observed data", y0, n)?;
    Ok(tilt_bend_quantile_raw(y0, z, tb, n))
}

/// The same posterior quantile printed the other way around: as an
/// adjustment of the first-order bound `theta = y0 + z_beta`,
/// `theta·(1 + c/2n) + a/sqrt(n) + y0·c/2n`. Agrees with
/// [`posterior_tilt_quantile`] to the next expansion order.
pub fn posterior_tilt_quantile_alt(y0: f64, beta: f64, tb: &TiltBend, n: f64) -> Result<f64> {
    check_bend(tb, n)?;
    let z = normal_quantile(beta)?;
    check_window("observed data", y0, n)?;
    let theta = y0 + z;
    Ok(theta * (1.0 + tb.c_bend / (2.0 * n)) + tb.a_half / n.sqrt()
        + y0 * tb.c_bend / (2.0 * n))
}

// ---------------------------------------------------------------------------
// Exact-model oracle
// ---------------------------------------------------------------------------

/// Exact lower confidence bound on the variance-curvature Normal, by
/// root-solving `F(y; theta) = beta` to high precision. This is the oracle
/// that measures the expansion error of [`conf_quantile`].
pub fn exact_conf_quantile(y: f64, beta: f64, gamma: f64, n: f64) -> Result<f64> {
    check_curvature(gamma, n)?;
    let z = normal_quantile(beta)?;
    let model = VarianceCurvatureNormal::new(gamma, n)?;
    let dom = model.param_domain();
    let guess = (y - z).clamp(dom.lo, dom.hi);
    let step = 4.0 * model.scale(guess).max(1.0);
    solve_expanding(
        |th| model.cdf(y, th) - beta,
        guess,
        step,
        dom.lo,
        dom.hi,
        EXACT_XTOL,
    )
}

// ---------------------------------------------------------------------------
// Figure tabulations
// ---------------------------------------------------------------------------

/// CSV of the three expansion bounds and their vertical separation over a
/// data grid, columns `y,conf_q,lik_q,bayes_q,vertical_gap`. Uses the bare
/// algebra so the curves extend across a full plotting range.
pub fn expansion_curve_csv(params: &ExpansionParams, y_grid: &[f64]) -> String {
    let mut out = String::from("y,conf_q,lik_q,bayes_q,vertical_gap\n");
    for &y in y_grid {
        let conf = conf_quantile_raw(y, params.z_beta, params.gamma, params.n);
        let lik = likelihood_quantile_raw(conf, params.gamma, params.n);
        let bayes = bayes_quantile_expansion_raw(conf, y, params);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            sig10(y),
            sig10(conf),
            sig10(lik),
            sig10(bayes),
            sig10(bayes - conf),
        ));
    }
    out
}

/// CSV of the coverage formula over a parameter grid, columns
/// `theta,beta,claimed,formula_propn,mc_propn,stderr`. When `mc` is given as
/// `(n_rep, base_seed)`, each row also carries a Monte Carlo audit of the
/// expansion posterior rule on the exact model (cell `i` uses seed
/// `base_seed + i`); otherwise those columns are left empty.
pub fn expansion_propn_csv(
    params: &ExpansionParams,
    thetas: &[f64],
    mc: Option<(usize, u64)>,
) -> Result<String> {
    let mut out = String::from("theta,beta,claimed,formula_propn,mc_propn,stderr\n");
    let model = VarianceCurvatureNormal::new(params.gamma, params.n)?;
    let proc = expansion_procedure(params);
    for (i, &theta) in thetas.iter().enumerate() {
        let formula = propn_formula_raw(theta, params);
        let (mc_str, se_str) = match mc {
            Some((n_rep, base_seed)) => {
                let seed = base_seed.wrapping_add(i as u64);
                let (p, se) = propn_mc(&model, &proc, theta, params.beta, n_rep, seed)?;
                (sig10(p), sig10(se))
            }
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig10(theta),
            sig10(params.beta),
            sig10(params.beta),
            sig10(formula),
            mc_str,
            se_str,
        ));
    }
    Ok(out)
}
