//! Adaptive quadrature on finite intervals plus a peak-anchored driver for
//! densities on unbounded supports.
//!
//! The base rule is the 15-point Kronrod extension of 7-point Gauss (the
//! classic QUADPACK pair); refinement is globally adaptive, always splitting
//! the segment with the largest error estimate. Unbounded supports are handled
//! by expanding octave-sized windows away from a peak until the integrand
//! falls below `CUTOFF_RATIO` times its maximum, with a geometric tail
//! extrapolation to certify that the truncated mass is negligible.

use crate::error::{Error, Result};

/// Kronrod-15 abscissae on [0, 1] side of the origin (symmetric rule).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.000_000_000_000_000_0,
];

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss-7 weights for the embedded rule (abscissae `XGK[1], XGK[3], XGK[5]`
/// and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Integrand values below `CUTOFF_RATIO * peak` are treated as support ends.
pub const CUTOFF_RATIO: f64 = 1e-16;

/// Most segments a single adaptive integral may create.
const MAX_SEGMENTS: usize = 4096;

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// One Gauss-Kronrod 15(7) evaluation over [a, b], returning the K15 value
/// and |K15 - G7| as the error estimate.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(Error::NonFiniteIntegrand { at: c });
    }
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: c - dx });
        }
        if !f2.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: c + dx });
        }
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: resk * h,
        err: ((resk - resg) * h).abs(),
    })
}

/// Integrate `f` over the finite interval [a, b] to absolute tolerance
/// `abs_tol`, splitting the worst segment until the summed error estimate is
/// below tolerance.
///
/// A relative floor of 1e-14 of the running total keeps the tolerance
/// meaningful when the integral itself is enormous (an absolute 1e-12 on a
/// value of 1e+200 is below representable resolution and would spin the
/// subdivision loop forever).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    debug_assert!(a < b, "integrate: reversed interval [{a}, {b}]");
    let mut segs = vec![gk15(&mut f, a, b)?];
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        let total_mag: f64 = segs.iter().map(|s| s.value.abs()).sum();
        if total_err <= abs_tol.max(1e-14 * total_mag) {
            // Sum smallest-magnitude first to limit accumulation error.
            let mut values: Vec<f64> = segs.iter().map(|s| s.value).collect();
            values.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
            return Ok(values.iter().sum());
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                iterations: MAX_SEGMENTS,
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Segment { a, b, .. } = segs[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Interval at floating-point resolution: accept its estimate.
            let mut seg = segs[worst];
            seg.err = 0.0;
            segs[worst] = seg;
            continue;
        }
        segs[worst] = gk15(&mut f, a, mid)?;
        segs.push(gk15(&mut f, mid, b)?);
    }
}

/// A peak-anchored integral over a possibly unbounded support.
#[derive(Debug, Clone)]
pub struct PeakedIntegral {
    /// Total integral over the truncated window.
    pub value: f64,
    /// Window actually integrated, `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    /// Breakpoints of the octave segmentation (sorted, `lo ..= hi`). Useful
    /// for re-integrating sub-ranges without re-discovering the scale.
    pub breaks: Vec<f64>,
    /// Largest integrand value seen.
    pub peak: f64,
}

/// Most octave doublings on each side of the anchor.
const MAX_OCTAVES: usize = 64;

/// Integrate a non-negative, eventually-decaying integrand over
/// `[dom_lo, dom_hi]` (either side may be infinite) by expanding octaves away
/// from `anchor` until the integrand falls below `CUTOFF_RATIO` times the
/// running maximum on both sides.
///
/// The mass of consecutive octaves must eventually decay geometrically; the
/// remaining tail is bounded by geometric extrapolation and the integral is
/// rejected as [`Error::NonIntegrable`] when that bound exceeds `abs_tol`.
pub fn integrate_peaked<F: FnMut(f64) -> f64>(
    mut f: F,
    anchor: f64,
    scale: f64,
    dom_lo: f64,
    dom_hi: f64,
    abs_tol: f64,
) -> Result<PeakedIntegral> {
    debug_assert!(scale > 0.0 && scale.is_finite());
    let anchor = anchor.clamp(
        if dom_lo.is_finite() { dom_lo } else { anchor },
        if dom_hi.is_finite() { dom_hi } else { anchor },
    );

    let f_anchor = f(anchor);
    if !f_anchor.is_finite() {
        return Err(Error::NonFiniteIntegrand { at: anchor });
    }
    let mut peak = f_anchor.abs();

    // Walk octave windows on one side; returns (breakpoints, octave masses).
    // `dir` is +1.0 or -1.0.
    let side = |f: &mut F, dir: f64, peak: &mut f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let dom_end = if dir > 0.0 { dom_hi } else { dom_lo };
        let mut edges = Vec::new();
        let mut masses = Vec::new();
        let mut prev = anchor;
        let mut width = scale;
        // Geometric bound on the mass beyond the last integrated edge,
        // refreshed from the ratio of the last two octave masses. The bound
        // is an over-estimate for any integrand whose octave masses decay at
        // a non-increasing rate, which covers every eventually log-concave
        // tail; for super-exponential tails it is grossly conservative, so a
        // large bound means "expand further", never "reject" — rejection
        // happens only when the octave budget runs out.
        let mut tail_bound = f64::INFINITY;
        for _ in 0..MAX_OCTAVES {
            let mut next = anchor + dir * width;
            let mut clipped = false;
            if (dir > 0.0 && next >= dom_end) || (dir < 0.0 && next <= dom_end) {
                next = dom_end;
                clipped = true;
            }
            if (next - prev).abs() > 0.0 {
                let (a, b) = if dir > 0.0 { (prev, next) } else { (next, prev) };
                let mut local_max = 0.0f64;
                let mass = integrate(
                    |x| {
                        let v = f(x);
                        local_max = local_max.max(v.abs());
                        v
                    },
                    a,
                    b,
                    abs_tol / 32.0,
                )?;
                *peak = peak.max(local_max);
                edges.push(next);
                masses.push(mass);
                let m_last = mass.abs();
                tail_bound = if m_last == 0.0 {
                    0.0
                } else if masses.len() >= 2 {
                    let m_prev = masses[masses.len() - 2].abs();
                    let ratio = if m_prev > 0.0 { m_last / m_prev } else { 1.0 };
                    if ratio < 0.9 {
                        m_last * ratio / (1.0 - ratio)
                    } else {
                        f64::INFINITY
                    }
                } else {
                    f64::INFINITY
                };
                if clipped {
                    return Ok((edges, masses));
                }
                let f_edge = f(next).abs();
                if f_edge <= CUTOFF_RATIO * *peak
                    && tail_bound <= abs_tol.max(1e-12 * masses.iter().sum::<f64>().abs())
                {
                    return Ok((edges, masses));
                }
            } else if clipped {
                return Ok((edges, masses));
            }
            prev = next;
            width *= 2.0;
        }
        // Octave budget exhausted without certifying the tail: the masses are
        // not decaying geometrically (e.g. a 1/x tail has constant octave
        // masses), so the integral cannot be pinned to the tolerance.
        Err(Error::NonIntegrable {
            tail: tail_bound,
            tol: abs_tol,
        })
    };

    let (right_edges, right_masses) = side(&mut f, 1.0, &mut peak)?;
    let (left_edges, left_masses) = side(&mut f, -1.0, &mut peak)?;

    let mut breaks: Vec<f64> = left_edges.iter().rev().copied().collect();
    breaks.push(anchor);
    breaks.extend(right_edges.iter().copied());

    let mut masses: Vec<f64> = left_masses;
    masses.extend(right_masses.iter().copied());
    masses.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
    let value = masses.iter().sum();

    let lo = *breaks.first().unwrap();
    let hi = *breaks.last().unwrap();
    Ok(PeakedIntegral {
        value,
        lo,
        hi,
        breaks,
        peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        // G7/K15 integrates low-degree polynomials to machine precision.
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11, "got {v}, want {exact}");
    }

    #[test]
    fn narrow_spike_is_found_by_peaked_driver() {
        // Gaussian of width 1e-2 centred at 5; a single panel over [0, 1000]
        // would miss it, the anchored driver must not.
        let w = 1e-2;
        let g = integrate_peaked(
            |x: f64| (-0.5 * ((x - 5.0) / w).powi(2)).exp(),
            5.0,
            w,
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-14,
        )
        .unwrap();
        let exact = (2.0 * std::f64::consts::PI).sqrt() * w;
        assert!(
            (g.value - exact).abs() < 1e-12,
            "got {}, want {exact}",
            g.value
        );
        assert!(g.lo < 5.0 && g.hi > 5.0);
    }

    #[test]
    fn peaked_driver_respects_finite_domain() {
        // Integrate exp(-x) on [0, inf) anchored inside the domain.
        let g = integrate_peaked(|x: f64| (-x).exp(), 0.5, 1.0, 0.0, f64::INFINITY, 1e-13).unwrap();
        assert!((g.value - 1.0).abs() < 1e-11, "got {}", g.value);
        assert_eq!(g.lo, 0.0, "window must clip to the domain edge");
    }

    #[test]
    fn log_divergent_tail_is_rejected() {
        // 1/(1+|x|) has constant octave masses: not integrable.
        let e = integrate_peaked(
            |x: f64| 1.0 / (1.0 + x.abs()),
            0.0,
            1.0,
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-10,
        );
        assert!(
            matches!(e, Err(Error::NonIntegrable { .. })),
            "expected NonIntegrable, got {e:?}"
        );
    }

    #[test]
    fn octave_breaks_cover_window() {
        let g = integrate_peaked(
            |x: f64| (-0.5 * x * x).exp(),
            0.0,
            1.0,
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-13,
        )
        .unwrap();
        assert_eq!(g.breaks.first().copied(), Some(g.lo));
        assert_eq!(g.breaks.last().copied(), Some(g.hi));
        assert!(g.breaks.windows(2).all(|w| w[0] < w[1]), "breaks sorted");
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((g.value - exact).abs() < 1e-11);
    }
}
