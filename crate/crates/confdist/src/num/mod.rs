//! Shared numeric kernel: quadrature, root finding, differentiation, grids.

pub mod deriv;
pub mod quad;
pub mod root;

use crate::error::{Error, Result};

/// Build the inclusive grid `start, start+step, ..., stop`, keeping the final
/// point when it lands within half a step of `stop` (so `0:6:0.1` has 61
/// points even with rounding noise in the step arithmetic).
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive and finite, got {step}"
        )));
    }
    if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid bounds must be finite with stop >= start, got {start}..{stop}"
        )));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize;
    let mut points = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let x = start + i as f64 * step;
        if x <= stop + 0.5 * step {
            points.push(x);
        }
    }
    Ok(points)
}
