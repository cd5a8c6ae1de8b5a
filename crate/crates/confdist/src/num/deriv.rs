//! Numerical differentiation: central differences with one Richardson
//! extrapolation level.

/// Relative step scale for central differences.
pub const STEP_SCALE: f64 = 1e-5;

/// Step actually used at abscissa `x`: `1e-5 * (1 + |x|)`.
pub fn step_at(x: f64) -> f64 {
    STEP_SCALE * (1.0 + x.abs())
}

/// d/dx f at `x` via central differences at steps `h` and `h/2`, combined by
/// Richardson extrapolation `(4 D(h/2) - D(h)) / 3`, which cancels the leading
/// O(h^2) truncation term.
pub fn central_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64) -> f64 {
    let h = step_at(x);
    let d_h = (f(x + h) - f(x - h)) / (2.0 * h);
    let h2 = 0.5 * h;
    let d_h2 = (f(x + h2) - f(x - h2)) / (2.0 * h2);
    (4.0 * d_h2 - d_h) / 3.0
}
