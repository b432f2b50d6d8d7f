//! Closed-form values the experiments are measured against.

use crate::error::{Error, Result};

use super::generators::ChannelParams;

/// Binary entropy in nats, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    term(x) + term(1.0 - x)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    refine(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// I(X;Y|Z) for the switched AWGN / BSC pair. Accepts the degenerate
/// cases `β = 0` and `α = β`.
pub fn awgn_bsc_theory_cmi(params: &ChannelParams) -> Result<f64> {
    params.validate(false)?;
    let ChannelParams { alpha, beta, p, sigma_x, sigma_n } = *params;
    let bsc = |z: f64| binary_entropy(z * (1.0 - p) + p * (1.0 - z)) - binary_entropy(z);
    let awgn = 0.5 * beta * (1.0 + (sigma_x / sigma_n).powi(2)).ln();
    let value = awgn + integrate(bsc, beta, alpha, 1e-8) + (1.0 - alpha) * bsc(alpha);
    if !value.is_finite() {
        return Err(Error::Domain("theory value is not finite".into()));
    }
    Ok(value)
}

/// TC of the zero-inflated pairs: `h(p1) + h(p2)`.
pub fn zero_inflated_theory_tc(p1: f64, p2: f64) -> f64 {
    binary_entropy(p1) + binary_entropy(p2)
}
