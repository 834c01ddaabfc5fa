//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Adaptive Simpson integration of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (with a small absolute floor for integrals near zero).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::input("adaptive_simpson requires finite endpoints"));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // coarse scale estimate for the absolute-tolerance floor
    let scale = whole.abs().max(1e-300);
    let mut depth_exceeded = false;
    let value = recurse(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        rel_tol * scale,
        60,
        &mut depth_exceeded,
    );
    if depth_exceeded {
        return Err(Error::Quadrature(format!(
            "max refinement depth reached on [{a}, {b}]"
        )));
    }
    Ok(value)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    depth_exceeded: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-14 * (a.abs() + b.abs()) {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *depth_exceeded = true;
        return left + right;
    }
    recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, depth_exceeded)
        + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, depth_exceeded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-11).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = adaptive_simpson(&|x: f64| (10.0 * x).sin(), 0.0, 1.0, 1e-11).unwrap();
        assert_relative_eq!(v, (1.0 - 10f64.cos()) / 10.0, max_relative = 1e-9);
    }
}
