//! Independent numerical references used to check the analytic shortcuts.
//!
//! Nothing here calls into the code paths it is meant to check: the Bessel
//! oracle integrates the integral representation, the incomplete-gamma oracle
//! integrates the defining integral, and root finding is plain bisection.

/// K₁(z) = ∫₀^∞ e^{−z·cosh t} cosh t dt by the trapezoidal rule.
///
/// The integrand is even and analytic in t, so the trapezoidal sum converges
/// geometrically in the step size. The step is halved until two successive
/// sums agree to `1e-15` relative.
pub fn bessel_k1_quadrature(z: f64) -> f64 {
    assert!(z > 0.0, "z must be positive");
    // Integrand is below 1e-300 of its peak once z(cosh t - 1) > 700.
    let t_max = (1.0 + 700.0 / z).acosh() + 1.0;
    let f = |t: f64| (-z * (t.cosh() - 1.0)).exp() * t.cosh();
    let mut h = 0.25;
    let mut prev = trapezoid_half_line(&f, h, t_max);
    loop {
        h *= 0.5;
        let next = trapezoid_half_line(&f, h, t_max);
        if (next - prev).abs() <= 1e-15 * next.abs() || h < 1e-5 {
            return next * (-z).exp();
        }
        prev = next;
    }
}

fn trapezoid_half_line(f: &impl Fn(f64) -> f64, h: f64, t_max: f64) -> f64 {
    let n = (t_max / h).ceil() as usize;
    let mut sum = 0.5 * f(0.0);
    for k in 1..=n {
        sum += f(k as f64 * h);
    }
    sum * h
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// ∫₀^x t^{s−1} e^{−t} dt by adaptive Simpson quadrature.
pub fn lower_gamma_quadrature(s: f64, x: f64) -> f64 {
    let f = |t: f64| {
        if t == 0.0 {
            if s == 1.0 {
                1.0
            } else {
                0.0
            }
        } else {
            t.powf(s - 1.0) * (-t).exp()
        }
    };
    adaptive_simpson(&f, 0.0, x, 1e-14)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns `None` when `f(lo)` and `f(hi)` have the same sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_quadrature_reference() {
        let v = bessel_k1_quadrature(1.0);
        assert!((v - 0.601_907_230_197_234_6).abs() < 1e-15);
    }

    #[test]
    fn lower_gamma_quadrature_integer() {
        let x: f64 = 5.0;
        let closed = 2.0 * (1.0 - (-x).exp() * (1.0 + x + x * x / 2.0));
        assert!((lower_gamma_quadrature(3.0, x) - closed).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-12).is_none());
    }
}
