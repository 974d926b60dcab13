//! Special functions: modified Bessel functions of the second kind and the
//! incomplete gamma function.

use crate::error::{Error, Result};
use crate::real::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 10_000;

/// Below this argument K₀/K₁ use the power series, above it Steed's continued fraction.
const SERIES_LIMIT: f64 = 2.0;

/// Modified Bessel function of the second kind, order one.
///
/// Relative accuracy is close to machine precision on (0, 700]; the result
/// underflows to zero once e^{-z} does.
pub fn bessel_k1<T: Real>(z: T) -> Result<T> {
    check_domain(z)?;
    if z <= T::lit(SERIES_LIMIT) {
        Ok(k1_series(z))
    } else {
        let (_, k1s) = k01_scaled_cf(z);
        Ok(k1s * (-z).exp())
    }
}

/// Modified Bessel function of the second kind, order zero.
pub fn bessel_k0<T: Real>(z: T) -> Result<T> {
    check_domain(z)?;
    if z <= T::lit(SERIES_LIMIT) {
        Ok(k0_series(z))
    } else {
        let (k0s, _) = k01_scaled_cf(z);
        Ok(k0s * (-z).exp())
    }
}

/// e^z·K₁(z), finite for all z > 0.
pub fn bessel_k1_scaled<T: Real>(z: T) -> Result<T> {
    check_domain(z)?;
    if z <= T::lit(SERIES_LIMIT) {
        Ok(k1_series(z) * z.exp())
    } else {
        Ok(k01_scaled_cf(z).1)
    }
}

/// z·K₁(z), extended continuously by its limit 1 at z = 0.
///
/// This is the shape factor of the condensate feeding rate; it decreases
/// strictly from 1 towards 0.
pub fn z_k1<T: Real>(z: T) -> Result<T> {
    if z == T::zero() {
        return Ok(T::one());
    }
    check_domain(z)?;
    if z <= T::lit(SERIES_LIMIT) {
        Ok(z_k1_series(z))
    } else {
        Ok(z * bessel_k1(z)?)
    }
}

fn check_domain<T: Real>(z: T) -> Result<()> {
    if z > T::zero() && !z.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "modified Bessel K requires z > 0, got {}",
            z.to_f64_lossy()
        )))
    }
}

/// Σ_k (z²/4)^k / (k!(k+1)!) together with the digamma-weighted companion sum
/// Σ_k [ψ(k+1)+ψ(k+2)] (z²/4)^k / (k!(k+1)!).
fn i1_sums<T: Real>(z: T) -> (T, T) {
    let q = z * z / T::lit(4.0);
    let gamma = T::lit(EULER_GAMMA);
    let mut term = T::one();
    let mut psi_k1 = -gamma; // ψ(k+1)
    let mut psi_k2 = T::one() - gamma; // ψ(k+2)
    let mut plain = T::zero();
    let mut weighted = T::zero();
    for k in 0..MAX_ITER {
        plain = plain + term;
        weighted = weighted + term * (psi_k1 + psi_k2);
        let kf = T::from_usize(k).unwrap();
        term = term * q / ((kf + T::one()) * (kf + T::lit(2.0)));
        psi_k1 = psi_k1 + T::one() / (kf + T::one());
        psi_k2 = psi_k2 + T::one() / (kf + T::lit(2.0));
        if term < T::eps() * plain.abs() {
            break;
        }
    }
    (plain, weighted)
}

fn z_k1_series<T: Real>(z: T) -> T {
    let (plain, weighted) = i1_sums(z);
    let half = z / T::lit(2.0);
    let i1 = half * plain;
    T::one() + z * (half.ln() * i1) - z * z / T::lit(4.0) * weighted
}

fn k1_series<T: Real>(z: T) -> T {
    z_k1_series(z) / z
}

fn k0_series<T: Real>(z: T) -> T {
    // K₀(z) = -(ln(z/2) + γ) I₀(z) + Σ_{k≥1} H_k (z²/4)^k / (k!)²
    let q = z * z / T::lit(4.0);
    let mut term = T::one();
    let mut harmonic = T::zero();
    let mut i0 = T::zero();
    let mut tail = T::zero();
    for k in 0..MAX_ITER {
        i0 = i0 + term;
        tail = tail + harmonic * term;
        let kf = T::from_usize(k + 1).unwrap();
        term = term * q / (kf * kf);
        harmonic = harmonic + T::one() / kf;
        if term * (T::one() + harmonic) < T::eps() * (i0 + tail).abs() {
            break;
        }
    }
    -((z / T::lit(2.0)).ln() + T::lit(EULER_GAMMA)) * i0 + tail
}

/// Steed's continued-fraction evaluation (Temme's CF2) of e^z·K₀(z) and
/// e^z·K₁(z) for z ≥ 2.
fn k01_scaled_cf<T: Real>(z: T) -> (T, T) {
    let two = T::lit(2.0);
    let mut b = two * (T::one() + z);
    let mut d = T::one() / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1 = T::lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 1..MAX_ITER {
        let fi = T::from_usize(i).unwrap();
        a = a - two * fi;
        c = -a * c / (fi + T::one());
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < T::eps() {
            break;
        }
    }
    h = a1 * h;
    let k0 = (T::PI() / (two * z)).sqrt() / s;
    let k1 = k0 * (z + T::lit(0.5) - h) / z;
    (k0, k1)
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, nine coefficients).
pub fn ln_gamma<T: Real>(x: T) -> T {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < T::lit(0.5) {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(COEF[0]);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize(i).unwrap());
    }
    let t = x + T::lit(G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma function P(s, x) = γ(s, x)/Γ(s).
pub fn gamma_p<T: Real>(s: T, x: T) -> Result<T> {
    check_gamma_args(s, x)?;
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x < s + T::one() {
        Ok(gamma_series(s, x))
    } else {
        Ok(T::one() - gamma_cf(s, x))
    }
}

/// Regularized upper incomplete gamma function Q(s, x) = 1 − P(s, x).
pub fn gamma_q<T: Real>(s: T, x: T) -> Result<T> {
    check_gamma_args(s, x)?;
    if x == T::zero() {
        return Ok(T::one());
    }
    if x < s + T::one() {
        Ok(T::one() - gamma_series(s, x))
    } else {
        Ok(gamma_cf(s, x))
    }
}

/// Lower incomplete gamma function γ(s, x).
pub fn lower_gamma<T: Real>(s: T, x: T) -> Result<T> {
    Ok(gamma_p(s, x)? * ln_gamma(s).exp())
}

fn check_gamma_args<T: Real>(s: T, x: T) -> Result<()> {
    if s > T::zero() && x >= T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "incomplete gamma requires s > 0 and x >= 0, got s = {}, x = {}",
            s.to_f64_lossy(),
            x.to_f64_lossy()
        )))
    }
}

fn gamma_series<T: Real>(s: T, x: T) -> T {
    let mut ap = s;
    let mut del = T::one() / s;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::eps() {
            break;
        }
    }
    sum * (-x + s * x.ln() - ln_gamma(s)).exp()
}

/// Modified Lentz evaluation of the continued fraction for Q(s, x).
fn gamma_cf<T: Real>(s: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::eps();
    let mut b = x + T::one() - s;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = T::from_usize(i).unwrap();
        let an = -fi * (fi - s);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::eps() {
            break;
        }
    }
    (-x + s * x.ln() - ln_gamma(s)).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_small_argument_limit() {
        let z = 1e-4_f64;
        let v = z * bessel_k1(z).unwrap();
        assert!((1.0 - 1e-4..=1.0).contains(&v), "{v}");
        assert_eq!(z_k1(0.0_f64).unwrap(), 1.0);
    }

    #[test]
    fn k1_large_argument_asymptote() {
        let z = 50.0_f64;
        let v = bessel_k1(z).unwrap() * (2.0 * z / std::f64::consts::PI).sqrt() * z.exp();
        // leading term alone is off by 3/(8z) = 7.5e-3 here
        assert!((v - 1.0).abs() < 1e-2, "{v}");
        assert!((v / (1.0 + 3.0 / (8.0 * z)) - 1.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn k1_reference_values() {
        // Abramowitz & Stegun table 9.8 / mpmath
        let cases = [
            (0.1f64, 9.853_844_780_870_606),
            (1.0, 0.601_907_230_197_234_6),
            (2.0, 0.139_865_881_816_522_4),
            (2.5, 0.073_890_816_347_747_06),
            (10.0, 1.864_877_345_382_558_4e-5),
        ];
        for (z, k) in cases {
            let v = bessel_k1(z).unwrap();
            assert!(((v - k) / k).abs() < 1e-13, "K1({z}) = {v}, want {k}");
        }
        let k0 = bessel_k0(1.0_f64).unwrap();
        assert!((k0 - 0.421_024_438_240_708_3).abs() < 1e-14);
        let k0 = bessel_k0(3.0_f64).unwrap();
        assert!((k0 - 0.034_739_504_386_279_25).abs() < 1e-15);
    }

    #[test]
    fn k1_branches_meet() {
        let below = bessel_k1(2.0_f64).unwrap();
        let above = k01_scaled_cf(2.0_f64).1 * (-2.0_f64).exp();
        assert!(((below - above) / below).abs() < 1e-14);
    }

    #[test]
    fn k1_underflows_to_zero() {
        assert_eq!(bessel_k1(800.0_f64).unwrap(), 0.0);
        assert!(bessel_k1_scaled(800.0_f64).unwrap() > 0.0);
    }

    #[test]
    fn k1_domain() {
        assert!(bessel_k1(0.0_f64).is_err());
        assert!(bessel_k1(-1.0_f64).is_err());
        assert!(bessel_k1(f64::NAN).is_err());
    }

    #[test]
    fn z_k1_decreasing() {
        let mut prev = 1.0;
        for i in 1..2000 {
            let z = i as f64 * 0.01;
            let v = z_k1(z).unwrap();
            assert!(v < prev, "z = {z}");
            prev = v;
        }
    }

    #[test]
    fn k1_f32() {
        let v = bessel_k1(1.0_f32).unwrap();
        assert!((v - 0.601_907_2).abs() < 1e-6);
    }

    #[test]
    fn ln_gamma_values() {
        assert!(ln_gamma(1.0_f64).abs() < 1e-15);
        assert!((ln_gamma(5.0_f64) - 24.0_f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5_f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn incomplete_gamma_integer_closed_form() {
        // P(3, x) = 1 - e^{-x}(1 + x + x²/2)
        for x in [0.1_f64, 1.0, 3.0, 5.0, 7.0, 20.0] {
            let closed = 1.0 - (-x).exp() * (1.0 + x + x * x / 2.0);
            let p = gamma_p(3.0, x).unwrap();
            assert!((p - closed).abs() < 1e-14, "x = {x}");
            let q = gamma_q(3.0, x).unwrap();
            assert!((p + q - 1.0).abs() < 1e-15);
        }
        assert!(gamma_p(2.0_f64, -1.0).is_err());
    }
}
