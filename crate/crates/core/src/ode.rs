//! Adaptive Dormand–Prince 5(4) integrator for scalar equations y' = f(t, y),
//! with Hairer's fourth-order dense output.
//!
//! The stepping primitives ([`Dopri5::attempt`], [`Dopri5::next_step`]) are
//! public so callers can run their own loop, e.g. to update parameters of `f`
//! between accepted steps.

use crate::real::Real;

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients: fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    pub h_max: Option<T>,
    pub safety: T,
    pub fac_min: T,
    pub fac_max: T,
}

impl<T: Real> Dopri5<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 10_000_000,
            h_max: None,
            safety: T::lit(0.9),
            fac_min: T::lit(0.2),
            fac_max: T::lit(5.0),
        }
    }
}

/// Quartic interpolant over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment<T> {
    pub t0: T,
    pub h: T,
    r: [T; 5],
}

impl<T: Real> DenseSegment<T> {
    pub fn eval(&self, t: T) -> T {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        let r = &self.r;
        r[0] + theta * (r[1] + theta1 * (r[2] + theta * (r[3] + theta1 * r[4])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepAttempt<T> {
    pub t_new: T,
    pub y_new: T,
    /// f(t_new, y_new), reusable as the first stage of the next step.
    pub f_new: T,
    /// Scaled error estimate; the step is acceptable when ≤ 1.
    pub error: T,
    pub dense: DenseSegment<T>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// (t, y) at each requested output time.
    pub samples: Vec<(T, T)>,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError<T> {
    StepSizeUnderflow { t: T, y: T, h: T },
    TooManySteps { t: T },
}

impl<T: Real> Dopri5<T> {
    /// One trial step of size `h` from (t, y) with f0 = f(t, y). Six new
    /// evaluations of `f`.
    pub fn attempt(&self, f: &mut impl FnMut(T, T) -> T, t: T, y: T, f0: T, h: T) -> StepAttempt<T> {
        let l = T::lit;
        let k1 = f0;
        let k2 = f(t + l(C2) * h, y + h * (l(A21) * k1));
        let k3 = f(t + l(C3) * h, y + h * (l(A31) * k1 + l(A32) * k2));
        let k4 = f(t + l(C4) * h, y + h * (l(A41) * k1 + l(A42) * k2 + l(A43) * k3));
        let k5 = f(
            t + l(C5) * h,
            y + h * (l(A51) * k1 + l(A52) * k2 + l(A53) * k3 + l(A54) * k4),
        );
        let k6 = f(
            t + h,
            y + h * (l(A61) * k1 + l(A62) * k2 + l(A63) * k3 + l(A64) * k4 + l(A65) * k5),
        );
        let y_new = y + h * (l(A71) * k1 + l(A73) * k3 + l(A74) * k4 + l(A75) * k5 + l(A76) * k6);
        let t_new = t + h;
        let k7 = f(t_new, y_new);

        let err = h
            * (l(E1) * k1 + l(E3) * k3 + l(E4) * k4 + l(E5) * k5 + l(E6) * k6 + l(E7) * k7);
        let scale = self.atol + self.rtol * y.abs().max(y_new.abs());
        let error = (err / scale).abs();

        let ydiff = y_new - y;
        let bspl = h * k1 - ydiff;
        let dense = DenseSegment {
            t0: t,
            h,
            r: [
                y,
                ydiff,
                bspl,
                ydiff - h * k7 - bspl,
                h * (l(D1) * k1 + l(D3) * k3 + l(D4) * k4 + l(D5) * k5 + l(D6) * k6 + l(D7) * k7),
            ],
        };
        StepAttempt {
            t_new,
            y_new,
            f_new: k7,
            error,
            dense,
        }
    }

    /// Step size for the next attempt after a step with scaled error `error`.
    pub fn next_step(&self, h: T, error: T, after_reject: bool) -> T {
        let fac = if error == T::zero() {
            self.fac_max
        } else {
            (self.safety * error.powf(T::lit(-0.2)))
                .max(self.fac_min)
                .min(self.fac_max)
        };
        let fac = if after_reject { fac.min(T::one()) } else { fac };
        self.limit(h * fac)
    }

    fn limit(&self, h: T) -> T {
        match self.h_max {
            Some(hm) => h.min(hm),
            None => h,
        }
    }

    /// First trial step: 1% of the time in which y changes by its tolerance
    /// scale at the initial slope, capped at the span. Scales as 1/c when f
    /// is multiplied by c.
    pub fn initial_step(&self, y0: T, f0: T, span: T) -> T {
        let scale = self.atol + self.rtol * y0.abs();
        let h = if f0 == T::zero() {
            span * T::lit(1e-6)
        } else {
            T::lit(0.01) * scale / f0.abs()
        };
        self.limit(h.min(span))
    }

    /// Integrates from `t0` to `t_end`, reporting y at each of `sample_times`
    /// (sorted, within [t0, t_end]). Steps that would make y negative are
    /// rejected when `nonnegative` is set.
    pub fn solve(
        &self,
        mut f: impl FnMut(T, T) -> T,
        t0: T,
        y0: T,
        t_end: T,
        sample_times: &[T],
        nonnegative: bool,
    ) -> Result<Solution<T>, OdeError<T>> {
        let mut stats = SolverStats::default();
        let mut samples = Vec::with_capacity(sample_times.len());
        let mut next_sample = 0;
        while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
            samples.push((sample_times[next_sample], y0));
            next_sample += 1;
        }

        let mut t = t0;
        let mut y = y0;
        let mut f0 = f(t, y);
        stats.evaluations += 1;
        let span = t_end - t0;
        let mut h = self.initial_step(y0, f0, span);
        let mut after_reject = false;

        while t < t_end {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(OdeError::TooManySteps { t });
            }
            if t + h >= t_end || t_end - (t + h) < T::lit(1e-12) * span {
                h = t_end - t;
            }
            if !(h > T::eps() * T::lit(16.0) * t.abs()) {
                return Err(OdeError::StepSizeUnderflow { t, y, h });
            }
            let step = self.attempt(&mut f, t, y, f0, h);
            stats.evaluations += 6;
            if nonnegative && step.y_new < T::zero() {
                stats.rejected += 1;
                h = h * T::lit(0.5);
                after_reject = true;
                continue;
            }
            if step.error > T::one() || !step.y_new.is_finite() {
                stats.rejected += 1;
                h = if step.error.is_finite() {
                    self.next_step(h, step.error, true)
                } else {
                    h * self.fac_min
                };
                after_reject = true;
                continue;
            }
            stats.accepted += 1;
            let last = step.t_new >= t_end;
            while next_sample < sample_times.len()
                && (sample_times[next_sample] <= step.t_new || last)
            {
                let ts = sample_times[next_sample];
                let ys = if ts >= step.t_new { step.y_new } else { step.dense.eval(ts) };
                samples.push((ts, ys));
                next_sample += 1;
            }
            t = step.t_new;
            y = step.y_new;
            f0 = step.f_new;
            h = self.next_step(h, step.error, after_reject);
            after_reject = false;
        }
        Ok(Solution { samples, stats })
    }
}

/// `count` evenly spaced times from `t0` to `t_end` inclusive.
pub fn linear_grid<T: Real>(t0: T, t_end: T, count: usize) -> Vec<T> {
    assert!(count >= 2, "grid needs at least two points");
    let n = T::from_usize(count - 1).unwrap();
    (0..count)
        .map(|i| {
            if i == count - 1 {
                t_end
            } else {
                t0 + (t_end - t0) * T::from_usize(i).unwrap() / n
            }
        })
        .collect()
}
