//! Deterministic condensate growth: dn/dt = 2W⁺(n)·{(1 − e^{(μ_n − μ)/kT})·n + 1}.
//!
//! The bath is either held fixed or, with a [`BathCoupling`], loses the atoms
//! and energy (μ_n per atom) that enter the condensate and is re-fitted after
//! every accepted step.

use sha2::{Digest, Sha256};

use crate::bath::{couple_step, refit, truncated_moments, BathCoupling, BathMoments, TruncatedBath};
use crate::error::{Error, Result};
use crate::model::SimConfig;
use crate::ode::{linear_grid, Dopri5, SolverStats};
use crate::rates::RateContext;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSample<T> {
    /// s
    pub t: T,
    pub n: T,
    /// J
    pub mu_n: T,
    /// s⁻¹
    pub w_plus: T,
    /// K
    pub bath_temperature: T,
    /// J
    pub bath_mu: T,
    /// Present for depleting-bath runs.
    pub bath_moments: Option<BathMoments<T>>,
    /// Energy carried into the condensate so far, J.
    pub energy_to_condensate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTrajectory<T> {
    pub samples: Vec<GrowthSample<T>>,
    /// SHA-256 of the configuration that produced the run.
    pub config_hash: String,
    pub stats: SolverStats,
}

impl<T: Real> GrowthTrajectory<T> {
    pub fn last(&self) -> &GrowthSample<T> {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn is_coupled(&self) -> bool {
        self.samples.first().is_some_and(|s| s.bath_moments.is_some())
    }
}

/// Hex SHA-256 of the configuration's debug representation.
pub fn config_hash<T: Real>(config: &SimConfig<T>) -> String {
    let digest = Sha256::digest(format!("{config:?}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Integrates the growth equation for a validated configuration, emitting
/// `config.solver.samples` evenly spaced samples on [0, t_end].
pub fn integrate_growth<T: Real>(
    config: &SimConfig<T>,
    coupling: Option<&BathCoupling<T>>,
) -> Result<GrowthTrajectory<T>> {
    let ctx = RateContext::from_config(config)?;
    let times = linear_grid(T::zero(), config.t_end, config.solver.samples);
    let mut traj = integrate_rates(&ctx, config, &times, coupling)?;
    traj.config_hash = config_hash(config);
    Ok(traj)
}

/// Growth for an explicit rate context (hooks included) at the given output
/// times. The solver settings, t_end and n_initial come from `config`; the
/// species, trap and bath inside `ctx` take precedence over it.
pub fn integrate_rates<T: Real>(
    ctx: &RateContext<T>,
    config: &SimConfig<T>,
    times: &[T],
    coupling: Option<&BathCoupling<T>>,
) -> Result<GrowthTrajectory<T>> {
    let solver = Dopri5 {
        max_steps: config.solver.max_steps,
        ..Dopri5::new(config.solver.rtol, config.solver.atol)
    };
    let t_end = config.t_end;
    let n0 = config.n_initial;

    let mut bath: Option<TruncatedBath<T>> = coupling.map(|c| c.initial);
    let mut ctx = match &bath {
        Some(b) => ctx.with_bath(b.temperature, b.chemical_potential),
        None => ctx.clone(),
    };
    let mut energy_out = T::zero();

    let sample = |ctx: &RateContext<T>, bath: &Option<TruncatedBath<T>>, t: T, n: T, e: T| -> Result<GrowthSample<T>> {
        Ok(GrowthSample {
            t,
            n,
            mu_n: ctx.mu_n(n),
            w_plus: ctx.w_plus(n),
            bath_temperature: ctx.temperature(),
            bath_mu: ctx.mu_bath(),
            bath_moments: bath.as_ref().map(truncated_moments).transpose()?,
            energy_to_condensate: e,
        })
    };

    let mut stats = SolverStats::default();
    let mut samples = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] <= T::zero() {
        samples.push(sample(&ctx, &bath, times[next], n0, energy_out)?);
        next += 1;
    }

    let mut t = T::zero();
    let mut n = n0;
    let mut f0 = ctx.net_growth_rate(n);
    stats.evaluations += 1;
    let mut h = solver.initial_step(n, f0, t_end);
    let mut after_reject = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= solver.max_steps {
            return Err(Error::TooManySteps {
                max_steps: solver.max_steps,
                t: t.to_f64_lossy(),
            });
        }
        if t + h >= t_end || t_end - (t + h) < T::lit(1e-12) * t_end {
            h = t_end - t;
        }
        if !(h > T::eps() * T::lit(16.0) * t.abs()) {
            return Err(Error::StepSizeUnderflow {
                t: t.to_f64_lossy(),
                n: n.to_f64_lossy(),
                h: h.to_f64_lossy(),
            });
        }
        let step = solver.attempt(&mut |_, y| ctx.net_growth_rate(y), t, n, f0, h);
        stats.evaluations += 6;
        if step.y_new < T::zero() {
            stats.rejected += 1;
            h = h * T::lit(0.5);
            after_reject = true;
            continue;
        }
        if !(step.error <= T::one()) || !step.y_new.is_finite() {
            stats.rejected += 1;
            h = if step.error.is_finite() {
                solver.next_step(h, step.error, true)
            } else {
                h * solver.fac_min
            };
            after_reject = true;
            continue;
        }
        stats.accepted += 1;

        let last = step.t_new >= t_end;
        // Samples inside the step see the bath moved by the partial transfer.
        let mu_step = ctx.mu_n(n);
        while next < times.len() && (times[next] <= step.t_new || last) {
            let ts = times[next];
            let ys = if ts >= step.t_new { step.y_new } else { step.dense.eval(ts) };
            let s = match &bath {
                Some(b) => {
                    let partial = couple_step(b, ys - n, mu_step)?;
                    let c = ctx.with_bath(partial.temperature, partial.chemical_potential);
                    sample(&c, &Some(partial), ts, ys, energy_out + (ys - n) * mu_step)?
                }
                None => sample(&ctx, &bath, ts, ys, energy_out)?,
            };
            samples.push(s);
            next += 1;
        }

        if let (Some(b), Some(c)) = (bath.as_mut(), coupling) {
            let delta = step.y_new - n;
            let moved = couple_step(b, delta, mu_step)?;
            let eta = c.schedule.eta(step.t_new, &moved);
            *b = if eta == moved.eta {
                moved
            } else {
                refit(&moved, truncated_moments(&moved)?, eta)?
            };
            energy_out = energy_out + delta * mu_step;
            ctx = ctx.with_bath(b.temperature, b.chemical_potential);
            f0 = ctx.net_growth_rate(step.y_new);
            stats.evaluations += 1;
        } else {
            f0 = step.f_new;
        }
        t = step.t_new;
        n = step.y_new;
        h = solver.next_step(h, step.error, after_reject);
        after_reject = false;
    }
    Ok(GrowthTrajectory {
        samples,
        config_hash: String::new(),
        stats,
    })
}

/// Default seed threshold for the latency time: roughly the first hundred
/// atoms.
pub const DEFAULT_SEED_THRESHOLD: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthMilestones<T> {
    /// First time n reaches the seed threshold.
    pub latency_time: Option<T>,
    /// Times at which n reaches 10% and 90% of `saturation_n`.
    pub t10: Option<T>,
    pub t90: Option<T>,
    pub growth_time_10_90: Option<T>,
    /// Final condensate number.
    pub saturation_n: T,
    /// The run ended with |μ_n − μ|/|μ| < 10⁻².
    pub saturation_reached: bool,
}

fn first_crossing<T: Real>(samples: &[GrowthSample<T>], level: T) -> Option<T> {
    let first = samples.first()?;
    if first.n >= level {
        return Some(first.t);
    }
    samples.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (b.n >= level).then(|| a.t + (b.t - a.t) * (level - a.n) / (b.n - a.n))
    })
}

/// Latency and growth milestones. The 10–90% times are only reported when
/// 10% of the final number is itself above the seed threshold, so that
/// latency ≤ t10 ≤ t90 whenever all three are defined.
pub fn extract_milestones<T: Real>(traj: &GrowthTrajectory<T>, seed_threshold: T) -> GrowthMilestones<T> {
    let samples = &traj.samples;
    let last = traj.last();
    let saturation_n = last.n;
    let latency_time = first_crossing(samples, seed_threshold);
    let (t10, t90) = if latency_time.is_some() && T::lit(0.1) * saturation_n >= seed_threshold {
        (
            first_crossing(samples, T::lit(0.1) * saturation_n),
            first_crossing(samples, T::lit(0.9) * saturation_n),
        )
    } else {
        (None, None)
    };
    let growth_time_10_90 = match (t10, t90) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    let saturation_reached = latency_time.is_some()
        && last.bath_mu != T::zero()
        && ((last.mu_n - last.bath_mu) / last.bath_mu).abs() < T::lit(1e-2);
    GrowthMilestones {
        latency_time,
        t10,
        t90,
        growth_time_10_90,
        saturation_n,
        saturation_reached,
    }
}

/// Stationary point n_s of the growth equation for a fixed bath, i.e. the
/// root of (e^{(μ_n − μ)/kT} − 1)·n = 1, by bisection above n*.
pub fn stationary_point<T: Real>(ctx: &RateContext<T>) -> Result<T> {
    let n_star = ctx.chem.n_equilibrium(ctx.mu_bath())?;
    let g = |n: T| n * ctx.gain_exponent(n).exp_m1() - T::one();
    let mut lo = n_star;
    let mut hi = n_star * T::lit(2.0) + T::lit(10.0);
    while g(hi) < T::zero() {
        hi = hi * T::lit(2.0);
    }
    for _ in 0..300 {
        let mid = (lo + hi) / T::lit(2.0);
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::eps() * hi {
            break;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}
