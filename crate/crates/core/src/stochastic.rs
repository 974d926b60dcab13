//! Birth–death master equation for the condensate occupation N.
//!
//! Births happen at λ⁺(N) = 2(N+1)·W⁺(N) and deaths at λ⁻(N) = 2N·W⁻(N), so
//! λ⁻(0) = 0 and the chain cannot go negative. Trajectories are sampled
//! exactly (Gillespie) with ChaCha8 streams: trajectory `i` of an ensemble
//! with master seed `s` uses stream `i` of the generator seeded by `s`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::SimConfig;
use crate::rates::RateContext;
use crate::special::gamma_q;

/// Rates tabulated over integer N. Entries past the table are computed on
/// the fly.
#[derive(Debug, Clone)]
pub struct BirthDeathChain {
    ctx: RateContext<f64>,
    /// (λ⁺(N), λ⁻(N)) for N = 0..table.len()
    table: Vec<(f64, f64)>,
}

impl BirthDeathChain {
    /// Tabulates up to twice the stationary point (or 1000 when the bath
    /// cannot hold a condensate).
    pub fn new(ctx: RateContext<f64>) -> Self {
        let cap = match crate::growth::stationary_point(&ctx) {
            Ok(ns) => (2.0 * ns + 200.0).min(5e7) as usize,
            Err(_) => 1000,
        };
        Self::with_capacity(ctx, cap)
    }

    pub fn with_capacity(ctx: RateContext<f64>, cap: usize) -> Self {
        let table = (0..=cap as u64).map(|n| Self::compute(&ctx, n)).collect();
        Self { ctx, table }
    }

    pub fn from_config(config: &SimConfig<f64>) -> Result<Self> {
        Ok(Self::new(RateContext::from_config(config)?))
    }

    pub fn context(&self) -> &RateContext<f64> {
        &self.ctx
    }

    fn compute(ctx: &RateContext<f64>, n: u64) -> (f64, f64) {
        let x = n as f64;
        let birth = 2.0 * (x + 1.0) * ctx.w_plus(x);
        let death = if n == 0 { 0.0 } else { 2.0 * x * ctx.w_minus(x) };
        (birth, death)
    }

    /// (λ⁺(N), λ⁻(N))
    #[inline]
    pub fn rates(&self, n: u64) -> (f64, f64) {
        match self.table.get(n as usize) {
            Some(&r) => r,
            None => Self::compute(&self.ctx, n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Birth,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    /// Occupation after the event.
    pub n: u64,
    pub direction: Direction,
}

#[derive(Debug, Clone)]
pub struct SsaOptions {
    pub n_initial: u64,
    /// Sorted output times; the state at each is the occupation just after
    /// all events up to and including that time.
    pub times: Vec<f64>,
    pub record_events: bool,
    /// Occupation whose first passage time is recorded as the latency.
    pub seed_threshold: u64,
}

impl SsaOptions {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            n_initial: 0,
            times,
            record_events: false,
            seed_threshold: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsaTrajectory {
    pub n: Vec<u64>,
    pub events: Option<Vec<Event>>,
    pub event_count: u64,
    /// First time N reached the seed threshold.
    pub latency: Option<f64>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One exact trajectory on stream 0 of `seed`.
pub fn ssa_trajectory(chain: &BirthDeathChain, opts: &SsaOptions, seed: u64) -> SsaTrajectory {
    run(chain, opts, &mut stream_rng(seed, 0))
}

fn run(chain: &BirthDeathChain, opts: &SsaOptions, rng: &mut ChaCha8Rng) -> SsaTrajectory {
    let times = &opts.times;
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(times.len());
    let mut events = opts.record_events.then(Vec::new);
    let mut n = opts.n_initial;
    let mut t = 0.0;
    let mut count = 0u64;
    let mut latency = (n >= opts.seed_threshold).then_some(0.0);
    loop {
        let (up, down) = chain.rates(n);
        let total = up + down;
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        let t_next = t + wait;
        while out.len() < times.len() && times[out.len()] < t_next {
            out.push(n);
        }
        if !(t_next <= t_end) {
            break;
        }
        let direction = if rng.random::<f64>() * total < up {
            n += 1;
            Direction::Birth
        } else {
            n -= 1;
            Direction::Death
        };
        t = t_next;
        count += 1;
        if latency.is_none() && n >= opts.seed_threshold {
            latency = Some(t);
        }
        if let Some(ev) = events.as_mut() {
            ev.push(Event { t, n, direction });
        }
    }
    out.resize(times.len(), n);
    SsaTrajectory {
        n: out,
        events,
        event_count: count,
        latency,
    }
}

/// Ensemble statistics on the common output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Unbiased sample variance.
    pub variance: Vec<f64>,
    /// Nearest-rank quantiles at [`BAND_LEVELS`], per time.
    pub bands: Vec<[f64; 5]>,
    /// First-passage times to the seed threshold; `None` if never reached.
    pub latencies: Vec<Option<f64>>,
    pub trajectories: usize,
    pub seed: u64,
    /// Occupations at the final time, one per trajectory.
    pub final_states: Vec<u64>,
    pub total_events: u64,
}

/// Quantile levels of the bands: 90% and 50% central intervals plus median.
pub const BAND_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// `m` independent trajectories. Each runs on its own generator stream, and
/// reduction happens in trajectory order, so results do not depend on the
/// thread count.
pub fn ensemble(chain: &BirthDeathChain, opts: &SsaOptions, m: usize, seed: u64) -> Result<EnsembleStats> {
    if m < 2 {
        return Err(Error::Domain(format!("ensemble needs at least 2 trajectories, got {m}")));
    }
    let quiet = SsaOptions {
        record_events: false,
        ..opts.clone()
    };
    let runs: Vec<SsaTrajectory> = (0..m as u64)
        .into_par_iter()
        .map(|i| run(chain, &quiet, &mut stream_rng(seed, i)))
        .collect();

    let k = opts.times.len();
    let mut mean = vec![0.0; k];
    let mut variance = vec![0.0; k];
    let mut bands = Vec::with_capacity(k);
    let mut column = vec![0u64; m];
    for j in 0..k {
        for (c, r) in column.iter_mut().zip(&runs) {
            *c = r.n[j];
        }
        let mu = column.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
        let var = column.iter().map(|&x| (x as f64 - mu).powi(2)).sum::<f64>() / (m - 1) as f64;
        mean[j] = mu;
        variance[j] = var;
        column.sort_unstable();
        bands.push(BAND_LEVELS.map(|q| {
            let pos = q * (m - 1) as f64;
            let idx = if q < 0.5 { pos.floor() } else { pos.ceil() } as usize;
            column[idx] as f64
        }));
    }
    Ok(EnsembleStats {
        times: opts.times.clone(),
        mean,
        variance,
        bands,
        latencies: runs.iter().map(|r| r.latency).collect(),
        trajectories: m,
        seed,
        final_states: runs.iter().map(|r| *r.n.last().unwrap_or(&0)).collect(),
        total_events: runs.iter().map(|r| r.event_count).sum(),
    })
}

/// Stationary law of the chain on {0, …, n_max}:
/// p(N+1)/p(N) = λ⁺(N)/λ⁻(N+1) = W⁺(N)/W⁻(N+1), accumulated in log space.
pub fn stationary_distribution(ctx: &RateContext<f64>, n_max: u64) -> Result<Vec<f64>> {
    let ln_ratio = |n: u64| {
        let x = n as f64;
        ctx.w_plus(x).ln() - ctx.w_plus(x + 1.0).ln() - ctx.gain_exponent(x + 1.0)
    };
    let mut logp = Vec::with_capacity(n_max as usize + 1);
    logp.push(0.0);
    for n in 0..n_max {
        let prev = logp[n as usize];
        logp.push(prev + ln_ratio(n));
    }
    let peak = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = logp.iter().map(|l| (l - peak).exp()).sum();
    let p: Vec<f64> = logp.iter().map(|l| (l - peak).exp() / norm).collect();

    // Beyond n_max the ratios keep shrinking, so the tail is bounded by a
    // geometric series starting at the last ratio.
    let r = ln_ratio(n_max).exp();
    let last = p[n_max as usize];
    let tail = if r < 1.0 { last * r / (1.0 - r) } else { f64::INFINITY };
    if !(tail < 1e-12) {
        return Err(Error::TailMassTooLarge { tail, n_max });
    }
    Ok(p)
}

/// N_max at which the stationary tail beyond is negligible, found by
/// doubling from the stationary point.
pub fn stationary_support(ctx: &RateContext<f64>) -> u64 {
    let mut n_max = match crate::growth::stationary_point(ctx) {
        Ok(ns) => (1.5 * ns) as u64 + 64,
        Err(_) => 64,
    };
    while stationary_distribution(ctx, n_max).is_err() && n_max < 1 << 40 {
        n_max *= 2;
    }
    n_max
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² test of integer samples against probabilities `p` over
/// {0, …, p.len()−1}. Adjacent cells are pooled until each expects at least
/// five counts; samples beyond the support land in the last cell.
pub fn chi_square_gof(samples: &[u64], p: &[f64]) -> GofResult {
    let total = samples.len() as f64;
    let mut counts = vec![0u64; p.len()];
    for &s in samples {
        counts[(s as usize).min(p.len() - 1)] += 1;
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, q) in counts.iter().zip(p) {
        obs += *c as f64;
        exp += q * total;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => cells.push((obs, exp)),
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        gamma_q(dof as f64 / 2.0, statistic / 2.0).unwrap_or(0.0)
    };
    GofResult {
        statistic,
        dof,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem_potential::ChemPotentialModel;
    use crate::model::{PhysicalConstants, Species, Trap};
    use crate::ode::linear_grid;
    use crate::rates::RateHooks;

    /// Small condensate in nondimensional units (ħ = k_B = m = ω = 1).
    fn small_ctx(mu: f64, a: f64) -> RateContext<f64> {
        let chem = ChemPotentialModel::new(
            Species::new("test", 1.0, a),
            Trap::isotropic(1.0),
            PhysicalConstants::unit(),
        );
        RateContext::new(chem, 10.0, mu)
    }

    #[test]
    fn empty_state_only_births() {
        let chain = BirthDeathChain::new(small_ctx(8.0, 0.05));
        let (up, down) = chain.rates(0);
        assert!(up > 0.0);
        assert_eq!(down, 0.0);
        let mut opts = SsaOptions::new(vec![1e-9]);
        opts.record_events = true;
        for seed in 0..20 {
            let tr = ssa_trajectory(&chain, &SsaOptions::new(linear_grid(0.0, 10.0, 3)), seed);
            assert!(tr.event_count > 0);
            let one = ssa_trajectory(&chain, &SsaOptions { times: vec![1e3], ..opts.clone() }, seed);
            assert_eq!(one.events.unwrap()[0].direction, Direction::Birth);
        }
    }

    #[test]
    fn same_seed_same_path() {
        let chain = BirthDeathChain::new(small_ctx(8.0, 0.05));
        let mut opts = SsaOptions::new(linear_grid(0.0, 0.5, 11));
        opts.record_events = true;
        let a = ssa_trajectory(&chain, &opts, 42);
        let b = ssa_trajectory(&chain, &opts, 42);
        assert_eq!(a, b);
        let c = ssa_trajectory(&chain, &opts, 43);
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn table_matches_direct_rates() {
        let ctx = small_ctx(8.0, 0.05);
        let chain = BirthDeathChain::with_capacity(ctx.clone(), 10);
        for n in [0u64, 3, 10, 11, 500] {
            let (up, down) = chain.rates(n);
            assert_eq!(up, 2.0 * (n as f64 + 1.0) * ctx.w_plus(n as f64));
            if n > 0 {
                assert_eq!(down, 2.0 * n as f64 * ctx.w_minus(n as f64));
            }
        }
    }

    #[test]
    fn pure_birth_mean_matches_ode() {
        // W⁻ = 0, W⁺ = w: dn/dt = 2w(n + 1), n(t) = e^{2wt} − 1
        let w = 0.5;
        let ctx = small_ctx(8.0, 0.05).with_hooks(RateHooks {
            rate_scale: 1.0,
            disable_loss: true,
            constant_w_plus: Some(w),
        });
        let chain = BirthDeathChain::with_capacity(ctx, 200);
        let times = linear_grid(0.0, 2.0, 9);
        let stats = ensemble(&chain, &SsaOptions::new(times.clone()), 10_000, 7).unwrap();
        for (j, &t) in times.iter().enumerate() {
            let exact = (2.0 * w * t).exp() - 1.0;
            let err = (stats.variance[j] / 1e4).sqrt();
            assert!((stats.mean[j] - exact).abs() <= 5.0 * err + 1e-12, "t = {t}: {} vs {exact}", stats.mean[j]);
        }
    }

    #[test]
    fn ensemble_shape_and_degenerate_bands() {
        let chain = BirthDeathChain::new(small_ctx(8.0, 0.05));
        let opts = SsaOptions::new(linear_grid(0.0, 0.3, 7));
        let stats = ensemble(&chain, &opts, 2, 1).unwrap();
        assert_eq!(stats.final_states.len(), 2);
        for (j, b) in stats.bands.iter().enumerate() {
            assert_eq!(b[0], b[1]);
            assert_eq!(b[3], b[4]);
            assert!(b[0] <= b[2] && b[2] <= b[4]);
            assert!(stats.variance[j] >= 0.0);
        }
        assert!(ensemble(&chain, &opts, 1, 1).is_err());
    }

    #[test]
    fn ensemble_independent_of_thread_count() {
        let chain = BirthDeathChain::new(small_ctx(8.0, 0.05));
        let opts = SsaOptions::new(linear_grid(0.0, 0.3, 7));
        let a = ensemble(&chain, &opts, 64, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| ensemble(&chain, &opts, 64, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn latency_has_spread() {
        let chain = BirthDeathChain::new(small_ctx(8.0, 0.05));
        let opts = SsaOptions::new(linear_grid(0.0, 6.0, 5));
        let stats = ensemble(&chain, &opts, 200, 3).unwrap();
        let lat: Vec<f64> = stats.latencies.iter().flatten().copied().collect();
        assert!(lat.len() > 100);
        let m = lat.iter().sum::<f64>() / lat.len() as f64;
        let v = lat.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (lat.len() - 1) as f64;
        assert!(v > 0.0);
    }

    #[test]
    fn stationary_ratio_identity() {
        let ctx = small_ctx(8.0, 0.05);
        let n_max = stationary_support(&ctx);
        let p = stationary_distribution(&ctx, n_max).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for n in [0usize, 10, 100, 400] {
            let x = n as f64;
            let ratio = p[n + 1] / p[n];
            let exact = ctx.w_plus(x) / ctx.w_minus(x + 1.0);
            assert!((ratio / exact - 1.0).abs() < 1e-12);
            // e^{(μ − μ_{N+1})/kT} differs from it only by W⁺(N)/W⁺(N+1)
            let boltz = (-ctx.gain_exponent(x + 1.0)).exp();
            let shift = ctx.w_plus(x) / ctx.w_plus(x + 1.0);
            assert!((ratio / (boltz * shift) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_near_zero_below_mu0() {
        // μ two k_BT below μ(0): every ratio is about e^{-2}
        let ctx = small_ctx(-20.0, 0.05);
        let p = stationary_distribution(&ctx, 200).unwrap();
        let argmax = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert_eq!(argmax, 0);
        assert!(p[0] > 0.5);
    }

    #[test]
    fn tail_criterion() {
        let ctx = small_ctx(8.0, 0.05);
        assert!(matches!(
            stationary_distribution(&ctx, 10),
            Err(Error::TailMassTooLarge { .. })
        ));
    }

    #[test]
    fn stationary_mean_offset_from_deterministic_point() {
        // The mode sits below n_s by about 1 + 5kT/(2μ) in the Thomas–Fermi
        // branch, not within 1 of it.
        let ctx = small_ctx(8.0, 0.05);
        let ns = crate::growth::stationary_point(&ctx).unwrap();
        let p = stationary_distribution(&ctx, stationary_support(&ctx)).unwrap();
        let mode = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap() as f64;
        let predicted = -(1.0 + 2.5 * ctx.kt() / ctx.mu_bath());
        assert!((mode - ns - predicted).abs() < 1.5, "mode {mode}, n_s {ns}");
    }

    #[test]
    fn chi_square_accepts_own_law() {
        let p = [0.1, 0.2, 0.4, 0.2, 0.1];
        let samples: Vec<u64> = [0u64; 100]
            .iter()
            .chain(&[1; 200])
            .chain(&[2; 400])
            .chain(&[3; 200])
            .chain(&[4; 100])
            .copied()
            .collect();
        let g = chi_square_gof(&samples, &p);
        assert_eq!(g.statistic, 0.0);
        assert_eq!(g.dof, 4);
        assert!((g.p_value - 1.0).abs() < 1e-12);
        let skewed: Vec<u64> = vec![0; 1000];
        assert!(chi_square_gof(&skewed, &p).p_value < 1e-10);
    }
}
