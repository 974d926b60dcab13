//! Monte Carlo evaluation of the collision integrals that feed and drain the
//! condensate, at the trap centre:
//!
//! ```text
//! W⁺ = u²/((2π)⁵ħ²) ∫d³K₁d³K₂d³K₃d³k δ(ω₁+ω₂−ω₃−μ_n/ħ) δ(K₁+K₂−K₃−k) F₁F₂(1+F₃)|ξ̃(k)|²
//! W⁻ = same with (1+F₁)(1+F₂)F₃
//! ```
//!
//! K₁ and K₂ are drawn from the Boltzmann distribution e^{−ħ²K²/2mkT},
//! k from |ξ̃(k)|², and K₃ = K₁+K₂−k. The energy delta is replaced by a
//! Gaussian of width σ_E, and a ladder of widths is extrapolated linearly in
//! σ_E² to zero width. With Boltzmann occupations the Bose factors 1+F are
//! taken as 1, which is the approximation behind the closed-form rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gpe::GpeGroundState;
use crate::model::{interaction_strength, PhysicalConstants, Species};
use crate::special::z_k1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Boltzmann,
    Bose,
}

/// Momentum distribution of the condensate mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CondensateMomentum {
    /// |ξ̃(k)|² = δ(k).
    Delta,
    /// Isotropic Gaussian with per-axis width `sigma_k`, m⁻¹.
    Gaussian { sigma_k: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionIntegralSpec {
    pub species: Species<f64>,
    pub constants: PhysicalConstants<f64>,
    /// K
    pub temperature: f64,
    /// Bath chemical potential, J.
    pub mu_bath: f64,
    pub statistics: Statistics,
    /// ħω = μ_n, J.
    pub transition_energy: f64,
    pub condensate: CondensateMomentum,
    /// Widths of the energy-delta kernel, J.
    pub sigma_ladder: Vec<f64>,
    /// Samples per ladder rung.
    pub samples: usize,
    pub seed: u64,
    /// Sets F₃ = 0.
    pub drop_f3: bool,
    /// Draws K₂ before K₁.
    pub swap_order: bool,
}

/// Fewer effective samples than this on any rung is an error.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;
/// Smallest accepted sample count per rung.
pub const MIN_SAMPLES: usize = 10_000;
/// Relative tolerance used for pass/fail when none is given.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

impl CollisionIntegralSpec {
    /// Boltzmann bath, delta-function condensate, ladder kT/8, kT/16, kT/32.
    pub fn new(species: Species<f64>, temperature: f64, mu_bath: f64, transition_energy: f64, samples: usize, seed: u64) -> Self {
        let constants = PhysicalConstants::si();
        let kt = constants.k_b * temperature;
        Self {
            species,
            constants,
            temperature,
            mu_bath,
            statistics: Statistics::Boltzmann,
            transition_energy,
            condensate: CondensateMomentum::Delta,
            sigma_ladder: vec![kt / 8.0, kt / 16.0, kt / 32.0],
            samples,
            seed,
            drop_f3: false,
            swap_order: false,
        }
    }

    pub fn kt(&self) -> f64 {
        self.constants.k_b * self.temperature
    }

    fn check(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.samples < MIN_SAMPLES {
            bad.push(format!("samples must be at least {MIN_SAMPLES}"));
        }
        if self.sigma_ladder.is_empty() || self.sigma_ladder.iter().any(|s| !(*s > 0.0)) {
            bad.push("energy smearing widths must be positive".into());
        }
        if !(self.temperature > 0.0) {
            bad.push("temperature must be positive".into());
        }
        if self.statistics == Statistics::Bose && !(self.mu_bath < 0.0) {
            bad.push("Bose statistics need a negative bath chemical potential".into());
        }
        if let CondensateMomentum::Gaussian { sigma_k } = self.condensate {
            if !(sigma_k > 0.0) {
                bad.push("condensate momentum width must be positive".into());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(bad.join("; ")))
        }
    }

    /// Closed-form Boltzmann W⁺: 4m(akT)²/(πħ³)·e^{2μ/kT}·zK₁(z), z = ħω/kT.
    pub fn analytic_w_plus(&self) -> f64 {
        let k = &self.constants;
        let kt = self.kt();
        let akt = self.species.scattering_length * kt;
        let pref = 4.0 * self.species.mass * akt * akt / (std::f64::consts::PI * k.hbar.powi(3));
        pref * (2.0 * self.mu_bath / kt).exp() * z_k1(self.transition_energy / kt).unwrap_or(f64::NAN)
    }

    /// W⁺·e^{(μ_n − μ)/kT}
    pub fn analytic_w_minus(&self) -> f64 {
        self.analytic_w_plus() * ((self.transition_energy - self.mu_bath) / self.kt()).exp()
    }

    /// u²/((2π)⁵ħ²)·ħ·e^{2μ/kT}·(2πmkT/ħ²)³: converts the sample mean of
    /// kernel·weight into a rate.
    fn normalization(&self) -> f64 {
        let k = &self.constants;
        let u = interaction_strength(&self.species, k);
        let lambda = 2.0 * std::f64::consts::PI * self.species.mass * self.kt() / (k.hbar * k.hbar);
        let two_pi = 2.0 * std::f64::consts::PI;
        u * u / (two_pi.powi(5) * k.hbar) * (2.0 * self.mu_bath / self.kt()).exp() * lambda.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Channel {
    Gain,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RungEstimate {
    /// J
    pub sigma_e: f64,
    pub value: f64,
    pub error: f64,
    pub effective_samples: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    /// Zero-width extrapolation, s⁻¹.
    pub mc_value: f64,
    pub stat_error: f64,
    pub analytic_value: f64,
    pub ladder: Vec<RungEstimate>,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    fn judge(&mut self) {
        let allowed = (self.tolerance * self.analytic_value.abs()).max(3.0 * self.stat_error);
        self.pass = (self.mc_value - self.analytic_value).abs() < allowed;
    }

    pub fn ratio(&self) -> f64 {
        self.mc_value / self.analytic_value
    }

    pub const CSV_HEADER: &'static str = "name,mc_value,stat_error,analytic_value,ratio,tolerance,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
            self.name,
            self.mc_value,
            self.stat_error,
            self.analytic_value,
            self.ratio(),
            self.tolerance,
            self.pass
        )
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: MC {:.4e} ± {:.2e} vs analytic {:.4e} (ratio {:.4}) {}",
            self.name,
            self.mc_value,
            self.stat_error,
            self.analytic_value,
            self.ratio(),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

const BATCH: usize = 1 << 14;

/// Welford-free accumulator: plain sums merged in batch order.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: f64,
    w: f64,
    w2: f64,
}

fn occupation_ratio(stats: Statistics, x: f64) -> f64 {
    // F/e^{(μ−E)/kT} with x = (μ − E)/kT
    match stats {
        Statistics::Boltzmann => 1.0,
        Statistics::Bose => -1.0 / x.exp_m1(),
    }
}

fn stimulation(stats: Statistics, x: f64) -> f64 {
    // 1 + F, x = (μ − E)/kT
    match stats {
        Statistics::Boltzmann => 1.0,
        Statistics::Bose => 1.0 - 1.0 / x.exp_m1(),
    }
}

fn rung(spec: &CollisionIntegralSpec, channel: Channel, sigma: f64, stream: u64) -> Sums {
    let kt = spec.kt();
    let hbar = spec.constants.hbar;
    let m = spec.species.mass;
    // per-axis standard deviation of K under e^{−ħ²K²/2mkT}
    let s_k = (m * kt).sqrt() / hbar;
    let e_of = |k: [f64; 3]| hbar * hbar * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (2.0 * m);
    let mu = spec.mu_bath;
    let target = spec.transition_energy;
    let inv = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let batches = spec.samples.div_ceil(BATCH);

    let parts: Vec<Sums> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(stream.wrapping_mul(1 << 32).wrapping_add(b as u64));
            let count = BATCH.min(spec.samples - b * BATCH);
            let mut acc = Sums::default();
            let draw = |rng: &mut ChaCha8Rng, s: f64| -> [f64; 3] {
                [
                    s * rng.sample::<f64, _>(StandardNormal),
                    s * rng.sample::<f64, _>(StandardNormal),
                    s * rng.sample::<f64, _>(StandardNormal),
                ]
            };
            for _ in 0..count {
                let (k1, k2) = if spec.swap_order {
                    let k2 = draw(&mut rng, s_k);
                    (draw(&mut rng, s_k), k2)
                } else {
                    let k1 = draw(&mut rng, s_k);
                    (k1, draw(&mut rng, s_k))
                };
                let kc = match spec.condensate {
                    CondensateMomentum::Delta => [0.0; 3],
                    CondensateMomentum::Gaussian { sigma_k } => draw(&mut rng, sigma_k),
                };
                let k3 = [k1[0] + k2[0] - kc[0], k1[1] + k2[1] - kc[1], k1[2] + k2[2] - kc[2]];
                let (e1, e2, e3) = (e_of(k1), e_of(k2), e_of(k3));
                let x = e1 + e2 - e3;
                let d = (x - target) / sigma;
                let kernel = inv * (-0.5 * d * d).exp();
                let (x1, x2, x3) = ((mu - e1) / kt, (mu - e2) / kt, (mu - e3) / kt);
                let weight = match channel {
                    // F₁F₂(1+F₃)/e^{(2μ−E₁−E₂)/kT}
                    Channel::Gain => {
                        let s3 = if spec.drop_f3 { 1.0 } else { stimulation(spec.statistics, x3) };
                        occupation_ratio(spec.statistics, x1) * occupation_ratio(spec.statistics, x2) * s3
                    }
                    // (1+F₁)(1+F₂)F₃/e^{(2μ−E₁−E₂)/kT}
                    Channel::Loss => {
                        if spec.drop_f3 {
                            0.0
                        } else {
                            stimulation(spec.statistics, x1)
                                * stimulation(spec.statistics, x2)
                                * occupation_ratio(spec.statistics, x3)
                                * ((x - mu) / kt).exp()
                        }
                    }
                };
                let w = kernel * weight;
                acc.n += 1.0;
                acc.w += w;
                acc.w2 += w * w;
            }
            acc
        })
        .collect();
    parts.iter().fold(Sums::default(), |a, p| Sums {
        n: a.n + p.n,
        w: a.w + p.w,
        w2: a.w2 + p.w2,
    })
}

/// Weighted least squares fit of value = c₀ + c₁σ², returning c₀ and its
/// standard error. A single rung is returned as is.
fn extrapolate(ladder: &[RungEstimate]) -> (f64, f64) {
    if ladder.len() == 1 {
        return (ladder[0].value, ladder[0].error);
    }
    if ladder.iter().all(|r| r.value == 0.0) {
        return (0.0, 0.0);
    }
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in ladder {
        let w = 1.0 / (r.error * r.error);
        let x = r.sigma_e * r.sigma_e;
        s += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * r.value;
        sxy += w * x * r.value;
    }
    let det = s * sxx - sx * sx;
    let c0 = (sxx * sy - sx * sxy) / det;
    let var0 = sxx / det;
    (c0, var0.sqrt())
}

fn evaluate(spec: &CollisionIntegralSpec, channel: Channel) -> Result<OracleReport> {
    spec.check()?;
    let norm = spec.normalization();
    let mut ladder = Vec::with_capacity(spec.sigma_ladder.len());
    for (i, &sigma) in spec.sigma_ladder.iter().enumerate() {
        let stream = 2 * i as u64 + if channel == Channel::Loss { 1 } else { 0 };
        let s = rung(spec, channel, sigma, stream);
        let mean = s.w / s.n;
        let var = (s.w2 / s.n - mean * mean).max(0.0);
        let ess = if s.w2 > 0.0 { s.w * s.w / s.w2 } else { 0.0 };
        let forced_zero = channel == Channel::Loss && spec.drop_f3;
        if !forced_zero && ess < MIN_EFFECTIVE_SAMPLES {
            return Err(Error::InsufficientSamples {
                ess,
                threshold: MIN_EFFECTIVE_SAMPLES,
            });
        }
        ladder.push(RungEstimate {
            sigma_e: sigma,
            value: norm * mean,
            error: norm * (var / s.n).sqrt(),
            effective_samples: ess,
        });
    }
    let (mc_value, stat_error) = extrapolate(&ladder);
    let (name, analytic_value) = match channel {
        Channel::Gain => ("w_plus", spec.analytic_w_plus()),
        Channel::Loss => ("w_minus", spec.analytic_w_minus()),
    };
    let mut report = OracleReport {
        name: format!("{name}(z={:.3})", spec.transition_energy / spec.kt()),
        mc_value,
        stat_error,
        analytic_value,
        ladder,
        tolerance: DEFAULT_TOLERANCE,
        pass: false,
    };
    report.judge();
    Ok(report)
}

/// Monte Carlo W⁺ compared with the closed form.
pub fn mc_w_plus(spec: &CollisionIntegralSpec) -> Result<OracleReport> {
    evaluate(spec, Channel::Gain)
}

/// Monte Carlo W⁻ compared with the detailed-balance closed form.
pub fn mc_w_minus(spec: &CollisionIntegralSpec) -> Result<OracleReport> {
    evaluate(spec, Channel::Loss)
}

/// Shape comparison at one z: [mc(z)/mc(z_ref)] / [zK₁(z)/(z_ref·K₁(z_ref))].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapePoint {
    pub z: f64,
    pub mc_ratio: f64,
    pub analytic_ratio: f64,
    pub error: f64,
    pub pass: bool,
}

/// W⁺ shape over `zs` relative to `z_ref`, pass iff within
/// max(`tolerance`, 3σ) of the closed form.
pub fn shape_scan(base: &CollisionIntegralSpec, zs: &[f64], z_ref: f64, tolerance: f64) -> Result<Vec<ShapePoint>> {
    let at = |z: f64, seed_offset: u64| {
        let mut s = base.clone();
        s.transition_energy = z * base.kt();
        s.seed = base.seed.wrapping_add(seed_offset);
        mc_w_plus(&s)
    };
    let reference = at(z_ref, 1000)?;
    let zk_ref = z_k1(z_ref)?;
    zs.iter()
        .enumerate()
        .map(|(i, &z)| {
            let r = at(z, i as u64)?;
            let mc_ratio = r.mc_value / reference.mc_value;
            let analytic_ratio = z_k1(z)? / zk_ref;
            let rel = ((r.stat_error / r.mc_value).powi(2) + (reference.stat_error / reference.mc_value).powi(2)).sqrt();
            let error = mc_ratio.abs() * rel;
            let pass = (mc_ratio - analytic_ratio).abs() < (tolerance * analytic_ratio).max(3.0 * error);
            Ok(ShapePoint {
                z,
                mc_ratio,
                analytic_ratio,
                error,
                pass,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrownessReport {
    /// Per-axis RMS width of |ξ̃(k)|², m⁻¹.
    pub condensate_width: f64,
    /// √(mk_BT)/ħ, m⁻¹.
    pub thermal_width: f64,
    pub ratio: f64,
}

/// Compares the condensate momentum spread with the thermal one.
pub fn wigner_narrowness_check(
    state: &GpeGroundState,
    species: &Species<f64>,
    constants: &PhysicalConstants<f64>,
    temperature: f64,
) -> NarrownessReport {
    let condensate_width = state.momentum_width();
    let thermal_width = (species.mass * constants.k_b * temperature).sqrt() / constants.hbar;
    NarrownessReport {
        condensate_width,
        thermal_width,
        ratio: condensate_width / thermal_width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::K_B_SI;

    const T: f64 = 500e-9;

    fn spec(z: f64, mu_frac: f64, samples: usize, seed: u64) -> CollisionIntegralSpec {
        CollisionIntegralSpec::new(Species::rb87(), T, mu_frac * K_B_SI * T, z * K_B_SI * T, samples, seed)
    }

    #[test]
    fn w_plus_matches_closed_form() {
        let r = mc_w_plus(&spec(1.0, 0.2, 400_000, 1)).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert!((r.ratio() - 1.0).abs() < 0.05, "{}", r.summary());
        assert_eq!(r.ladder.len(), 3);
    }

    #[test]
    fn detailed_balance_boltzmann() {
        for (z, mu) in [(0.5, 0.2), (1.0, 1.0)] {
            let s = spec(z, mu, 400_000, 3);
            let p = mc_w_plus(&s).unwrap();
            let m = mc_w_minus(&s).unwrap();
            let ratio = p.mc_value / m.mc_value;
            let expected = (mu - z).exp();
            let err = ratio * ((p.stat_error / p.mc_value).powi(2) + (m.stat_error / m.mc_value).powi(2)).sqrt();
            assert!((ratio - expected).abs() < 3.0 * err + 0.02 * expected, "z={z}: {ratio} vs {expected} ± {err}");
        }
    }

    #[test]
    fn drop_f3_kills_loss() {
        let mut s = spec(1.0, 0.2, 20_000, 1);
        s.drop_f3 = true;
        assert_eq!(mc_w_minus(&s).unwrap().mc_value, 0.0);
    }

    #[test]
    fn symmetric_in_the_two_thermal_atoms() {
        for stats in [Statistics::Boltzmann, Statistics::Bose] {
            let mut s = spec(0.5, -0.2, 50_000, 9);
            s.statistics = stats;
            let a = mc_w_plus(&s).unwrap();
            s.swap_order = true;
            let b = mc_w_plus(&s).unwrap();
            assert!((a.mc_value - b.mc_value).abs() <= 1e-12 * a.mc_value.abs());
        }
    }

    #[test]
    fn bose_enhancement() {
        let mut s = spec(0.2, -0.05, 50_000, 4);
        let boltz = mc_w_plus(&s).unwrap();
        s.statistics = Statistics::Bose;
        let bose = mc_w_plus(&s).unwrap();
        // same draws, pointwise larger weights
        for (a, b) in boltz.ladder.iter().zip(&bose.ladder) {
            assert!(b.value >= a.value);
        }
        s.mu_bath = 0.1 * K_B_SI * T;
        assert!(mc_w_plus(&s).is_err());
    }

    #[test]
    fn scales_as_scattering_length_squared() {
        let s = spec(1.0, 0.2, 20_000, 2);
        let a = mc_w_plus(&s).unwrap();
        let mut doubled = s.clone();
        doubled.species.scattering_length *= 2.0;
        let b = mc_w_plus(&doubled).unwrap();
        assert!((b.mc_value / a.mc_value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ladders_agree_and_halving_is_within_error() {
        let a = mc_w_plus(&spec(1.0, 0.2, 300_000, 11)).unwrap();
        let mut s = spec(1.0, 0.2, 300_000, 12);
        let kt = s.kt();
        s.sigma_ladder = vec![kt / 10.0, kt / 20.0, kt / 40.0];
        let b = mc_w_plus(&s).unwrap();
        let err = (a.stat_error.powi(2) + b.stat_error.powi(2)).sqrt();
        assert!((a.mc_value - b.mc_value).abs() < 3.0 * err, "{} vs {}", a.summary(), b.summary());

        let mut single = spec(1.0, 0.2, 300_000, 13);
        single.sigma_ladder = vec![kt / 32.0];
        let coarse = mc_w_plus(&single).unwrap().mc_value;
        single.sigma_ladder = vec![kt / 64.0];
        let fine = mc_w_plus(&single).unwrap().mc_value;
        assert!((coarse - fine).abs() < 3.0 * a.stat_error + 3.0 * b.stat_error);
    }

    #[test]
    fn gaussian_condensate_close_to_delta() {
        let mut s = spec(1.0, 0.2, 200_000, 5);
        let kt = s.kt();
        let s_k = (s.species.mass * kt).sqrt() / s.constants.hbar;
        s.condensate = CondensateMomentum::Gaussian { sigma_k: 0.02 * s_k };
        let r = mc_w_plus(&s).unwrap();
        assert!((r.ratio() - 1.0).abs() < 0.05, "{}", r.summary());
    }

    #[test]
    fn rejects_small_sample_counts() {
        assert!(mc_w_plus(&spec(1.0, 0.2, 100, 1)).is_err());
    }

    #[test]
    fn balance_point_gives_unit_ratio() {
        let s = spec(0.6, 0.6, 400_000, 21);
        let p = mc_w_plus(&s).unwrap();
        let m = mc_w_minus(&s).unwrap();
        let ratio = p.mc_value / m.mc_value;
        let err = ratio * ((p.stat_error / p.mc_value).powi(2) + (m.stat_error / m.mc_value).powi(2)).sqrt();
        assert!((ratio - 1.0).abs() < 3.0 * err, "{ratio} ± {err}");
    }

    mod narrowness {
        use super::*;
        use crate::gpe::{gpe_ground_state, GpeGrid};
        use crate::model::Trap;

        fn state(n: f64, a: f64) -> (GpeGroundState, Species<f64>, Trap<f64>) {
            let mut species = Species::rb87();
            species.scattering_length = a;
            let trap = Trap::from_hz(100.0, 100.0, 100.0);
            let s = gpe_ground_state(n, &species, &trap, &PhysicalConstants::si(), &GpeGrid::default()).unwrap();
            (s, species, trap)
        }

        #[test]
        fn harmonic_limit() {
            let k = PhysicalConstants::si();
            let (s, species, trap) = state(1.0, 0.0);
            let r = wigner_narrowness_check(&s, &species, &k, T);
            let expected = (k.hbar * trap.omega_bar() / (2.0 * k.k_b * T)).sqrt();
            assert!((r.ratio / expected - 1.0).abs() < 2e-3, "{} vs {expected}", r.ratio);
        }

        #[test]
        fn shrinks_with_atom_number_and_is_small() {
            let k = PhysicalConstants::si();
            let (small, species, _) = state(1e3, RB87_A);
            let (large, _, _) = state(1e6, RB87_A);
            let a = wigner_narrowness_check(&small, &species, &k, T);
            let b = wigner_narrowness_check(&large, &species, &k, T);
            assert!(b.condensate_width < a.condensate_width);
            assert!(b.ratio < 0.1 && a.ratio < 0.1, "{} {}", a.ratio, b.ratio);
        }

        const RB87_A: f64 = crate::model::RB87_SCATTERING_LENGTH;
    }
}
