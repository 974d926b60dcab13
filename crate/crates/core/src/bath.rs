//! Truncated Boltzmann bath.
//!
//! The noncondensate is a Boltzmann distribution at (T̃, μ̃) with zero
//! occupation above the evaporation cut η·k_B·T̃. In a harmonic trap the
//! density of states is g(E) = E²/(2(ħω̄)³), which gives
//!
//! ```text
//! N_nc = e^{μ̃/kT̃}·(kT̃)³/(2(ħω̄)³)·γ(3, η)
//! E_nc = e^{μ̃/kT̃}·(kT̃)⁴/(2(ħω̄)³)·γ(4, η)
//! ```
//!
//! with γ the lower incomplete gamma function.

use crate::error::{Error, Result};
use crate::model::{PhysicalConstants, SimConfig, Trap};
use crate::real::Real;
use crate::special::{gamma_p, gamma_q, lower_gamma};

/// Energy dependence of the density of states used for tail fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dos {
    /// g(E) ∝ E², harmonic trap.
    Quadratic,
    /// g(E) independent of E.
    Flat,
}

/// Fraction of a full Boltzmann distribution lying above η·k_B·T:
/// (1 + η + η²/2)·e^{−η} for the quadratic density of states, e^{−η} for the
/// flat one.
pub fn fraction_above_cut<T: Real>(eta: T, dos: Dos) -> Result<T> {
    if !(eta > T::zero()) {
        return Err(Error::Domain(format!(
            "eta must be positive, got {}",
            eta.to_f64_lossy()
        )));
    }
    Ok(match dos {
        Dos::Quadratic => (T::one() + eta + eta * eta / T::lit(2.0)) * (-eta).exp(),
        Dos::Flat => (-eta).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMoments<T> {
    pub atoms: T,
    /// J
    pub energy: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedBath<T> {
    /// K
    pub temperature: T,
    /// J
    pub chemical_potential: T,
    pub eta: T,
    /// Geometric-mean trap frequency, rad/s.
    pub omega_bar: T,
    pub constants: PhysicalConstants<T>,
}

impl<T: Real> TruncatedBath<T> {
    pub fn new(
        temperature: T,
        chemical_potential: T,
        eta: T,
        trap: &Trap<T>,
        constants: PhysicalConstants<T>,
    ) -> Result<Self> {
        let bath = Self {
            temperature,
            chemical_potential,
            eta,
            omega_bar: trap.omega_bar(),
            constants,
        };
        bath.check()?;
        Ok(bath)
    }

    /// Bath holding `atoms` atoms at the given temperature and cut.
    pub fn with_atoms(
        temperature: T,
        atoms: T,
        eta: T,
        trap: &Trap<T>,
        constants: PhysicalConstants<T>,
    ) -> Result<Self> {
        let mut bath = Self {
            temperature,
            chemical_potential: T::zero(),
            eta,
            omega_bar: trap.omega_bar(),
            constants,
        };
        bath.chemical_potential = bath.mu_for_atoms(atoms, temperature, eta)?;
        bath.check()?;
        Ok(bath)
    }

    fn check(&self) -> Result<()> {
        let kt = self.kt();
        if !(self.temperature > T::zero()) || !(self.eta > T::zero()) {
            return Err(self.fit_error("temperature and eta must be positive"));
        }
        if !(self.chemical_potential < self.eta * kt) {
            return Err(self.fit_error("chemical potential at or above the cut"));
        }
        Ok(())
    }

    fn fit_error(&self, reason: &str) -> Error {
        let (atoms, energy) = match truncated_moments(self) {
            Ok(m) => (m.atoms.to_f64_lossy(), m.energy.to_f64_lossy()),
            Err(_) => (f64::NAN, f64::NAN),
        };
        Error::BathFit {
            reason: format!(
                "{reason}; T = {:e} K, mu = {:e} J, eta = {}",
                self.temperature.to_f64_lossy(),
                self.chemical_potential.to_f64_lossy(),
                self.eta.to_f64_lossy()
            ),
            atoms,
            energy,
        }
    }

    pub fn kt(&self) -> T {
        self.constants.k_b * self.temperature
    }

    fn hbar_omega(&self) -> T {
        self.constants.hbar * self.omega_bar
    }

    /// μ̃ giving `atoms` atoms at temperature `t` and cut `eta`.
    fn mu_for_atoms(&self, atoms: T, t: T, eta: T) -> Result<T> {
        if !(atoms > T::zero()) {
            return Err(Error::BathFit {
                reason: "noncondensate atom number must stay positive".into(),
                atoms: atoms.to_f64_lossy(),
                energy: f64::NAN,
            });
        }
        let kt = self.constants.k_b * t;
        let g3 = lower_gamma(T::lit(3.0), eta)?;
        let ratio = self.hbar_omega() / kt;
        Ok(kt * (T::lit(2.0) * atoms * ratio * ratio * ratio / g3).ln())
    }

    /// Mean energy per atom divided by k_B·T̃: γ(4,η)/γ(3,η), below 3.
    pub fn mean_energy_ratio(eta: T) -> Result<T> {
        // γ(4,η)/γ(3,η) = 3·P(4,η)/P(3,η)
        Ok(T::lit(3.0) * gamma_p(T::lit(4.0), eta)? / gamma_p(T::lit(3.0), eta)?)
    }
}

pub fn truncated_moments<T: Real>(bath: &TruncatedBath<T>) -> Result<BathMoments<T>> {
    let kt = bath.kt();
    let x = kt / bath.hbar_omega();
    let scale = (bath.chemical_potential / kt).exp() * x * x * x / T::lit(2.0);
    let atoms = scale * lower_gamma(T::lit(3.0), bath.eta)?;
    let energy = scale * kt * lower_gamma(T::lit(4.0), bath.eta)?;
    Ok(BathMoments { atoms, energy })
}

/// Temperature and chemical potential of the full Boltzmann distribution with
/// the same atom number and energy as the truncated bath.
pub fn retherm<T: Real>(bath: &TruncatedBath<T>) -> Result<(T, T)> {
    let t_new = bath.temperature * TruncatedBath::mean_energy_ratio(bath.eta)? / T::lit(3.0);
    // e^{μ'/kT'}(kT')³ = e^{μ̃/kT̃}(kT̃)³·γ(3,η)/2
    let kt = bath.kt();
    let kt_new = bath.constants.k_b * t_new;
    let g3_over_2 = gamma_p(T::lit(3.0), bath.eta)?;
    let mu_new = kt_new
        * (bath.chemical_potential / kt + T::lit(3.0) * (kt / kt_new).ln() + g3_over_2.ln());
    Ok((t_new, mu_new))
}

/// Moves `delta_n` atoms from the bath into the condensate, each carrying
/// energy `mu_n`, then re-fits (T̃, μ̃) at the same η. Negative `delta_n`
/// returns atoms to the bath.
pub fn couple_step<T: Real>(bath: &TruncatedBath<T>, delta_n: T, mu_n: T) -> Result<TruncatedBath<T>> {
    let m = truncated_moments(bath)?;
    refit(
        bath,
        BathMoments {
            atoms: m.atoms - delta_n,
            energy: m.energy - delta_n * mu_n,
        },
        bath.eta,
    )
}

/// Truncated bath at cut `eta` with the given moments. The mean energy per
/// atom fixes T̃, then the atom number fixes μ̃.
pub fn refit<T: Real>(bath: &TruncatedBath<T>, moments: BathMoments<T>, eta: T) -> Result<TruncatedBath<T>> {
    if !(moments.atoms > T::zero()) || !(moments.energy > T::zero()) {
        return Err(Error::BathFit {
            reason: "noncondensate atom number and energy must stay positive".into(),
            atoms: moments.atoms.to_f64_lossy(),
            energy: moments.energy.to_f64_lossy(),
        });
    }
    let per_atom = moments.energy / moments.atoms;
    let temperature = per_atom / (bath.constants.k_b * TruncatedBath::mean_energy_ratio(eta)?);
    let mut next = TruncatedBath {
        temperature,
        eta,
        ..*bath
    };
    next.chemical_potential = next.mu_for_atoms(moments.atoms, temperature, eta)?;
    if !next.temperature.is_finite() || !next.chemical_potential.is_finite() {
        return Err(Error::BathFit {
            reason: "fit produced non-finite temperature or chemical potential".into(),
            atoms: moments.atoms.to_f64_lossy(),
            energy: moments.energy.to_f64_lossy(),
        });
    }
    Ok(next)
}

/// Cut parameter as a function of time, applied when the bath is re-fitted.
pub trait EtaSchedule<T>: Send + Sync {
    fn eta(&self, t: T, bath: &TruncatedBath<T>) -> T;
}

/// Keeps the cut parameter of the bath unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantEta;

impl<T: Real> EtaSchedule<T> for ConstantEta {
    fn eta(&self, _t: T, bath: &TruncatedBath<T>) -> T {
        bath.eta
    }
}

/// A depleting bath for a coupled growth run.
pub struct BathCoupling<T> {
    pub initial: TruncatedBath<T>,
    pub schedule: Box<dyn EtaSchedule<T>>,
}

impl<T: Real> BathCoupling<T> {
    pub fn new(initial: TruncatedBath<T>) -> Self {
        Self {
            initial,
            schedule: Box::new(ConstantEta),
        }
    }

    /// Bath from the run configuration. With `total_atoms` set, the bath
    /// holds `total_atoms − n_initial` atoms and its chemical potential is
    /// derived from that; otherwise the configured chemical potential is used.
    pub fn from_config(config: &SimConfig<T>) -> Result<Self> {
        let b = &config.bath;
        let initial = match config.total_atoms {
            Some(total) => TruncatedBath::with_atoms(
                b.temperature,
                total - config.n_initial,
                b.eta,
                &config.trap,
                config.constants,
            )?,
            None => TruncatedBath::new(
                b.temperature,
                b.chemical_potential,
                b.eta,
                &config.trap,
                config.constants,
            )?,
        };
        Ok(Self::new(initial))
    }

    pub fn with_schedule(mut self, schedule: Box<dyn EtaSchedule<T>>) -> Self {
        self.schedule = schedule;
        self
    }
}

/// Regularized Q(3, η), for callers that need the truncated-away fraction.
pub fn truncated_fraction<T: Real>(eta: T) -> Result<T> {
    gamma_q(T::lit(3.0), eta)
}
