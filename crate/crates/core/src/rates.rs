//! Transition rates between the condensate and a thermal Boltzmann bath.
//!
//! The feeding rate is
//!
//! ```text
//! W⁺(n) = 4m(a·k_B·T)²/(πħ³) · e^{2μ/k_BT} · z·K₁(z),   z = μ_n / k_BT
//! ```
//!
//! the loss rate follows from detailed balance,
//! W⁻(n) = W⁺(n)·e^{(μ_n − μ)/k_BT}, and the mean occupation obeys
//! dn/dt = 2W⁺(n)·{(1 − e^{(μ_n − μ)/k_BT})·n + 1}.

use log::warn;

use crate::chem_potential::ChemPotentialModel;
use crate::error::Result;
use crate::model::SimConfig;
use crate::real::Real;
use crate::special::z_k1;

/// Exponents are clamped to this magnitude before `exp`.
pub const EXPONENT_CLAMP: f64 = 700.0;

/// Test hooks that alter the rates in controlled ways. The defaults leave the
/// physics untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateHooks<T> {
    /// Multiplies W⁺ (and with it W⁻).
    pub rate_scale: T,
    /// Forces W⁻ = 0.
    pub disable_loss: bool,
    /// Replaces W⁺(n) by a constant.
    pub constant_w_plus: Option<T>,
}

impl<T: Real> Default for RateHooks<T> {
    fn default() -> Self {
        Self {
            rate_scale: T::one(),
            disable_loss: false,
            constant_w_plus: None,
        }
    }
}

/// Everything needed to evaluate W±(n) for one bath state.
#[derive(Debug, Clone, PartialEq)]
pub struct RateContext<T> {
    pub chem: ChemPotentialModel<T>,
    pub hooks: RateHooks<T>,
    temperature: T,
    mu_bath: T,
    kt: T,
    prefactor: T,
    bath_factor: T,
}

pub(crate) fn clamped_exp<T: Real>(x: T) -> T {
    let limit = T::lit(EXPONENT_CLAMP);
    if x > limit {
        warn!("exponent {} clamped to {}", x.to_f64_lossy(), EXPONENT_CLAMP);
        limit.exp()
    } else if x < -limit {
        warn!("exponent {} clamped to -{}", x.to_f64_lossy(), EXPONENT_CLAMP);
        (-limit).exp()
    } else {
        x.exp()
    }
}

fn clamp_exponent<T: Real>(x: T) -> T {
    let limit = T::lit(EXPONENT_CLAMP);
    if x.abs() > limit {
        warn!("exponent {} clamped to ±{}", x.to_f64_lossy(), EXPONENT_CLAMP);
    }
    x.max(-limit).min(limit)
}

/// 4m(a·k_B·T)²/(πħ³), in s⁻¹. Essentially the elastic collision rate ρσv at
/// the condensation point.
pub fn rate_prefactor<T: Real>(chem: &ChemPotentialModel<T>, temperature: T) -> T {
    let k = &chem.constants;
    let akt = chem.species.scattering_length * k.k_b * temperature;
    T::lit(4.0) * chem.species.mass * akt * akt / (T::PI() * k.hbar * k.hbar * k.hbar)
}

impl<T: Real> RateContext<T> {
    pub fn new(chem: ChemPotentialModel<T>, temperature: T, mu_bath: T) -> Self {
        let kt = chem.constants.k_b * temperature;
        let prefactor = rate_prefactor(&chem, temperature);
        let bath_factor = clamped_exp(T::lit(2.0) * mu_bath / kt);
        Self {
            chem,
            hooks: RateHooks::default(),
            temperature,
            mu_bath,
            kt,
            prefactor,
            bath_factor,
        }
    }

    pub fn from_config(config: &SimConfig<T>) -> Result<Self> {
        let chem = ChemPotentialModel::from_config(config)?;
        Ok(Self::new(
            chem,
            config.bath.temperature,
            config.bath.chemical_potential,
        ))
    }

    /// Same model and hooks at a different bath temperature and chemical potential.
    pub fn with_bath(&self, temperature: T, mu_bath: T) -> Self {
        let mut next = Self::new(self.chem.clone(), temperature, mu_bath);
        next.hooks = self.hooks;
        next
    }

    pub fn with_hooks(mut self, hooks: RateHooks<T>) -> Self {
        self.hooks = hooks;
        self
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn mu_bath(&self) -> T {
        self.mu_bath
    }

    pub fn kt(&self) -> T {
        self.kt
    }

    /// 4m(a·k_B·T)²/(πħ³)
    pub fn prefactor(&self) -> T {
        self.prefactor
    }

    pub fn mu_n(&self, n: T) -> T {
        self.chem.mu_condensate(n)
    }

    /// (μ_n − μ)/k_BT, clamped to ±700.
    pub fn gain_exponent(&self, n: T) -> T {
        clamp_exponent((self.mu_n(n) - self.mu_bath) / self.kt)
    }

    /// Feeding rate W⁺(n), s⁻¹.
    pub fn w_plus(&self, n: T) -> T {
        if let Some(w) = self.hooks.constant_w_plus {
            return w * self.hooks.rate_scale;
        }
        let z = self.mu_n(n) / self.kt;
        let shape = z_k1(z).unwrap_or_else(|_| T::nan());
        self.prefactor * self.bath_factor * shape * self.hooks.rate_scale
    }

    /// Loss rate W⁻(n) = W⁺(n)·e^{(μ_n − μ)/k_BT}, s⁻¹.
    pub fn w_minus(&self, n: T) -> T {
        if self.hooks.disable_loss {
            return T::zero();
        }
        self.w_plus(n) * self.gain_exponent(n).exp()
    }

    /// dn/dt = 2W⁺(n)·{(1 − e^{(μ_n − μ)/k_BT})·n + 1}.
    pub fn net_growth_rate(&self, n: T) -> T {
        let bracket = if self.hooks.disable_loss {
            n + T::one()
        } else {
            T::one() - n * self.gain_exponent(n).exp_m1()
        };
        T::lit(2.0) * self.w_plus(n) * bracket
    }
}
