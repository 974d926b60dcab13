//! Condensate chemical potential μ_n.
//!
//! Large condensates follow the Thomas–Fermi law
//! μ_TF(n) = (15·n·u·ωxωyωz·m^{3/2} / (16π√2))^{2/5}. Towards n = 0 the model
//! switches to a straight line that starts at the noninteracting value
//! μ(0) = ħ(ωx+ωy+ωz)/2 and joins the Thomas–Fermi curve at the crossover count
//! N_x, defined by μ_TF(N_x) = f·μ(0) with f = 2 unless configured otherwise.

use crate::error::{Error, Result};
use crate::model::{interaction_strength, PhysicalConstants, SimConfig, Species, Trap};
use crate::real::Real;

/// ħ(ωx+ωy+ωz)/2
pub fn mu_noninteracting<T: Real>(trap: &Trap<T>, constants: &PhysicalConstants<T>) -> T {
    constants.hbar * trap.omega_sum() / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChemPotentialModel<T> {
    pub species: Species<T>,
    pub trap: Trap<T>,
    pub constants: PhysicalConstants<T>,
    interaction: T,
    mu_zero: T,
    /// μ_TF(n) = tf_coeff · n^{2/5}
    tf_coeff: T,
    crossover_factor: T,
    crossover_count: T,
    crossover_mu: T,
}

impl<T: Real> ChemPotentialModel<T> {
    /// Model with the default crossover μ_TF(N_x) = 2μ(0).
    pub fn new(species: Species<T>, trap: Trap<T>, constants: PhysicalConstants<T>) -> Self {
        Self::with_crossover_factor(species, trap, constants, T::lit(2.0))
            .expect("factor 2 is a valid crossover")
    }

    pub fn with_crossover_factor(
        species: Species<T>,
        trap: Trap<T>,
        constants: PhysicalConstants<T>,
        factor: T,
    ) -> Result<Self> {
        if !(factor > T::one()) {
            return Err(Error::Domain(format!(
                "crossover factor must exceed 1, got {}",
                factor.to_f64_lossy()
            )));
        }
        let interaction = interaction_strength(&species, &constants);
        let mu_zero = mu_noninteracting(&trap, &constants);
        let tf_base = T::lit(15.0) * interaction * trap.omega_product() * species.mass.powf(T::lit(1.5))
            / (T::lit(16.0) * T::PI() * T::SQRT_2());
        let tf_coeff = tf_base.powf(T::lit(0.4));
        let mut model = Self {
            species,
            trap,
            constants,
            interaction,
            mu_zero,
            tf_coeff,
            crossover_factor: factor,
            crossover_count: T::zero(),
            crossover_mu: T::zero(),
        };
        model.crossover_count = model.n_equilibrium(factor * mu_zero)?;
        model.crossover_mu = model.mu_thomas_fermi(model.crossover_count);
        Ok(model)
    }

    pub fn from_config(config: &SimConfig<T>) -> Result<Self> {
        Self::with_crossover_factor(
            config.species.clone(),
            config.trap,
            config.constants,
            config.crossover_factor,
        )
    }

    /// u = 4πaħ²/m
    pub fn interaction(&self) -> T {
        self.interaction
    }

    pub fn crossover_count(&self) -> T {
        self.crossover_count
    }

    pub fn crossover_factor(&self) -> T {
        self.crossover_factor
    }

    /// μ(0) = ħ(ωx+ωy+ωz)/2
    pub fn mu_noninteracting(&self) -> T {
        self.mu_zero
    }

    pub fn mu_thomas_fermi(&self, n: T) -> T {
        if n <= T::zero() {
            return T::zero();
        }
        self.tf_coeff * n.powf(T::lit(0.4))
    }

    /// μ_n used by the growth model: Thomas–Fermi above N_x, linear below.
    pub fn mu_condensate(&self, n: T) -> T {
        let n = n.max(T::zero());
        if n >= self.crossover_count {
            self.mu_thomas_fermi(n)
        } else {
            self.mu_zero + (self.crossover_mu - self.mu_zero) * (n / self.crossover_count)
        }
    }

    /// Slope dμ_n/dn of [`mu_condensate`](Self::mu_condensate).
    pub fn mu_condensate_slope(&self, n: T) -> T {
        let n = n.max(T::zero());
        if n >= self.crossover_count {
            T::lit(0.4) * self.mu_thomas_fermi(n) / n
        } else {
            (self.crossover_mu - self.mu_zero) / self.crossover_count
        }
    }

    /// Atom number n* with μ_TF(n*) = μ:
    /// n* = 16π√2·μ^{5/2} / (15·u·ωxωyωz·m^{3/2}).
    pub fn n_equilibrium(&self, mu_bath: T) -> Result<T> {
        if !(mu_bath > self.mu_zero) {
            return Err(Error::NoEquilibriumCondensate {
                mu_bath: mu_bath.to_f64_lossy(),
                mu_zero: self.mu_zero.to_f64_lossy(),
            });
        }
        Ok(T::lit(16.0) * T::PI() * T::SQRT_2() * mu_bath.powf(T::lit(2.5))
            / (T::lit(15.0)
                * self.interaction
                * self.trap.omega_product()
                * self.species.mass.powf(T::lit(1.5))))
    }
}
