//! Kinetics of Bose–Einstein condensate formation in a harmonic trap.
//!
//! A condensate mode exchanges atoms with a thermal, Boltzmann-distributed
//! bath. The crate provides
//!
//! * the condensate chemical potential μ_n (Thomas–Fermi with a linear
//!   low-N interpolation) and a Gross–Pitaevskii ground-state solver that
//!   checks it ([`chem_potential`], [`gpe`]);
//! * the analytic feeding rate W⁺(n) ∝ e^{2μ/kT}·zK₁(z), its detailed-balance
//!   partner W⁻(n), and the mean-field growth equation ([`rates`]);
//! * deterministic growth curves from an adaptive Dormand–Prince integrator
//!   ([`growth`], [`ode`]);
//! * exact stochastic simulation of the birth–death master equation and its
//!   stationary law ([`stochastic`]);
//! * a Monte Carlo evaluation of the underlying collision integrals
//!   ([`collision`]);
//! * a truncated-Boltzmann bath with rethermalization and particle/energy
//!   exchange with the condensate ([`bath`]).
//!
//! The analytic parts are generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (SI runs) or `f32` (nondimensional runs only).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod chem_potential;
pub mod collision;
pub mod error;
pub mod gpe;
pub mod growth;
pub mod model;
pub mod ode;
pub mod oracles;
pub mod rates;
pub mod real;
pub mod special;
pub mod stochastic;
pub mod validation;

pub use error::{Error, Result};
pub use model::{
    interaction_strength, validate_config, BathMode, BathState, ConfigViolation,
    PhysicalConstants, SimConfig, SolverSettings, Species, Trap,
};
pub use real::Real;

pub type Species64 = model::Species<f64>;
pub type Trap64 = model::Trap<f64>;
pub type BathState64 = model::BathState<f64>;
pub type SimConfig64 = model::SimConfig<f64>;
pub type ChemPotentialModel64 = chem_potential::ChemPotentialModel<f64>;
pub type RateContext64 = rates::RateContext<f64>;
pub type GrowthTrajectory64 = growth::GrowthTrajectory<f64>;
pub type TruncatedBath64 = bath::TruncatedBath<f64>;

pub type Species32 = model::Species<f32>;
pub type Trap32 = model::Trap<f32>;
pub type BathState32 = model::BathState<f32>;
pub type SimConfig32 = model::SimConfig<f32>;
pub type ChemPotentialModel32 = chem_potential::ChemPotentialModel<f32>;
pub type RateContext32 = rates::RateContext<f32>;
pub type GrowthTrajectory32 = growth::GrowthTrajectory<f32>;
pub type TruncatedBath32 = bath::TruncatedBath<f32>;
