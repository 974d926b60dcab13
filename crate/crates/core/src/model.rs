//! Physical constants, species, trap and bath descriptions, and run configuration.
//!
//! Everything is SI: kilograms, metres, seconds, kelvin, joules, and angular
//! frequencies in rad/s. Unit conversion from laboratory units (nK, Hz, nm)
//! happens at the command-line boundary.

use std::fmt;

use crate::real::Real;

/// Reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B_SI: f64 = 1.380_649e-23;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of ⁸⁷Rb in atomic mass units.
pub const RB87_MASS_AMU: f64 = 86.909_180_527;
/// Mass of ²³Na in atomic mass units.
pub const NA23_MASS_AMU: f64 = 22.989_769_282;
/// s-wave scattering length of ⁸⁷Rb used for the rubidium growth curve, m.
pub const RB87_SCATTERING_LENGTH: f64 = 5.71e-9;
/// s-wave scattering length of ²³Na used for the sodium growth curve, m.
pub const NA23_SCATTERING_LENGTH: f64 = 2.75e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    /// J·s
    pub hbar: T,
    /// J/K
    pub k_b: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn si() -> Self {
        Self {
            hbar: T::lit(HBAR_SI),
            k_b: T::lit(K_B_SI),
        }
    }

    /// ħ = k_B = 1, for nondimensionalized runs.
    pub fn unit() -> Self {
        Self {
            hbar: T::one(),
            k_b: T::one(),
        }
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::si()
    }
}

/// An atomic species with repulsive contact interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct Species<T> {
    pub label: String,
    /// kg
    pub mass: T,
    /// m
    pub scattering_length: T,
}

impl<T: Real> Species<T> {
    pub fn new(label: impl Into<String>, mass: T, scattering_length: T) -> Self {
        Self {
            label: label.into(),
            mass,
            scattering_length,
        }
    }

    /// ⁸⁷Rb with a = 5.71 nm. The mass is the standard atomic mass, not part of
    /// the growth model itself.
    pub fn rb87() -> Self {
        Self::new(
            "rb87",
            T::lit(RB87_MASS_AMU * ATOMIC_MASS_UNIT),
            T::lit(RB87_SCATTERING_LENGTH),
        )
    }

    /// ²³Na with a = 2.75 nm.
    pub fn na23() -> Self {
        Self::new(
            "na23",
            T::lit(NA23_MASS_AMU * ATOMIC_MASS_UNIT),
            T::lit(NA23_SCATTERING_LENGTH),
        )
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "rb87" => Some(Self::rb87()),
            "na23" => Some(Self::na23()),
            _ => None,
        }
    }
}

/// Contact interaction strength u = 4πaħ²/m, in J·m³.
pub fn interaction_strength<T: Real>(species: &Species<T>, constants: &PhysicalConstants<T>) -> T {
    T::lit(4.0) * T::PI() * species.scattering_length * constants.hbar * constants.hbar
        / species.mass
}

/// Harmonic trap V(x) = m(ωx²x² + ωy²y² + ωz²z²)/2 with V(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trap<T> {
    pub omega_x: T,
    pub omega_y: T,
    pub omega_z: T,
}

impl<T: Real> Trap<T> {
    pub fn new(omega_x: T, omega_y: T, omega_z: T) -> Self {
        Self {
            omega_x,
            omega_y,
            omega_z,
        }
    }

    pub fn isotropic(omega: T) -> Self {
        Self::new(omega, omega, omega)
    }

    /// Trap from ordinary frequencies in Hz.
    pub fn from_hz(fx: T, fy: T, fz: T) -> Self {
        let two_pi = T::TAU();
        Self::new(two_pi * fx, two_pi * fy, two_pi * fz)
    }

    /// ωx·ωy·ωz
    pub fn omega_product(&self) -> T {
        self.omega_x * self.omega_y * self.omega_z
    }

    pub fn omega_sum(&self) -> T {
        self.omega_x + self.omega_y + self.omega_z
    }

    /// Geometric-mean frequency ω̄ = (ωxωyωz)^{1/3}.
    pub fn omega_bar(&self) -> T {
        self.omega_product().cbrt()
    }

    /// Rescales all three frequencies so the geometric mean becomes `omega_bar`.
    pub fn with_omega_bar(&self, omega_bar: T) -> Self {
        let s = omega_bar / self.omega_bar();
        Self::new(self.omega_x * s, self.omega_y * s, self.omega_z * s)
    }
}

/// How the noncondensate bath responds to condensate growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BathMode {
    /// T and μ held fixed.
    Static,
    /// Atoms and energy exchanged with the condensate, bath re-fitted each step.
    Depleting,
}

impl BathMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BathMode::Static => "static",
            BathMode::Depleting => "depleting",
        }
    }
}

impl std::str::FromStr for BathMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(BathMode::Static),
            "depleting" => Ok(BathMode::Depleting),
            other => Err(format!("unknown bath mode '{other}' (expected static|depleting)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathState<T> {
    /// K
    pub temperature: T,
    /// J
    pub chemical_potential: T,
    /// Evaporation cut in units of k_B·T.
    pub eta: T,
    pub mode: BathMode,
}

impl<T: Real> BathState<T> {
    pub fn new(temperature: T, chemical_potential: T, eta: T, mode: BathMode) -> Self {
        Self {
            temperature,
            chemical_potential,
            eta,
            mode,
        }
    }

    pub fn kt(&self, constants: &PhysicalConstants<T>) -> T {
        constants.k_b * self.temperature
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Number of evenly spaced output samples including t = 0 and t_end.
    pub samples: usize,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-8),
            atol: T::lit(1e-8),
            max_steps: 10_000_000,
            samples: 1001,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub constants: PhysicalConstants<T>,
    pub species: Species<T>,
    pub trap: Trap<T>,
    pub bath: BathState<T>,
    pub n_initial: T,
    /// s
    pub t_end: T,
    pub solver: SolverSettings<T>,
    pub seed: u64,
    /// Upper anchor of the low-N interpolation of μ_n, as a multiple of μ(0).
    pub crossover_factor: T,
    /// Total atom number for depleting-bath runs. When set, the initial bath
    /// chemical potential is derived from it instead of `bath.chemical_potential`.
    pub total_atoms: Option<T>,
    /// Permit μ < 0 (latency studies). The growth equation is well defined there.
    pub allow_negative_mu: bool,
}

impl<T: Real> SimConfig<T> {
    pub fn new(species: Species<T>, trap: Trap<T>, bath: BathState<T>, t_end: T) -> Self {
        Self {
            constants: PhysicalConstants::si(),
            species,
            trap,
            bath,
            n_initial: T::zero(),
            t_end,
            solver: SolverSettings::default(),
            seed: 0,
            crossover_factor: T::lit(2.0),
            total_atoms: None,
            allow_negative_mu: false,
        }
    }
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Checks every invariant and returns either the config unchanged or the full
/// list of violations.
pub fn validate_config<T: Real>(config: SimConfig<T>) -> Result<SimConfig<T>, Vec<ConfigViolation>> {
    let mut v = Vec::new();
    let mut bad = |field: &str, message: String| {
        v.push(ConfigViolation {
            field: field.to_string(),
            message,
        })
    };
    // Written as !(x > 0) so NaN is rejected as well.
    let positive = |x: T| x > T::zero() && x.is_finite();

    if !positive(config.constants.hbar) {
        bad("constants.hbar", "hbar must be positive".into());
    }
    if !positive(config.constants.k_b) {
        bad("constants.k_b", "k_B must be positive".into());
    }
    if !positive(config.species.mass) {
        bad("species.mass", "mass must be positive".into());
    }
    if !positive(config.species.scattering_length) {
        bad(
            "species.scattering_length",
            "scattering_length must be positive (repulsive interactions only)".into(),
        );
    }
    for (name, w) in [
        ("trap.omega_x", config.trap.omega_x),
        ("trap.omega_y", config.trap.omega_y),
        ("trap.omega_z", config.trap.omega_z),
    ] {
        if !positive(w) {
            bad(name, "trap frequency must be positive".into());
        }
    }
    let bath = &config.bath;
    if !positive(bath.temperature) {
        bad("bath.temperature", "temperature must be positive".into());
    }
    if !positive(bath.eta) {
        bad("bath.eta", "eta must be positive".into());
    }
    let mu = bath.chemical_potential;
    if !mu.is_finite() {
        bad("bath.chemical_potential", "chemical_potential must be finite".into());
    } else {
        if mu < T::zero() && !config.allow_negative_mu {
            bad(
                "bath.chemical_potential",
                "chemical_potential must be nonnegative (set allow_negative_mu to override)".into(),
            );
        }
        let cut = bath.eta * config.constants.k_b * bath.temperature;
        if positive(bath.temperature) && positive(bath.eta) && !(mu < cut) {
            bad(
                "bath.chemical_potential",
                format!(
                    "chemical_potential exceeds cut: {:e} J >= eta*k_B*T = {:e} J",
                    mu.to_f64_lossy(),
                    cut.to_f64_lossy()
                ),
            );
        }
    }
    if !(config.n_initial >= T::zero() && config.n_initial.is_finite()) {
        bad("n_initial", "n_initial must be nonnegative".into());
    }
    if !positive(config.t_end) {
        bad("t_end", "t_end must be positive".into());
    }
    if !positive(config.solver.rtol) {
        bad("solver.rtol", "rtol must be positive".into());
    }
    if !positive(config.solver.atol) {
        bad("solver.atol", "atol must be positive".into());
    }
    if config.solver.samples < 2 {
        bad("solver.samples", "samples must be at least 2".into());
    }
    if config.solver.max_steps == 0 {
        bad("solver.max_steps", "max_steps must be positive".into());
    }
    if !(config.crossover_factor > T::one() && config.crossover_factor.is_finite()) {
        bad("crossover_factor", "crossover_factor must exceed 1".into());
    }
    if let Some(total) = config.total_atoms {
        if !(total > config.n_initial && total.is_finite()) {
            bad("total_atoms", "total_atoms must exceed n_initial".into());
        }
    }

    if v.is_empty() {
        Ok(config)
    } else {
        Err(v)
    }
}
