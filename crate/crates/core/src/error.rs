use thiserror::Error;

use crate::model::ConfigViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no macroscopic condensate in equilibrium: bath chemical potential {mu_bath:e} J does not exceed the noninteracting value {mu_zero:e} J")]
    NoEquilibriumCondensate { mu_bath: f64, mu_zero: f64 },

    #[error("step size underflow at t = {t:e} s (n = {n:e}, h = {h:e} s)")]
    StepSizeUnderflow { t: f64, n: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t:e} s")]
    TooManySteps { max_steps: usize, t: f64 },

    #[error("ground state did not converge after {iterations} iterations (residual norm {residual:e})")]
    GpeNotConverged { iterations: usize, residual: f64 },

    #[error("effective sample size {ess:.1} below threshold {threshold:.1}; increase the sample count")]
    InsufficientSamples { ess: f64, threshold: f64 },

    #[error("stationary distribution tail mass {tail:e} exceeds 1e-12; increase N_max beyond {n_max}")]
    TailMassTooLarge { tail: f64, n_max: u64 },

    #[error("bath update failed: {reason} (N_nc = {atoms:e}, E_nc = {energy:e} J)")]
    BathFit {
        reason: String,
        atoms: f64,
        energy: f64,
    },
}

fn format_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
