//! Scenario files and flag overrides.
//!
//! A scenario is a TOML file with flat sections and units in the key names.
//! Unknown keys are rejected. Every field is optional in the file; after
//! flags and defaults are applied the filled-in scenario is written back into
//! the run manifest, so a manifest can be passed to `--config` to rerun.

use std::path::{Path, PathBuf};

use bec_kinetics::bath::TruncatedBath;
use bec_kinetics::model::{ATOMIC_MASS_UNIT, K_B_SI};
use bec_kinetics::{validate_config, BathMode, BathState, SimConfig, SolverSettings, Species, Trap};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TRAP_HZ: f64 = 100.0;
pub const DEFAULT_ETA: f64 = 5.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Written by the tool; ignored when read back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<toml::Table>,
    #[serde(default)]
    pub species: SpeciesSection,
    #[serde(default)]
    pub trap: TrapSection,
    #[serde(default)]
    pub bath: BathSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub preset: Option<String>,
    pub mass_amu: Option<f64>,
    pub scattering_length_nm: Option<f64>,
}

/// Ordinary trap frequencies f = ω/2π.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub omega_x_hz: Option<f64>,
    pub omega_y_hz: Option<f64>,
    pub omega_z_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(rename = "temp_nK")]
    pub temp_nk: Option<f64>,
    /// μ/k_BT
    #[serde(rename = "mu_frac_kT")]
    pub mu_frac_kt: Option<f64>,
    /// μ/k_B in nK; alternative to mu_frac_kT.
    #[serde(rename = "mu_nK")]
    pub mu_nk: Option<f64>,
    pub eta: Option<f64>,
    /// "static" or "depleting"
    pub mode: Option<String>,
    /// Condensate plus bath atoms; depleting mode only.
    pub total_atoms: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub t_end_s: Option<f64>,
    pub n_initial: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<u64>,
    /// Output samples including both ends.
    pub points: Option<u64>,
    pub crossover_factor: Option<f64>,
    pub allow_negative_mu: Option<bool>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub svg: Option<bool>,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<String>,
    pub temp_nk: Option<f64>,
    pub mu_frac_kt: Option<f64>,
    pub eta: Option<f64>,
    pub bath: Option<String>,
    pub total_atoms: Option<f64>,
    pub trap_hz: Option<f64>,
    pub t_end_s: Option<f64>,
    pub n_initial: Option<f64>,
    pub points: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_svg: bool,
}

pub fn load(path: &Path) -> Result<Scenario, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    parse(&text).map_err(|e| vec![format!("{}: {}", path.display(), e[0])])
}

pub fn parse(text: &str) -> Result<Scenario, Vec<String>> {
    toml::from_str(text).map_err(|e| vec![e.message().to_string()])
}

fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

impl Scenario {
    pub fn apply(&mut self, o: &Overrides) {
        set(&mut self.species.preset, &o.preset);
        set(&mut self.bath.temp_nk, &o.temp_nk);
        if o.mu_frac_kt.is_some() {
            self.bath.mu_frac_kt = o.mu_frac_kt;
            self.bath.mu_nk = None;
        }
        set(&mut self.bath.eta, &o.eta);
        set(&mut self.bath.mode, &o.bath);
        set(&mut self.bath.total_atoms, &o.total_atoms);
        if let Some(f) = o.trap_hz {
            self.trap = TrapSection {
                omega_x_hz: Some(f),
                omega_y_hz: Some(f),
                omega_z_hz: Some(f),
            };
        }
        set(&mut self.solver.t_end_s, &o.t_end_s);
        set(&mut self.solver.n_initial, &o.n_initial);
        set(&mut self.solver.points, &o.points);
        set(&mut self.solver.seed, &o.seed);
        set(&mut self.output.dir, &o.out);
        if o.no_svg {
            self.output.svg = Some(false);
        }
    }

    /// Fills every defaulted field so the scenario is self-describing.
    /// Returns whether the seed had to be generated.
    pub fn fill_defaults(&mut self, fresh_seed: impl FnOnce() -> u64) -> bool {
        let t = &mut self.trap;
        for f in [&mut t.omega_x_hz, &mut t.omega_y_hz, &mut t.omega_z_hz] {
            f.get_or_insert(DEFAULT_TRAP_HZ);
        }
        self.bath.eta.get_or_insert(DEFAULT_ETA);
        self.bath.mode.get_or_insert_with(|| "static".into());
        let d = SolverSettings::<f64>::default();
        let s = &mut self.solver;
        s.n_initial.get_or_insert(0.0);
        s.rtol.get_or_insert(d.rtol);
        s.atol.get_or_insert(d.atol);
        s.max_steps.get_or_insert(d.max_steps as u64);
        s.points.get_or_insert(d.samples as u64);
        s.crossover_factor.get_or_insert(2.0);
        s.allow_negative_mu.get_or_insert(false);
        self.output.dir.get_or_insert_with(|| PathBuf::from("."));
        self.output.svg.get_or_insert(true);
        let generated = s.seed.is_none();
        s.seed.get_or_insert_with(fresh_seed);
        generated
    }

    pub fn mode(&self) -> Result<BathMode, String> {
        self.bath.mode.as_deref().unwrap_or("static").parse()
    }

    pub fn species(&self) -> Result<Species<f64>, String> {
        let s = &self.species;
        let mut species = match &s.preset {
            Some(name) => Species::preset(name).ok_or_else(|| format!("species.preset: unknown preset '{name}' (expected rb87|na23)"))?,
            None => match (s.mass_amu, s.scattering_length_nm) {
                (Some(_), Some(_)) => Species::new("custom", 0.0, 0.0),
                _ => return Err("species: give a preset or both mass_amu and scattering_length_nm".into()),
            },
        };
        if let Some(m) = s.mass_amu {
            species.mass = m * ATOMIC_MASS_UNIT;
        }
        if let Some(a) = s.scattering_length_nm {
            species.scattering_length = a * 1e-9;
        }
        Ok(species)
    }

    /// The core configuration, checked by `validate_config`. Call after
    /// `fill_defaults`.
    pub fn to_sim_config(&self) -> Result<SimConfig<f64>, Vec<String>> {
        let mut errors = Vec::new();
        let species = self.species().map_err(|e| errors.push(e)).ok();
        let mode = self.mode().map_err(|e| errors.push(format!("bath.mode: {e}"))).ok();
        let t = &self.trap;
        let trap = Trap::from_hz(
            t.omega_x_hz.unwrap_or(DEFAULT_TRAP_HZ),
            t.omega_y_hz.unwrap_or(DEFAULT_TRAP_HZ),
            t.omega_z_hz.unwrap_or(DEFAULT_TRAP_HZ),
        );
        let temperature = match self.bath.temp_nk {
            Some(x) => x * 1e-9,
            None => {
                errors.push("bath.temp_nK: required (--temp-nK)".into());
                f64::NAN
            }
        };
        let total_atoms = self.bath.total_atoms;
        if total_atoms.is_some() && mode != Some(BathMode::Depleting) {
            errors.push("bath.total_atoms: only meaningful with mode = \"depleting\"".into());
        }
        let t_end = self.solver.t_end_s.unwrap_or_else(|| {
            errors.push("solver.t_end_s: required (--t-end-s)".into());
            f64::NAN
        });
        if self.bath.mu_frac_kt.is_some() && self.bath.mu_nk.is_some() {
            errors.push("bath: give only one of mu_frac_kT and mu_nK".into());
        }
        let eta = self.bath.eta.unwrap_or(DEFAULT_ETA);
        let n_initial = self.solver.n_initial.unwrap_or(0.0);
        let mu = match (total_atoms, self.bath.mu_frac_kt, self.bath.mu_nk) {
            (Some(total), given_f, given_nk) if temperature.is_finite() => {
                if given_f.is_some() || given_nk.is_some() {
                    log::warn!("bath.total_atoms set: chemical potential is derived from it, the given value is ignored");
                }
                match TruncatedBath::with_atoms(temperature, total - n_initial, eta, &trap, Default::default()) {
                    Ok(b) => b.chemical_potential,
                    Err(e) => {
                        errors.push(format!("bath.total_atoms: {e}"));
                        f64::NAN
                    }
                }
            }
            (None, Some(f), _) => f * K_B_SI * temperature,
            (None, None, Some(x)) => x * 1e-9 * K_B_SI,
            (None, None, None) => {
                errors.push("bath: chemical potential required (--mu-frac-kT, mu_nK or total_atoms)".into());
                f64::NAN
            }
            _ => f64::NAN,
        };
        if !errors.is_empty() {
            return Err(errors);
        }
        let (species, mode) = (species.unwrap(), mode.unwrap());
        let s = &self.solver;
        let defaults = SolverSettings::<f64>::default();
        let mut config = SimConfig::new(species, trap, BathState::new(temperature, mu, eta, mode), t_end);
        config.n_initial = n_initial;
        config.solver = SolverSettings {
            rtol: s.rtol.unwrap_or(defaults.rtol),
            atol: s.atol.unwrap_or(defaults.atol),
            max_steps: s.max_steps.map_or(defaults.max_steps, |x| x as usize),
            samples: s.points.map_or(defaults.samples, |x| x as usize),
        };
        config.seed = s.seed.unwrap_or(0);
        config.crossover_factor = s.crossover_factor.unwrap_or(2.0);
        config.allow_negative_mu = s.allow_negative_mu.unwrap_or(false);
        config.total_atoms = total_atoms;
        validate_config(config).map_err(|v| v.iter().map(|x| x.to_string()).collect())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn svg(&self) -> bool {
        self.output.svg.unwrap_or(true)
    }

    pub fn seed(&self) -> u64 {
        self.solver.seed.unwrap_or(0)
    }
}
