use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "bec-kinetics", version, about = "Condensate growth kinetics in a harmonic trap")]
pub struct Cli {
    /// Worker threads for ensembles and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the mean-field growth equation.
    Grow(GrowArgs),
    /// Exact stochastic trajectories of the birth-death master equation.
    Ssa(SsaArgs),
    /// Run oracle suites and report a pass/fail table.
    Validate(ValidateArgs),
    /// Growth milestones over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario TOML file (a previous manifest.toml works too).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Species preset: rb87 or na23.
    #[arg(long)]
    pub preset: Option<String>,
    /// Bath temperature, nK.
    #[arg(long = "temp-nK", allow_negative_numbers = true)]
    pub temp_nk: Option<f64>,
    /// Bath chemical potential in units of k_B T.
    #[arg(long = "mu-frac-kT", allow_negative_numbers = true)]
    pub mu_frac_kt: Option<f64>,
    /// Evaporation cut in units of k_B T.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Bath mode: static or depleting.
    #[arg(long)]
    pub bath: Option<String>,
    /// Total atom number (depleting bath).
    #[arg(long)]
    pub ntotal: Option<f64>,
    /// Isotropic trap frequency, Hz (sets all three axes).
    #[arg(long = "trap-hz")]
    pub trap_hz: Option<f64>,
    /// Integration end time, s.
    #[arg(long = "t-end-s")]
    pub t_end_s: Option<f64>,
    /// Initial condensate number.
    #[arg(long = "n-initial")]
    pub n_initial: Option<f64>,
    /// Output samples on [0, t_end].
    #[arg(long)]
    pub points: Option<u64>,
    /// Generator seed (0 to 2^63-1); generated and recorded when absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(0..=i64::MAX as u64))]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip SVG plots.
    #[arg(long = "no-svg")]
    pub no_svg: bool,
}

impl ScenarioArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            preset: self.preset.clone(),
            temp_nk: self.temp_nk,
            mu_frac_kt: self.mu_frac_kt,
            eta: self.eta,
            bath: self.bath.clone(),
            total_atoms: self.ntotal,
            trap_hz: self.trap_hz,
            t_end_s: self.t_end_s,
            n_initial: self.n_initial,
            points: self.points,
            seed: self.seed,
            out: self.out.clone(),
            no_svg: self.no_svg,
        }
    }
}

#[derive(Debug, Args)]
pub struct GrowArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Args)]
pub struct SsaArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of trajectories; 1 writes the full event log.
    #[arg(long, default_value_t = 100)]
    pub trajectories: usize,
    /// Bins of the latency histogram.
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// bessel, cut-fractions, detailed-balance, collision-mc, gpe, retherm or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Monte Carlo samples per smearing width (collision-mc), e.g. 1e6.
    #[arg(long, default_value_t = 1e6)]
    pub samples: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(0..=i64::MAX as u64))]
    pub seed: u64,
    /// Write validation.csv, validation.svg and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// NAME=SPEC with NAME in temp_nK, mu_frac_kT, eta, a_nm, trap_hz and
    /// SPEC a list "a,b,c" or a range "start:stop:count". Repeatable; the
    /// first one varies slowest.
    #[arg(long = "vary", required = true)]
    pub vary: Vec<String>,
    /// Refuse grids with more points than this.
    #[arg(long = "max-points", default_value_t = 10_000)]
    pub max_points: usize,
}
