//! CSV emission and run manifests.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bec_kinetics::growth::{GrowthMilestones, GrowthTrajectory};
use bec_kinetics::stochastic::{EnsembleStats, Event, Direction};
use serde::Serialize;

use crate::config::Scenario;

/// Bumped whenever a column is added, removed or reordered.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t_s", "n", "mu_n_J", "w_plus_per_s", "bath_T_K", "bath_mu_J"];
pub const DEPLETING_COLUMNS: [&str; 3] = ["bath_N", "bath_E_J", "energy_to_condensate_J"];
pub const MILESTONE_COLUMNS: [&str; 7] = [
    "latency_s",
    "t10_s",
    "t90_s",
    "growth_time_s",
    "saturation_n",
    "stationary_n",
    "saturation_reached",
];

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), num)
}

pub fn create(path: &Path) -> io::Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn write_trajectory<W: Write + ?Sized>(w: &mut W, traj: &GrowthTrajectory<f64>) -> io::Result<()> {
    let coupled = traj.is_coupled();
    let mut header = TRAJECTORY_COLUMNS.join(",");
    if coupled {
        header.push(',');
        header.push_str(&DEPLETING_COLUMNS.join(","));
    }
    writeln!(w, "{header}")?;
    for s in &traj.samples {
        write!(
            w,
            "{},{},{},{},{},{}",
            num(s.t),
            num(s.n),
            num(s.mu_n),
            num(s.w_plus),
            num(s.bath_temperature),
            num(s.bath_mu)
        )?;
        if coupled {
            let m = s.bath_moments.expect("coupled samples carry moments");
            write!(w, ",{},{},{}", num(m.atoms), num(m.energy), num(s.energy_to_condensate))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn milestone_fields(m: &GrowthMilestones<f64>, stationary_n: Option<f64>) -> [String; 7] {
    [
        opt(m.latency_time),
        opt(m.t10),
        opt(m.t90),
        opt(m.growth_time_10_90),
        num(m.saturation_n),
        opt(stationary_n),
        m.saturation_reached.to_string(),
    ]
}

pub fn write_milestones<W: Write + ?Sized>(w: &mut W, m: &GrowthMilestones<f64>, stationary_n: Option<f64>) -> io::Result<()> {
    writeln!(w, "{}", MILESTONE_COLUMNS.join(","))?;
    writeln!(w, "{}", milestone_fields(m, stationary_n).join(","))
}

pub fn write_events<W: Write + ?Sized>(w: &mut W, events: &[Event]) -> io::Result<()> {
    writeln!(w, "t_s,n,direction")?;
    for e in events {
        let d = match e.direction {
            Direction::Birth => "birth",
            Direction::Death => "death",
        };
        writeln!(w, "{},{},{d}", num(e.t), e.n)?;
    }
    Ok(())
}

pub fn write_ssa_path<W: Write + ?Sized>(w: &mut W, times: &[f64], n: &[u64]) -> io::Result<()> {
    writeln!(w, "t_s,n")?;
    for (t, n) in times.iter().zip(n) {
        writeln!(w, "{},{n}", num(*t))?;
    }
    Ok(())
}

/// Ensemble moments and quantile bands, with the matching mean-field curve.
pub fn write_ensemble<W: Write + ?Sized>(w: &mut W, stats: &EnsembleStats, ode: &[f64]) -> io::Result<()> {
    writeln!(w, "t_s,mean,variance,q05,q25,q50,q75,q95,ode_n")?;
    for i in 0..stats.times.len() {
        let b = stats.bands[i];
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            num(stats.times[i]),
            num(stats.mean[i]),
            num(stats.variance[i]),
            num(b[0]),
            num(b[1]),
            num(b[2]),
            num(b[3]),
            num(b[4]),
            num(ode[i])
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub missing: u64,
}

/// Equal-width histogram of the defined latencies; `missing` counts
/// trajectories that never reached the threshold.
pub fn latency_histogram(latencies: &[Option<f64>], bins: usize) -> Histogram {
    let values: Vec<f64> = latencies.iter().flatten().copied().collect();
    let missing = (latencies.len() - values.len()) as u64;
    if values.is_empty() || bins == 0 {
        return Histogram {
            edges: vec![],
            counts: vec![],
            missing,
        };
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + lo.abs().max(1e-300);
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Histogram { edges, counts, missing }
}

pub fn write_histogram<W: Write + ?Sized>(w: &mut W, h: &Histogram) -> io::Result<()> {
    writeln!(w, "bin_lo_s,bin_hi_s,count")?;
    for (i, c) in h.counts.iter().enumerate() {
        writeln!(w, "{},{},{c}", num(h.edges[i]), num(h.edges[i + 1]))?;
    }
    Ok(())
}

/// Everything needed to rerun a command: the filled-in scenario plus a
/// `[manifest]` table describing the run.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub seed_generated: bool,
    pub outputs: Vec<PathBuf>,
    pub extra: toml::Table,
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'a str,
    version: &'a str,
    csv_schema: u32,
    subcommand: &'a str,
    args: &'a [String],
    seed: u64,
    seed_generated: bool,
    timestamp_unix_s: u64,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &str, seed: u64, seed_generated: bool) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            args: std::env::args().skip(1).collect(),
            seed,
            seed_generated,
            outputs: Vec::new(),
            extra: toml::Table::new(),
        }
    }

    pub fn record(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.extra.insert(key.to_string(), value.into());
    }

    pub fn render(&self, scenario: Option<&Scenario>) -> Result<String, toml::ser::Error> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let header = Header {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            csv_schema: CSV_SCHEMA_VERSION,
            subcommand: &self.subcommand,
            args: &self.args,
            seed: self.seed,
            seed_generated: self.seed_generated,
            timestamp_unix_s: timestamp,
            outputs: self
                .outputs
                .iter()
                .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned()))
                .collect(),
        };
        let mut table = toml::Table::try_from(header)?;
        if !self.extra.is_empty() {
            table.insert("run".into(), toml::Value::Table(self.extra.clone()));
        }
        match scenario {
            Some(s) => {
                let mut s = s.clone();
                s.manifest = Some(table);
                toml::to_string(&s)
            }
            None => {
                let mut root = toml::Table::new();
                root.insert("manifest".into(), toml::Value::Table(table));
                toml::to_string(&root)
            }
        }
    }

    pub fn write(&self, dir: &Path, scenario: Option<&Scenario>) -> io::Result<PathBuf> {
        let path = dir.join("manifest.toml");
        let text = self
            .render(scenario)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        let mut w = create(&path)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = num(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn histogram_counts_everything() {
        let lat = [Some(1.0), Some(2.0), None, Some(3.0), Some(3.0)];
        let h = latency_histogram(&lat, 4);
        assert_eq!(h.counts.iter().sum::<u64>(), 4);
        assert_eq!(h.missing, 1);
        assert_eq!(*h.counts.last().unwrap(), 2);
        let h = latency_histogram(&[Some(1.0); 3], 2);
        assert_eq!(h.counts, vec![3, 0]);
    }

    #[test]
    fn manifest_parses_as_scenario() {
        let mut s = Scenario::default();
        s.fill_defaults(|| 3);
        let mut m = Manifest::new("grow", 3, true);
        m.outputs.push(PathBuf::from("out/trajectory.csv"));
        m.record("n_stationary", 1.5);
        let text = m.render(Some(&s)).unwrap();
        let back = crate::config::parse(&text).unwrap();
        assert_eq!(back.solver, s.solver);
        let head = back.manifest.unwrap();
        assert_eq!(head["outputs"].as_array().unwrap()[0].as_str(), Some("trajectory.csv"));
        assert_eq!(head["seed_generated"].as_bool(), Some(true));
    }
}
