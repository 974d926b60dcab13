use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bec_kinetics::bath::BathCoupling;
use bec_kinetics::growth::{extract_milestones, integrate_growth, stationary_point, GrowthMilestones, DEFAULT_SEED_THRESHOLD};
use bec_kinetics::rates::RateContext;
use bec_kinetics::stochastic::{ensemble, ssa_trajectory, BirthDeathChain, SsaOptions};
use bec_kinetics::validation::{run_suite, Suite, ValidationOptions, ValidationRow};
use bec_kinetics::{BathMode, GrowthTrajectory64, SimConfig64};
use rayon::prelude::*;

use crate::args::{GrowArgs, ScenarioArgs, SsaArgs, SweepArgs, ValidateArgs};
use crate::config::{self, Scenario};
use crate::output::{self, Manifest};
use crate::svg::{self, Series};
use crate::{CliError, CliResult};

pub struct Resolved {
    pub scenario: Scenario,
    pub config: SimConfig64,
    pub seed_generated: bool,
}

fn fresh_seed() -> u64 {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos() as u64);
    // splitmix64 finalizer
    let mut z = nanos ^ (std::process::id() as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    // manifests store the seed as a TOML integer
    (z ^ (z >> 31)) >> 1
}

/// Scenario file plus flags plus defaults, not yet checked.
pub fn resolve_scenario(args: &ScenarioArgs) -> CliResult<(Scenario, bool)> {
    let mut scenario = match &args.config {
        Some(p) => config::load(p).map_err(CliError::usage_list)?,
        None => Scenario::default(),
    };
    scenario.manifest = None;
    scenario.apply(&args.overrides());
    let seed_generated = scenario.fill_defaults(fresh_seed);
    Ok((scenario, seed_generated))
}

pub fn resolve(args: &ScenarioArgs) -> CliResult<Resolved> {
    let (scenario, seed_generated) = resolve_scenario(args)?;
    let config = scenario.to_sim_config().map_err(CliError::usage_list)?;
    Ok(Resolved {
        scenario,
        config,
        seed_generated,
    })
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = output::create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_with(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = output::create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub struct GrowthOutcome {
    pub trajectory: GrowthTrajectory64,
    pub milestones: GrowthMilestones<f64>,
    /// Static bath only.
    pub stationary_n: Option<f64>,
}

/// The growth run shared by `grow` and `sweep`.
pub fn run_growth(config: &SimConfig64) -> bec_kinetics::Result<GrowthOutcome> {
    let coupling = match config.bath.mode {
        BathMode::Depleting => Some(BathCoupling::from_config(config)?),
        BathMode::Static => None,
    };
    let trajectory = integrate_growth(config, coupling.as_ref())?;
    let milestones = extract_milestones(&trajectory, DEFAULT_SEED_THRESHOLD);
    let stationary_n = match config.bath.mode {
        BathMode::Static => stationary_point(&RateContext::from_config(config)?).ok(),
        BathMode::Depleting => None,
    };
    Ok(GrowthOutcome {
        trajectory,
        milestones,
        stationary_n,
    })
}

fn print_milestones(m: &GrowthMilestones<f64>, stationary: Option<f64>) {
    let show = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4e} s"));
    println!("latency (n = {DEFAULT_SEED_THRESHOLD}): {}", show(m.latency_time));
    println!("t10: {}  t90: {}  growth time: {}", show(m.t10), show(m.t90), show(m.growth_time_10_90));
    println!("final n: {:.6e}  saturated: {}", m.saturation_n, m.saturation_reached);
    if let Some(ns) = stationary {
        println!("stationary n: {ns:.6e}");
    }
}

pub fn grow(args: &GrowArgs) -> CliResult<()> {
    let r = resolve(&args.scenario)?;
    let dir = r.scenario.out_dir();
    prepare_dir(&dir)?;
    let outcome = run_growth(&r.config)?;
    let traj = &outcome.trajectory;

    let mut manifest = Manifest::new("grow", r.scenario.seed(), r.seed_generated);
    let csv = dir.join("trajectory.csv");
    write_with(&csv, |w| output::write_trajectory(w, traj))?;
    manifest.outputs.push(csv);
    let ms = dir.join("milestones.csv");
    write_with(&ms, |w| output::write_milestones(w, &outcome.milestones, outcome.stationary_n))?;
    manifest.outputs.push(ms);

    if r.scenario.svg() {
        let mut series = vec![Series::new("n(t)", traj.samples.iter().map(|s| (s.t, s.n)).collect(), "#1f4e9c")];
        if let Some(ns) = outcome.stationary_n {
            series.push(Series::new("stationary n", vec![(0.0, ns), (r.config.t_end, ns)], "#888888").dashed());
        }
        let path = dir.join("growth.svg");
        write_text(&path, &svg::lin_log("condensate number", "t (s)", "n", series))?;
        manifest.outputs.push(path);
    }

    let c = &r.config;
    manifest.record("config_hash", traj.config_hash.clone());
    manifest.record("kT_J", c.constants.k_b * c.bath.temperature);
    manifest.record("mu_bath_J", c.bath.chemical_potential);
    if let Some(ns) = outcome.stationary_n {
        manifest.record("stationary_n", ns);
    }
    manifest.record("accepted_steps", traj.stats.accepted as i64);
    manifest.record("rejected_steps", traj.stats.rejected as i64);
    manifest.write(&dir, Some(&r.scenario))?;

    print_milestones(&outcome.milestones, outcome.stationary_n);
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn ssa(args: &SsaArgs) -> CliResult<()> {
    let r = resolve(&args.scenario)?;
    if r.config.bath.mode != BathMode::Static {
        return Err(CliError::Usage("ssa supports the static bath only".into()));
    }
    if args.trajectories == 0 {
        return Err(CliError::Usage("--trajectories must be at least 1".into()));
    }
    let dir = r.scenario.out_dir();
    prepare_dir(&dir)?;
    let seed = r.scenario.seed();
    let mut manifest = Manifest::new("ssa", seed, r.seed_generated);
    manifest.record("trajectories", args.trajectories as i64);

    // the mean-field curve on the same grid
    let ode = integrate_growth(&r.config, None)?;
    let times: Vec<f64> = ode.samples.iter().map(|s| s.t).collect();
    let chain = BirthDeathChain::from_config(&r.config)?;
    let mut opts = SsaOptions::new(times.clone());
    opts.n_initial = r.config.n_initial.round() as u64;
    opts.seed_threshold = DEFAULT_SEED_THRESHOLD as u64;

    if args.trajectories == 1 {
        opts.record_events = true;
        let path = ssa_trajectory(&chain, &opts, seed);
        let events = dir.join("events.csv");
        write_with(&events, |w| output::write_events(w, path.events.as_deref().unwrap_or(&[])))?;
        manifest.outputs.push(events);
        let csv = dir.join("ssa_trajectory.csv");
        write_with(&csv, |w| output::write_ssa_path(w, &times, &path.n))?;
        manifest.outputs.push(csv);
        if r.scenario.svg() {
            let series = vec![
                Series::new("SSA", times.iter().zip(&path.n).map(|(t, n)| (*t, *n as f64)).collect(), "#1f4e9c"),
                Series::new("mean field", ode.samples.iter().map(|s| (s.t, s.n)).collect(), "#c0392b").dashed(),
            ];
            let p = dir.join("ssa.svg");
            write_text(&p, &svg::lin_log("single trajectory", "t (s)", "n", series))?;
            manifest.outputs.push(p);
        }
        manifest.record("events", path.event_count as i64);
        println!("events: {}  final n: {}", path.event_count, path.n.last().copied().unwrap_or(0));
    } else {
        let stats = ensemble(&chain, &opts, args.trajectories, seed)?;
        let ode_n: Vec<f64> = ode.samples.iter().map(|s| s.n).collect();
        let csv = dir.join("ensemble.csv");
        write_with(&csv, |w| output::write_ensemble(w, &stats, &ode_n))?;
        manifest.outputs.push(csv);
        let hist = output::latency_histogram(&stats.latencies, args.bins);
        let lat = dir.join("latency.csv");
        write_with(&lat, |w| output::write_histogram(w, &hist))?;
        manifest.outputs.push(lat);
        if r.scenario.svg() {
            let pick = |k: usize| stats.times.iter().zip(&stats.bands).map(|(t, b)| (*t, b[k])).collect();
            let series = vec![
                Series::new("ensemble mean", stats.times.iter().copied().zip(stats.mean.iter().copied()).collect(), "#1f4e9c"),
                Series::new("5% quantile", pick(0), "#7fa7d9").dashed(),
                Series::new("95% quantile", pick(4), "#7fa7d9").dashed(),
                Series::new("mean field", ode.samples.iter().map(|s| (s.t, s.n)).collect(), "#c0392b"),
            ];
            let p = dir.join("ensemble.svg");
            write_text(&p, &svg::lin_log("ensemble", "t (s)", "n", series))?;
            manifest.outputs.push(p);
        }
        let worst_z = clt_worst_z(&stats.mean, &stats.variance, &ode_n, stats.trajectories, 100.0);
        manifest.record("latency_not_reached", hist.missing as i64);
        manifest.record("total_events", stats.total_events as i64);
        if let Some(z) = worst_z {
            manifest.record("max_abs_z_mean_vs_ode_n_gt_100", z);
            println!("largest |mean - ode|/(sd/sqrt(M)) where ode n > 100: {z:.3}");
        }
        println!("trajectories: {}  events: {}", stats.trajectories, stats.total_events);
    }
    manifest.write(&dir, Some(&r.scenario))?;
    println!("wrote {}", dir.display());
    Ok(())
}

/// Largest |mean − ode|/√(var/M) over points where the ODE exceeds `floor`.
pub fn clt_worst_z(mean: &[f64], variance: &[f64], ode: &[f64], m: usize, floor: f64) -> Option<f64> {
    mean.iter()
        .zip(variance)
        .zip(ode)
        .filter(|(_, o)| **o > floor)
        .map(|((mu, v), o)| (mu - o).abs() / (v / m as f64).sqrt())
        .fold(None, |acc: Option<f64>, z| Some(acc.map_or(z, |a| a.max(z))))
}

/// How far a row sits from failing: 1 is the pass boundary.
fn score(row: &ValidationRow) -> f64 {
    if row.tolerance > 0.0 {
        (row.value - row.reference).abs() / row.tolerance
    } else if row.tolerance == 0.0 && row.reference != 0.0 {
        row.value / row.reference
    } else {
        (row.value - row.reference).abs() / f64::MIN_POSITIVE
    }
}

pub fn validate(args: &ValidateArgs) -> CliResult<()> {
    let suite: Suite = args.suite.parse().map_err(|e: bec_kinetics::Error| CliError::Usage(e.to_string()))?;
    if !(args.samples >= 1e4 && args.samples.fract() == 0.0 && args.samples < 1e12) {
        return Err(CliError::Usage(format!("--samples must be a whole number of at least 1e4, got {}", args.samples)));
    }
    let opts = ValidationOptions {
        samples: args.samples as usize,
        seed: args.seed,
    };
    let rows = run_suite(suite, &opts)?;
    println!("{}", ValidationRow::CSV_HEADER);
    for row in &rows {
        println!("{}", row.csv_row());
    }
    if let Some(dir) = &args.out {
        prepare_dir(dir)?;
        let mut manifest = Manifest::new("validate", args.seed, false);
        manifest.record("suite", suite.as_str());
        manifest.record("samples", opts.samples as i64);
        let csv = dir.join("validation.csv");
        write_with(&csv, |w| {
            writeln!(w, "{}", ValidationRow::CSV_HEADER)?;
            rows.iter().try_for_each(|r| writeln!(w, "{}", r.csv_row()))
        })?;
        manifest.outputs.push(csv);
        let bars: Vec<(String, f64, bool)> = rows.iter().map(|r| (format!("{}: {}", r.suite, r.name), score(r), r.pass)).collect();
        let p = dir.join("validation.svg");
        write_text(&p, &svg::score_bars(&format!("validation ({suite})"), &bars))?;
        manifest.outputs.push(p);
        manifest.write(dir, None)?;
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} of {} rows failed: {}", failed.len(), rows.len(), failed.join(", "))))
    }
}

pub const SWEEP_PARAMETERS: [&str; 5] = ["temp_nK", "mu_frac_kT", "eta", "a_nm", "trap_hz"];

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Parses NAME=a,b,c or NAME=start:stop:count.
pub fn parse_axis(spec: &str) -> CliResult<Axis> {
    let bad = |m: &str| CliError::Usage(format!("--vary {spec}: {m}"));
    let (name, values) = spec.split_once('=').ok_or_else(|| bad("expected NAME=SPEC"))?;
    if !SWEEP_PARAMETERS.contains(&name) {
        return Err(bad(&format!("unknown parameter (expected one of {})", SWEEP_PARAMETERS.join(", "))));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
    let values = if values.contains(':') {
        let parts: Vec<&str> = values.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range must be start:stop:count"));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| bad("count must be a positive integer"))?;
        match count {
            0 => return Err(bad("count must be a positive integer")),
            1 => vec![a],
            _ => (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        values.split(',').map(num).collect::<CliResult<Vec<f64>>>()?
    };
    Ok(Axis {
        name: name.to_string(),
        values,
    })
}

fn apply_axis(s: &mut Scenario, name: &str, v: f64) {
    match name {
        "temp_nK" => s.bath.temp_nk = Some(v),
        "mu_frac_kT" => {
            s.bath.mu_frac_kt = Some(v);
            s.bath.mu_nk = None;
        }
        "eta" => s.bath.eta = Some(v),
        "a_nm" => s.species.scattering_length_nm = Some(v),
        "trap_hz" => {
            s.trap.omega_x_hz = Some(v);
            s.trap.omega_y_hz = Some(v);
            s.trap.omega_z_hz = Some(v);
        }
        _ => unreachable!("axis names are checked when parsed"),
    }
}

/// Grid points in row order: the first axis varies slowest.
pub fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut points = vec![vec![]];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let axes = args.vary.iter().map(|s| parse_axis(s)).collect::<CliResult<Vec<_>>>()?;
    let count = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len())).unwrap_or(usize::MAX);
    if count > args.max_points {
        return Err(CliError::Usage(format!(
            "sweep grid has {count} points, above the cap of {} (raise --max-points)",
            args.max_points
        )));
    }
    // each grid point is checked on its own, the base may lack swept values
    let (base, seed_generated) = resolve_scenario(&args.scenario)?;
    let dir = base.out_dir();
    prepare_dir(&dir)?;
    let points = grid_points(&axes);
    log::info!("sweeping {} points", points.len());

    let rows: Vec<String> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut s = base.clone();
            for (axis, v) in axes.iter().zip(p) {
                apply_axis(&mut s, &axis.name, *v);
            }
            let mut fields: Vec<String> = vec![i.to_string()];
            fields.extend(p.iter().map(|v| output::num(*v)));
            let result = s
                .to_sim_config()
                .map_err(|e| e.join("; "))
                .and_then(|c| run_growth(&c).map_err(|e| e.to_string()));
            match result {
                Ok(o) => {
                    fields.extend(output::milestone_fields(&o.milestones, o.stationary_n));
                    fields.push("ok".into());
                }
                Err(e) => {
                    fields.extend(std::iter::repeat_n("NaN".to_string(), output::MILESTONE_COLUMNS.len() - 1));
                    fields.push("false".into());
                    fields.push(format!("\"{}\"", e.replace('"', "'")));
                }
            }
            fields.join(",")
        })
        .collect();

    let csv = dir.join("sweep.csv");
    write_with(&csv, |w| {
        let mut header = vec!["index".to_string()];
        header.extend(axes.iter().map(|a| a.name.clone()));
        header.extend(output::MILESTONE_COLUMNS.iter().map(|s| s.to_string()));
        header.push("status".into());
        writeln!(w, "{}", header.join(","))?;
        rows.iter().try_for_each(|r| writeln!(w, "{r}"))
    })?;
    let failures = rows.iter().filter(|r| !r.ends_with(",ok")).count();
    let mut manifest = Manifest::new("sweep", base.seed(), seed_generated);
    manifest.outputs.push(csv);
    manifest.record("vary", args.vary.clone());
    manifest.record("points", points.len() as i64);
    manifest.record("failed_points", failures as i64);
    manifest.write(&dir, Some(&base))?;
    println!("{} points ({} failed); wrote {}", points.len(), failures, dir.display());
    if failures == points.len() {
        return Err(CliError::Runtime(format!("all {failures} sweep points failed, see the status column of sweep.csv")));
    }
    Ok(())
}
