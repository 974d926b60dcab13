use bec_kinetics::chem_potential::ChemPotentialModel;
use bec_kinetics::growth::{extract_milestones, integrate_growth};
use bec_kinetics::model::K_B_SI;
use bec_kinetics::rates::RateContext;
use bec_kinetics::special::z_k1;
use bec_kinetics::stochastic::{ensemble, ssa_trajectory, BirthDeathChain, SsaOptions};
use bec_kinetics::{interaction_strength, validate_config, BathMode, BathState, PhysicalConstants, SimConfig, Species, Trap};
use proptest::prelude::*;

fn unit_context(mu: f64) -> RateContext<f64> {
    let chem = ChemPotentialModel::new(Species::new("unit", 1.0, 0.05), Trap::isotropic(1.0), PhysicalConstants::unit());
    RateContext::new(chem, 10.0, mu)
}

fn rb_config(temp_nk: f64, mu_frac: f64, trap_hz: f64, t_end: f64) -> SimConfig<f64> {
    let t = temp_nk * 1e-9;
    let mut c = SimConfig::new(
        Species::rb87(),
        Trap::from_hz(trap_hz, trap_hz, trap_hz),
        BathState::new(t, mu_frac * K_B_SI * t, 5.0, BathMode::Static),
        t_end,
    );
    c.solver.samples = 201;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interaction_strength_homogeneity(a in 1e-10f64..1e-8, m in 1e-26f64..1e-24, k in 0.1f64..10.0) {
        let c = PhysicalConstants::si();
        let u = interaction_strength(&Species::new("x", m, a), &c);
        let ua = interaction_strength(&Species::new("x", m, k * a), &c);
        let um = interaction_strength(&Species::new("x", k * m, a), &c);
        prop_assert!((ua / (k * u) - 1.0).abs() < 1e-14);
        prop_assert!((um * k / u - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validation_idempotent(temp in 50.0f64..2000.0, mu in 0.0f64..4.9, hz in 10.0f64..1000.0) {
        let once = validate_config(rb_config(temp, mu, hz, 1.0)).unwrap();
        let twice = validate_config(once.clone()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn thomas_fermi_above_crossover(scale in 1.0f64..1e4, hz in 10.0f64..1000.0) {
        let chem = ChemPotentialModel::new(Species::rb87(), Trap::from_hz(hz, hz, hz), PhysicalConstants::si());
        let n = chem.crossover_count() * scale;
        prop_assert_eq!(chem.mu_condensate(n), chem.mu_thomas_fermi(n));
    }

    #[test]
    fn z_k1_strictly_decreasing(a in 1e-3f64..50.0, b in 1e-3f64..50.0) {
        prop_assume!((a - b).abs() > 1e-9 * a.max(b));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(z_k1(lo).unwrap() > z_k1(hi).unwrap());
    }

    #[test]
    fn static_growth_nonnegative_nondecreasing(temp in 200.0f64..1000.0, mu in 0.1f64..1.0) {
        let traj = integrate_growth(&rb_config(temp, mu, 100.0, 2.0), None).unwrap();
        for w in traj.samples.windows(2) {
            prop_assert!(w[1].t > w[0].t);
            prop_assert!(w[0].n >= 0.0);
            if w[0].mu_n <= w[0].bath_mu {
                prop_assert!(w[1].n >= w[0].n * (1.0 - 1e-8));
            }
        }
    }

    #[test]
    fn milestones_ordered(temp in 200.0f64..1000.0, mu in 0.05f64..1.0, threshold in 1.0f64..1e3) {
        let traj = integrate_growth(&rb_config(temp, mu, 100.0, 3.0), None).unwrap();
        let m = extract_milestones(&traj, threshold);
        if let (Some(l), Some(a), Some(b)) = (m.latency_time, m.t10, m.t90) {
            prop_assert!(l <= a && a <= b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn chain_never_negative(seed in any::<u64>(), mu in 0.0f64..8.0, start in 0u64..20) {
        let chain = BirthDeathChain::new(unit_context(mu));
        let mut opts = SsaOptions::new((0..=20).map(|i| i as f64 * 0.1).collect());
        opts.n_initial = start;
        opts.record_events = true;
        let path = ssa_trajectory(&chain, &opts, seed);
        let mut prev = start as i64;
        for e in path.events.unwrap() {
            prop_assert!((e.n as i64 - prev).abs() == 1);
            prev = e.n as i64;
        }
        let (_, death) = chain.rates(0);
        prop_assert_eq!(death, 0.0);
    }

    #[test]
    fn ensemble_bands_nested(seed in any::<u64>(), mu in 1.0f64..8.0) {
        let chain = BirthDeathChain::new(unit_context(mu));
        let opts = SsaOptions::new((0..=10).map(|i| i as f64 * 0.3).collect());
        let stats = ensemble(&chain, &opts, 20, seed).unwrap();
        for i in 0..stats.times.len() {
            prop_assert!(stats.variance[i] >= 0.0);
            let b = stats.bands[i];
            prop_assert!(b.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
