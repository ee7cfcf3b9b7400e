use nsalpha_core::fixtures;
use nsalpha_core::spectral::norms;
use nsalpha_core::{integrate_state, ModeSet, PhysicalParams, TimeScheme, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn decay_error(alpha: f64, m: usize, scheme: TimeScheme) -> f64 {
    let modes = ModeSet::new(2, 8).unwrap();
    let u0 = fixtures::single_mode(&modes, 1.3);
    let p = PhysicalParams::new(0.2, alpha, 1.0).unwrap();
    let f = Trajectory::zeros(&modes, 0.0, 1.0, m).unwrap();
    let run = integrate_state(&u0, &f, &p, m, scheme).unwrap();
    let exact = (-p.nu * p.t_final).exp() * u0.l2_norm();
    (run.trajectory.last().l2_norm() - exact).abs() / exact
}

#[test]
fn single_mode_decay_is_second_order_and_alpha_independent() {
    for alpha in [0.0, 0.5, 1.0] {
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&m| decay_error(alpha, m, TimeScheme::ImexHeun))
            .collect();
        assert!(errs[3] <= 1e-6, "α={alpha}: {errs:?}");
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.9..2.1).contains(&order), "α={alpha}: order {order}");
        }
        // the Helmholtz factors cancel on a single mode
        assert!((errs[3] - decay_error(0.0, 128, TimeScheme::ImexHeun)).abs() < 1e-15);
    }
}

#[test]
fn euler_option_is_first_order() {
    let e1 = decay_error(0.5, 32, TimeScheme::ImexEuler);
    let e2 = decay_error(0.5, 64, TimeScheme::ImexEuler);
    let order = (e1 / e2).log2();
    assert!((0.9..1.1).contains(&order), "order {order}");
}

fn forced_run(m: usize, alpha: f64) -> nsalpha_core::StateRun {
    let modes = ModeSet::new(2, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u0 = fixtures::random_field(&modes, &mut rng, 1.0);
    let f = fixtures::smooth_control(&modes, &mut rng, 2.0, 1.0, m).unwrap();
    let p = PhysicalParams::new(0.1, alpha, 1.0).unwrap();
    integrate_state(&u0, &f, &p, m, TimeScheme::ImexHeun).unwrap()
}

#[test]
fn energy_residual_converges_at_second_order() {
    for alpha in [0.0, 0.3] {
        let r: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&m| forced_run(m, alpha).ledger.max_residual())
            .collect();
        for w in r.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.8, "α={alpha}: residuals {r:?}");
        }
    }
}

#[test]
fn apriori_bound_and_bounds_on_forced_runs() {
    for alpha in [0.0, 0.3, 1.0] {
        let run = forced_run(32, alpha);
        assert!(run.apriori.holds, "α={alpha}: {:?}", run.apriori);
        assert!(run.apriori.max_ratio > 0.0 && run.apriori.max_ratio <= 1.0);
        assert!(run.bounds.sup_v.is_finite() && run.bounds.l2_da.is_finite());
        assert!(run.ledger.is_finite());
        assert!(run.cfl_advisory > 0.0);
    }
}

#[test]
fn unforced_ns_energy_is_non_increasing() {
    let modes = ModeSet::new(2, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = fixtures::random_field(&modes, &mut rng, 3.0);
    let f = Trajectory::zeros(&modes, 0.0, 1.0, 64).unwrap();
    let p = PhysicalParams::new(0.05, 0.0, 1.0).unwrap();
    let run = integrate_state(&u0, &f, &p, 64, TimeScheme::ImexHeun).unwrap();
    let kinetic: Vec<f64> = run.ledger.records.iter().map(|r| r.kinetic).collect();
    for w in kinetic.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-14), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn ledger_rows_match_trajectory() {
    let run = forced_run(8, 0.5);
    assert_eq!(run.ledger.records.len(), 9);
    for (rec, u) in run.ledger.records.iter().zip(run.trajectory.fields()) {
        assert_eq!(rec.kinetic, u.l2_norm().powi(2));
        assert_eq!(rec.gradient, 0.25 * norms::v_norm(u).powi(2));
    }
    let mut csv = Vec::new();
    run.ledger.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("step,t,kinetic,gradient,dissipation,work,residual\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn three_dimensional_taylor_green_decays() {
    let modes = ModeSet::new(3, 8).unwrap();
    let u0 = fixtures::taylor_green(&modes, 1.0);
    let f = Trajectory::zeros(&modes, 0.0, 0.5, 16).unwrap();
    let p = PhysicalParams::new(0.1, 0.2, 0.5).unwrap();
    let run = integrate_state(&u0, &f, &p, 16, TimeScheme::ImexHeun).unwrap();
    let last = run.trajectory.last();
    assert!(last.max_divergence() <= 1e-13 * last.max_coefficient());
    assert!(last.l2_norm() < u0.l2_norm());
}
