use nsalpha_core::alpha_limit::{limit_adjoint_residual, perturbed, run_sweep, SweepConfig};
use nsalpha_core::fixtures::{self, FixtureSpec};
use nsalpha_core::optimizer::{projected_gradient, CostWeights, DescentOptions};
use nsalpha_core::PhysicalParams;

fn config(parallel: bool) -> SweepConfig {
    let spec = FixtureSpec {
        m_steps: 16,
        u0_scale: 0.5,
        control_scale: 0.5,
        params: PhysicalParams {
            nu: 0.1,
            alpha: 0.0,
            t_final: 0.5,
        },
        ..FixtureSpec::default()
    };
    let w = CostWeights {
        gamma_u: 1.0,
        gamma_t: 1.0,
        gamma_f: 1.0,
    };
    SweepConfig {
        alphas: vec![1.0, 0.5, 0.25, 0.0],
        problem: fixtures::smooth_sweep_problem(&spec, w).unwrap(),
        options: DescentOptions {
            tol: 1e-8,
            ..DescentOptions::default()
        },
        parallel,
    }
}

#[test]
fn parallel_and_sequential_sweeps_agree_bitwise() {
    let a = run_sweep(&config(true)).unwrap();
    let b = run_sweep(&config(false)).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    let mut dat = Vec::new();
    a.write_gnuplot(&mut dat).unwrap();
    let text = String::from_utf8(dat).unwrap();
    assert!(text.starts_with("# alpha J "));
    assert_eq!(text.lines().count(), 5);
    let header = String::from_utf8(ca).unwrap();
    assert!(
        header.starts_with("alpha,J,gap_state_L2V,gap_state_LinfL2,gap_adj_L2V,gap_adj_L2L2,ee7_sup,iters,converged\n")
    );
}

#[test]
fn limit_residual_separates_the_right_equation() {
    let cfg = config(false);
    let limit = cfg.problem.with_alpha(0.0);
    let base = projected_gradient(&limit, &limit.zero_control(), &cfg.options).unwrap();
    let own = limit_adjoint_residual(&base.state, &base.adjoint, &limit).unwrap();
    assert!(own.within(10.0), "{own:?}");

    // an adjoint of the α = 1 system does not satisfy the limit equation
    let regularized = cfg.problem.with_alpha(1.0);
    let other = projected_gradient(&regularized, &regularized.zero_control(), &cfg.options).unwrap();
    let foreign = limit_adjoint_residual(&base.state, &other.adjoint, &limit).unwrap();
    assert!(foreign.residual > 20.0 * own.residual, "{foreign:?} vs {own:?}");

    let r1 = limit_adjoint_residual(&base.state, &perturbed(&base.adjoint, 1e-3, 2).unwrap(), &limit).unwrap();
    let r2 = limit_adjoint_residual(&base.state, &perturbed(&base.adjoint, 4e-3, 2).unwrap(), &limit).unwrap();
    let growth = (r2.residual - own.residual) / (r1.residual - own.residual);
    assert!((growth - 4.0).abs() < 0.5, "growth {growth}");
}
