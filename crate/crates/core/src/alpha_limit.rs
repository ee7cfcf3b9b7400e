//! Sweeps of the optimality system over a decreasing sequence of α and
//! comparison with the α = 0 (Navier-Stokes) solution of the same
//! discretization.
//!
//! The harness reports gaps and uniform bounds; it makes no claim about
//! rates.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjoint::{b_star_op, rhs_op, AdjointMonitors, ClosedForm};
use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::optimizer::{projected_gradient, ControlProblem, DescentOptions, OptimalityReport, OptimizeError};
use crate::spectral::{norms, SolenoidalField};
use crate::trajectory::Trajectory;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Strictly decreasing, positive except for a final 0.
    pub alphas: Vec<f64>,
    /// Shared data; its own α is ignored.
    pub problem: ControlProblem,
    pub options: DescentOptions,
    /// Solve the α > 0 rows concurrently once the baseline is known.
    pub parallel: bool,
}

impl SweepConfig {
    /// `[1, 1/2, ..., 2^-halvings, 0]`.
    pub fn dyadic_alphas(halvings: u32) -> Vec<f64> {
        let mut v: Vec<f64> = (0..=halvings).map(|j| 0.5f64.powi(j as i32)).collect();
        v.push(0.0);
        v
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.alphas;
        if a.last() != Some(&0.0) {
            return Err(Error::Argument("the α list must end with 0".into()));
        }
        if a[..a.len() - 1].iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Argument("α values before the final 0 must be positive".into()));
        }
        if a.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Argument("α values must be strictly decreasing".into()));
        }
        self.problem.with_alpha(0.0).validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    #[serde(rename = "J")]
    pub cost: f64,
    #[serde(rename = "gap_state_L2V")]
    pub gap_state_l2v: f64,
    #[serde(rename = "gap_state_LinfL2")]
    pub gap_state_linf_l2: f64,
    #[serde(rename = "gap_adj_L2V")]
    pub gap_adj_l2v: f64,
    #[serde(rename = "gap_adj_L2L2")]
    pub gap_adj_l2l2: f64,
    pub monitors: AdjointMonitors,
    pub iters: usize,
    pub converged: bool,
}

impl SweepRow {
    /// `‖λ‖_{L∞(L²)} + α²‖∇λ‖_{L∞(L²)}`.
    pub fn sup_bound(&self) -> f64 {
        self.monitors.sup_bound()
    }
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    /// One row per α, in the order of the configuration.
    pub rows: Vec<SweepRow>,
    /// Consistency of the α = 0 adjoint with the limit adjoint equation.
    pub limit: LimitResidual,
}

impl SweepTable {
    /// CSV with header
    /// `alpha,J,gap_state_L2V,gap_state_LinfL2,gap_adj_L2V,gap_adj_L2L2,ee7_sup,iters,converged`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "alpha,J,gap_state_L2V,gap_state_LinfL2,gap_adj_L2V,gap_adj_L2L2,ee7_sup,iters,converged"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(r.alpha),
                fmt_f64(r.cost),
                fmt_f64(r.gap_state_l2v),
                fmt_f64(r.gap_state_linf_l2),
                fmt_f64(r.gap_adj_l2v),
                fmt_f64(r.gap_adj_l2l2),
                fmt_f64(r.sup_bound()),
                r.iters,
                r.converged
            )?;
        }
        Ok(())
    }

    /// Whitespace-separated columns with a `#` header, for gnuplot.
    pub fn write_gnuplot<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# alpha J gap_state_L2V gap_state_LinfL2 gap_adj_L2V gap_adj_L2L2 ee7_sup iters converged"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{} {} {} {} {} {} {} {} {}",
                fmt_f64(r.alpha),
                fmt_f64(r.cost),
                fmt_f64(r.gap_state_l2v),
                fmt_f64(r.gap_state_linf_l2),
                fmt_f64(r.gap_adj_l2v),
                fmt_f64(r.gap_adj_l2l2),
                fmt_f64(r.sup_bound()),
                r.iters,
                u8::from(r.converged)
            )?;
        }
        Ok(())
    }
}

/// Solve one row; a stalled line search is flagged, not fatal.
fn solve_row(problem: &ControlProblem, options: &DescentOptions) -> Result<OptimalityReport> {
    match projected_gradient(problem, &problem.zero_control(), options) {
        Ok(report) => Ok(report),
        Err(OptimizeError::Stagnation { report, .. }) => Ok(*report),
        Err(OptimizeError::Solver(e)) => Err(e),
    }
}

fn row(alpha: f64, report: &OptimalityReport, base: &OptimalityReport) -> SweepRow {
    let du = report.state.sub(&base.state);
    let dl = report.adjoint.sub(&base.adjoint);
    SweepRow {
        alpha,
        cost: report.cost,
        gap_state_l2v: du.time_l2(norms::v_norm),
        gap_state_linf_l2: du.time_sup(norms::l2_norm),
        gap_adj_l2v: dl.time_l2(norms::v_norm),
        gap_adj_l2l2: dl.time_l2(norms::l2_norm),
        monitors: AdjointMonitors::measure(&report.adjoint, alpha),
        iters: report.iterations(),
        converged: report.converged,
    }
}

/// Optimize at every α of the configuration and measure the distance of
/// each optimality triple to the α = 0 one.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let limit_problem = cfg.problem.with_alpha(0.0);
    let base = solve_row(&limit_problem, &cfg.options)?;
    let positive = &cfg.alphas[..cfg.alphas.len() - 1];
    let solve = |&alpha: &f64| -> Result<SweepRow> {
        let report = solve_row(&cfg.problem.with_alpha(alpha), &cfg.options)?;
        Ok(row(alpha, &report, &base))
    };
    let mut rows: Vec<SweepRow> = if cfg.parallel {
        positive.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        positive.iter().map(solve).collect::<Result<_>>()?
    };
    rows.push(row(0.0, &base, &base));
    let limit = limit_adjoint_residual(&base.state, &base.adjoint, &limit_problem)?;
    Ok(SweepTable { rows, limit })
}

/// Residual of the limit adjoint equation
/// `-λ' + νAλ - P[û·∇λ + (∇λ)ᵀû] = source`, `λ(T) = γ_T(û(T) - u_T)`, along a
/// discrete pair, and the local truncation scale it should be compared with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitResidual {
    /// `max(equation, terminal)`.
    pub residual: f64,
    /// Max over interior intervals of the L2 norm of the midpoint residual.
    pub equation: f64,
    /// `‖λ_m - γ_T(û_m - u_T)‖`.
    pub terminal: f64,
    /// `max(max_n ‖λ_{n+1} - 2λ_n + λ_{n-1}‖/Δt, max_n ‖λ_{n+1} - λ_n‖)`.
    pub truncation: f64,
}

impl LimitResidual {
    pub fn within(&self, factor: f64) -> bool {
        self.residual <= factor * self.truncation
    }
}

/// Evaluate the limit adjoint equation on `(û, λ)` with α = 0 operators.
///
/// The equation is differenced over intervals `[t_n, t_{n+1}]` with
/// `1 <= n <= m - 2`: the discrete transpose sweep is second-order accurate
/// in the interior but only first-order at the two end nodes, so the end
/// intervals are represented by the terminal gap instead.
pub fn limit_adjoint_residual(
    u_hat: &Trajectory,
    lambda: &Trajectory,
    problem: &ControlProblem,
) -> Result<LimitResidual> {
    u_hat.check_mesh(lambda, "state vs adjoint")?;
    u_hat.check_mesh(&problem.targets.u_d, "state vs tracking target")?;
    let m = u_hat.steps();
    let dt = u_hat.dt();
    let nu = problem.params.nu;
    let w = &problem.weights;
    let operator = |n: usize| -> SolenoidalField {
        let l = lambda.field(n);
        let u = u_hat.field(n);
        let mut r = l.map_multiplier(|k2| nu * k2);
        r.axpy(1.0, &b_star_op(u, l, 0.0, ClosedForm::Laplacian));
        r.axpy(-1.0, &rhs_op(u, problem.targets.u_d.field(n), problem.kind, w.gamma_u));
        r
    };
    let mut equation: f64 = 0.0;
    if m >= 3 {
        let mut prev = operator(1);
        for n in 1..=m - 2 {
            let next = operator(n + 1);
            let mut r = &prev + &next;
            r.scale(0.5);
            r.axpy(-1.0 / dt, &(lambda.field(n + 1) - lambda.field(n)));
            equation = equation.max(r.l2_norm());
            prev = next;
        }
    }
    let expected_terminal = (u_hat.last() - &problem.targets.u_t).scaled(w.gamma_t);
    let terminal = (lambda.last() - &expected_terminal).l2_norm();

    let mut curvature: f64 = 0.0;
    for n in 1..m {
        let mut second = lambda.field(n + 1) - lambda.field(n);
        second.axpy(-1.0, &(lambda.field(n) - lambda.field(n - 1)));
        curvature = curvature.max(second.l2_norm() / dt);
    }
    let increment = (0..m)
        .map(|n| (lambda.field(n + 1) - lambda.field(n)).l2_norm())
        .fold(0.0, f64::max);
    Ok(LimitResidual {
        residual: equation.max(terminal),
        equation,
        terminal,
        truncation: curvature.max(increment),
    })
}

/// `λ + ε r` with a seeded random unit-L2(Q) perturbation `r`.
pub fn perturbed(lambda: &Trajectory, eps: f64, seed: u64) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = Trajectory::from_fn(lambda.t0(), lambda.t_final(), lambda.steps(), |_| {
        SolenoidalField::random(lambda.modes(), &mut rng, 1.0)
    })?;
    let mut out = lambda.clone();
    out.axpy(eps / r.norm(), &r);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::CostKind;
    use crate::fixtures::{self, FixtureSpec};
    use crate::optimizer::{AdmissibleSet, CostWeights};

    fn problem() -> ControlProblem {
        let spec = FixtureSpec {
            m_steps: 8,
            ..FixtureSpec::default()
        };
        let w = CostWeights {
            gamma_u: 1.0,
            gamma_t: 1.0,
            gamma_f: 1.0,
        };
        fixtures::tracking_problem(&spec, w, CostKind::L4Tracking, AdmissibleSet::Unconstrained)
            .unwrap()
            .0
    }

    #[test]
    fn alpha_list_validation() {
        let base = SweepConfig {
            alphas: vec![0.0],
            problem: problem(),
            options: DescentOptions::default(),
            parallel: false,
        };
        assert!(base.validate().is_ok());
        for bad in [
            vec![0.5, 1.0, 0.0],
            vec![1.0, 0.5],
            vec![1.0, -0.5, 0.0],
            vec![1.0, 1.0, 0.0],
        ] {
            let cfg = SweepConfig {
                alphas: bad,
                ..base.clone()
            };
            assert!(cfg.validate().is_err());
        }
        assert_eq!(SweepConfig::dyadic_alphas(2), vec![1.0, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn single_zero_row_has_zero_gaps() {
        let cfg = SweepConfig {
            alphas: vec![0.0],
            problem: problem(),
            options: DescentOptions {
                max_iters: 3,
                ..DescentOptions::default()
            },
            parallel: false,
        };
        let table = run_sweep(&cfg).unwrap();
        assert_eq!(table.rows.len(), 1);
        let r = &table.rows[0];
        assert_eq!(
            [r.gap_state_l2v, r.gap_state_linf_l2, r.gap_adj_l2v, r.gap_adj_l2l2],
            [0.0; 4]
        );
    }

    #[test]
    fn zero_pair_has_zero_limit_residual() {
        let mut p = problem().with_alpha(0.0);
        p.weights.gamma_u = 0.0;
        let u = p.targets.u_d.clone();
        p.targets.u_t = u.last().clone();
        let lambda = Trajectory::zeros(u.modes(), 0.0, u.t_final(), u.steps()).unwrap();
        let r = limit_adjoint_residual(&u, &lambda, &p).unwrap();
        assert_eq!(r.residual, 0.0);
    }
}
