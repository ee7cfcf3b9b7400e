//! Cost functionals, reduced gradient, admissible sets and projected
//! gradient descent.
//!
//! Controls live in the discrete solenoidal space: the state only sees the
//! Leray projection of the forcing, so a gradient component would be
//! invisible to the tracking terms and would only add to the control cost.
//! All pairings of controls (gradient, projection, optimality residuals) use
//! the single trapezoid L2(Q) product of [`Trajectory::inner`].

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adjoint::{integrate_adjoint, AdjointRun, AdjointSource, CostKind, TerminalCondition};
use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::spectral::{norms, SolenoidalField};
use crate::state::{integrate_state, PhysicalParams, StateRun, TimeScheme};
use crate::sum::Accumulator;
use crate::trajectory::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub gamma_u: f64,
    #[serde(rename = "gamma_T")]
    pub gamma_t: f64,
    pub gamma_f: f64,
}

impl CostWeights {
    pub fn validate(&self, set: &AdmissibleSet) -> Result<()> {
        for (name, v) in [
            ("gamma_u", self.gamma_u),
            ("gamma_T", self.gamma_t),
            ("gamma_f", self.gamma_f),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.gamma_u == 0.0 && self.gamma_t == 0.0 && self.gamma_f == 0.0 {
            return Err(Error::Argument("cost weights must not all vanish".into()));
        }
        if matches!(set, AdmissibleSet::Unconstrained) && self.gamma_f <= 0.0 {
            return Err(Error::Argument(
                "gamma_f > 0 is required for an unbounded admissible set".into(),
            ));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            gamma_u: c * self.gamma_u,
            gamma_t: c * self.gamma_t,
            gamma_f: c * self.gamma_f,
        }
    }
}

/// Closed convex control sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdmissibleSet {
    Unconstrained,
    /// `{f : ‖f‖_{L2(Q)} <= radius}`.
    L2Ball {
        radius: f64,
    },
}

impl AdmissibleSet {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AdmissibleSet::Unconstrained => Ok(()),
            AdmissibleSet::L2Ball { radius } if radius > 0.0 && radius.is_finite() => Ok(()),
            AdmissibleSet::L2Ball { radius } => Err(Error::Argument(format!("ball radius must be > 0, got {radius}"))),
        }
    }

    pub fn contains(&self, f: &Trajectory) -> bool {
        match *self {
            AdmissibleSet::Unconstrained => true,
            AdmissibleSet::L2Ball { radius } => f.norm() <= radius * (1.0 + 1e-14),
        }
    }
}

/// Metric projection onto the admissible set in the L2(Q) product.
pub fn project_admissible(set: &AdmissibleSet, g: &Trajectory) -> Trajectory {
    match *set {
        AdmissibleSet::Unconstrained => g.clone(),
        AdmissibleSet::L2Ball { radius } => {
            let norm = g.norm();
            if norm <= radius {
                g.clone()
            } else {
                g.scaled(radius / norm)
            }
        }
    }
}

/// `u_d(t)` on the state mesh and `u_T`.
#[derive(Clone, Debug)]
pub struct Targets {
    pub u_d: Trajectory,
    pub u_t: SolenoidalField,
}

/// Tracking integrand without its weight: `½‖A(u - u_d)‖²` or `½‖u - u_d‖⁸_{L⁴}`.
pub fn tracking_integrand(u: &SolenoidalField, target: &SolenoidalField, kind: CostKind) -> f64 {
    let g = u - target;
    match kind {
        CostKind::DaTracking => 0.5 * norms::weighted_inner(&g, &g, |k2| k2 * k2),
        CostKind::L4Tracking => 0.5 * norms::l4_norm_pow4(&g).powi(2),
    }
}

/// `J` (D(A) tracking) or `J₀` (L⁴ tracking); time integrals by the
/// trapezoid rule on the step grid.
pub fn eval_cost(u: &Trajectory, f: &Trajectory, targets: &Targets, w: &CostWeights, kind: CostKind) -> Result<f64> {
    u.check_mesh(f, "state vs control")?;
    u.check_mesh(&targets.u_d, "state vs tracking target")?;
    if !targets.u_t.modes().same_as(u.modes()) {
        return Err(Error::Dimension("terminal target uses a different mode set".into()));
    }
    let mut j = Accumulator::default();
    for n in 0..=u.steps() {
        let wn = u.weight(n);
        if w.gamma_u != 0.0 {
            j.add(wn * w.gamma_u * tracking_integrand(u.field(n), targets.u_d.field(n), kind));
        }
        if w.gamma_f != 0.0 {
            let fk = f.field(n);
            j.add(wn * 0.5 * w.gamma_f * fk.l2_inner(fk));
        }
    }
    if w.gamma_t != 0.0 {
        let gap = u.last() - &targets.u_t;
        j.add(0.5 * w.gamma_t * gap.l2_inner(&gap));
    }
    Ok(j.value())
}

/// `γ_f f + λ`, the L2(Q) Riesz representative of the reduced derivative.
pub fn reduced_gradient(f: &Trajectory, lambda: &Trajectory, gamma_f: f64) -> Result<Trajectory> {
    f.check_mesh(lambda, "control vs adjoint")?;
    let mut g = lambda.clone();
    g.axpy(gamma_f, f);
    Ok(g)
}

/// A complete optimal-control problem on a fixed mesh.
#[derive(Clone, Debug)]
pub struct ControlProblem {
    pub u0: SolenoidalField,
    pub params: PhysicalParams,
    pub m_steps: usize,
    pub scheme: TimeScheme,
    pub weights: CostWeights,
    pub kind: CostKind,
    pub set: AdmissibleSet,
    pub targets: Targets,
}

/// State, adjoint and gradient at one control.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub cost: f64,
    pub state: StateRun,
    pub adjoint: AdjointRun,
    pub gradient: Trajectory,
}

impl ControlProblem {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.set.validate()?;
        self.weights.validate(&self.set)?;
        if self.m_steps < 1 {
            return Err(Error::Argument("m_steps must be at least 1".into()));
        }
        let t = &self.targets.u_d;
        if t.steps() != self.m_steps
            || t.t0() != 0.0
            || (t.t_final() - self.params.t_final).abs() > 1e-12 * self.params.t_final
        {
            return Err(Error::Mesh("tracking target does not match the time mesh".into()));
        }
        if !t.modes().same_as(self.u0.modes()) || !self.targets.u_t.modes().same_as(self.u0.modes()) {
            return Err(Error::Dimension(
                "targets and initial state use different mode sets".into(),
            ));
        }
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            params: self.params.with_alpha(alpha),
            ..self.clone()
        }
    }

    pub fn zero_control(&self) -> Trajectory {
        Trajectory::zeros(self.u0.modes(), 0.0, self.params.t_final, self.m_steps).expect("validated mesh")
    }

    pub fn solve_state(&self, f: &Trajectory) -> Result<StateRun> {
        integrate_state(&self.u0, f, &self.params, self.m_steps, self.scheme)
    }

    pub fn cost_of(&self, state: &Trajectory, f: &Trajectory) -> Result<f64> {
        eval_cost(state, f, &self.targets, &self.weights, self.kind)
    }

    pub fn cost(&self, f: &Trajectory) -> Result<f64> {
        let run = self.solve_state(f)?;
        self.cost_of(&run.trajectory, f)
    }

    pub fn solve_adjoint(&self, state: &Trajectory, f: &Trajectory) -> Result<AdjointRun> {
        let source = AdjointSource {
            kind: self.kind,
            target: self.targets.u_d.clone(),
            weight: self.weights.gamma_u,
        };
        let terminal = TerminalCondition {
            weight: self.weights.gamma_t,
            target: self.targets.u_t.clone(),
        };
        integrate_adjoint(state, f, &source, &terminal, &self.params, self.scheme)
    }

    pub fn evaluate(&self, f: &Trajectory) -> Result<Evaluation> {
        let state = self.solve_state(f)?;
        let cost = self.cost_of(&state.trajectory, f)?;
        let adjoint = self.solve_adjoint(&state.trajectory, f)?;
        let gradient = reduced_gradient(f, &adjoint.lambda, self.weights.gamma_f)?;
        Ok(Evaluation {
            cost,
            state,
            adjoint,
            gradient,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub initial_step: f64,
    pub max_halvings: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-8,
            c1: 1e-4,
            initial_step: 1.0,
            max_halvings: 40,
        }
    }
}

/// One row of the convergence history. `step` is the accepted step length
/// that produced the iterate (zero for the initial control).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    #[serde(rename = "J")]
    pub cost: f64,
    pub step: f64,
    pub grad_norm: f64,
    pub vi_residual: f64,
}

#[derive(Clone, Debug)]
pub struct OptimalityReport {
    pub cost: f64,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub vi_residual: f64,
    pub control: Trajectory,
    pub state: Trajectory,
    pub adjoint: Trajectory,
}

impl OptimalityReport {
    /// Accepted descent steps.
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    /// CSV with header `iter,J,step,grad_norm,vi_residual`.
    pub fn write_history_csv<W: Write>(&self, w: W) -> Result<()> {
        write_history_csv(w, &self.history)
    }
}

pub fn write_history_csv<W: Write>(mut w: W, history: &[IterationRecord]) -> Result<()> {
    writeln!(w, "iter,J,step,grad_norm,vi_residual")?;
    for r in history {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iter,
            fmt_f64(r.cost),
            fmt_f64(r.step),
            fmt_f64(r.grad_norm),
            fmt_f64(r.vi_residual)
        )?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum OptimizeError {
    #[error("line search failed after {halvings} halvings at iteration {iter}")]
    Stagnation {
        iter: usize,
        halvings: usize,
        report: Box<OptimalityReport>,
    },
    #[error(transparent)]
    Solver(#[from] Error),
}

/// `‖f - Proj(f - s g)‖_{L2(Q)}`.
pub fn vi_residual(set: &AdmissibleSet, f: &Trajectory, g: &Trajectory, s: f64) -> f64 {
    let mut trial = f.clone();
    trial.axpy(-s, g);
    f.sub(&project_admissible(set, &trial)).norm()
}

/// Projected gradient descent with Armijo backtracking:
/// `f⁺ = Proj(f - s g)` accepted when
/// `J(f⁺) <= J(f) - c₁ s ‖(f - f⁺)/s‖²`, halving `s` otherwise. Stops when
/// the VI residual at the initial step length drops to `tol`.
pub fn projected_gradient(
    problem: &ControlProblem,
    f_init: &Trajectory,
    opts: &DescentOptions,
) -> Result<OptimalityReport, OptimizeError> {
    problem.validate()?;
    let mut f = project_admissible(&problem.set, f_init);
    let mut eval = problem.evaluate(&f)?;
    let mut history = Vec::new();
    let mut last_step = 0.0;
    let report = |f: &Trajectory, eval: &Evaluation, history: &[IterationRecord], converged, vi| OptimalityReport {
        cost: eval.cost,
        history: history.to_vec(),
        converged,
        vi_residual: vi,
        control: f.clone(),
        state: eval.state.trajectory.clone(),
        adjoint: eval.adjoint.lambda.clone(),
    };
    for iter in 0.. {
        let vi = vi_residual(&problem.set, &f, &eval.gradient, opts.initial_step);
        history.push(IterationRecord {
            iter,
            cost: eval.cost,
            step: last_step,
            grad_norm: eval.gradient.norm(),
            vi_residual: vi,
        });
        if vi <= opts.tol || iter >= opts.max_iters {
            return Ok(report(&f, &eval, &history, vi <= opts.tol, vi));
        }
        let mut s = opts.initial_step;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = f.clone();
            trial.axpy(-s, &eval.gradient);
            let candidate = project_admissible(&problem.set, &trial);
            let moved = f.sub(&candidate).norm() / s;
            match problem.cost(&candidate) {
                Ok(j) if j <= eval.cost - opts.c1 * s * moved * moved => {
                    accepted = Some(candidate);
                    break;
                }
                Ok(_) | Err(Error::BlowUp { .. }) => s *= 0.5,
                Err(e) => return Err(e.into()),
            }
        }
        match accepted {
            Some(next) => {
                f = next;
                eval = problem.evaluate(&f)?;
                last_step = s;
            }
            None => {
                return Err(OptimizeError::Stagnation {
                    iter,
                    halvings: opts.max_halvings,
                    report: Box::new(report(&f, &eval, &history, false, vi)),
                })
            }
        }
    }
    unreachable!("the descent loop only exits by returning")
}

/// Residuals of the first-order optimality system at `(f̂, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCheck {
    /// `min` over probes of `⟨γ_f f̂ + λ, f - f̂⟩`.
    pub min_pairing: f64,
    /// `‖f̂ - Proj(-λ/γ_f)‖`, present when `γ_f > 0`.
    pub fixed_point_gap: Option<f64>,
    /// `max(0, -min_pairing) + fixed_point_gap`.
    pub residual: f64,
}

/// Probe the variational inequality `⟨γ_f f̂ + λ, f - f̂⟩ >= 0` with
/// `n_probe` random admissible controls and measure the projection
/// fixed-point gap. Unconstrained probes are `f̂ + d` with `‖d‖ = 1`; ball
/// probes are uniform in radius along random directions.
pub fn check_optimality(
    f_hat: &Trajectory,
    lambda: &Trajectory,
    set: &AdmissibleSet,
    gamma_f: f64,
    n_probe: usize,
    seed: u64,
) -> Result<OptimalityCheck> {
    f_hat.check_mesh(lambda, "control vs adjoint")?;
    let grad = reduced_gradient(f_hat, lambda, gamma_f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_pairing = f64::INFINITY;
    for _ in 0..n_probe {
        let mut dir = Trajectory::from_fn(f_hat.t0(), f_hat.t_final(), f_hat.steps(), |_| {
            SolenoidalField::random(f_hat.modes(), &mut rng, 1.0)
        })?;
        let norm = dir.norm();
        dir = dir.scaled(1.0 / norm);
        let probe = match *set {
            AdmissibleSet::Unconstrained => {
                let mut p = f_hat.clone();
                p.axpy(1.0, &dir);
                p
            }
            AdmissibleSet::L2Ball { radius } => {
                use rand::Rng;
                dir.scaled(radius * rng.gen_range(0.0..=1.0))
            }
        };
        min_pairing = min_pairing.min(grad.inner(&probe.sub(f_hat)));
    }
    let fixed_point_gap = (gamma_f > 0.0).then(|| {
        let target = project_admissible(set, &lambda.scaled(-1.0 / gamma_f));
        f_hat.sub(&target).norm()
    });
    let violation = if n_probe > 0 { (-min_pairing).max(0.0) } else { 0.0 };
    Ok(OptimalityCheck {
        min_pairing,
        fixed_point_gap,
        residual: violation + fixed_point_gap.unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeSet;

    fn random_traj(seed: u64, steps: usize) -> Trajectory {
        let modes = ModeSet::new(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Trajectory::from_fn(0.0, 1.0, steps, |_| SolenoidalField::random(&modes, &mut rng, 1.0)).unwrap()
    }

    #[test]
    fn ball_projection_closed_form() {
        let g = random_traj(1, 6);
        let r = g.norm() / 2.0;
        let p = project_admissible(&AdmissibleSet::L2Ball { radius: r }, &g);
        assert!(p.sub(&g.scaled(0.5)).norm() < 1e-15 * g.norm());
        let inside = g.scaled(0.1);
        let q = project_admissible(&AdmissibleSet::L2Ball { radius: r }, &inside);
        assert_eq!(q.sub(&inside).norm(), 0.0);
        let u = project_admissible(&AdmissibleSet::Unconstrained, &g);
        assert_eq!(u.sub(&g).norm(), 0.0);
    }

    #[test]
    fn weights_validation() {
        let ball = AdmissibleSet::L2Ball { radius: 1.0 };
        let zero = CostWeights {
            gamma_u: 0.0,
            gamma_t: 0.0,
            gamma_f: 0.0,
        };
        assert!(zero.validate(&ball).is_err());
        let no_f = CostWeights {
            gamma_u: 1.0,
            gamma_t: 0.0,
            gamma_f: 0.0,
        };
        assert!(no_f.validate(&ball).is_ok());
        assert!(no_f.validate(&AdmissibleSet::Unconstrained).is_err());
        assert!(AdmissibleSet::L2Ball { radius: 0.0 }.validate().is_err());
    }

    #[test]
    fn control_cost_of_constant_mode() {
        let modes = ModeSet::new(2, 8).unwrap();
        let a = SolenoidalField::single_mode(&modes, &[1, 0], &[0.0, 1.5]).unwrap();
        let f = Trajectory::constant(&a, 0.0, 2.0, 5).unwrap();
        let u = Trajectory::zeros(&modes, 0.0, 2.0, 5).unwrap();
        let targets = Targets {
            u_d: u.clone(),
            u_t: SolenoidalField::zeros(&modes),
        };
        let w = CostWeights {
            gamma_u: 0.0,
            gamma_t: 0.0,
            gamma_f: 1.0,
        };
        let j = eval_cost(&u, &f, &targets, &w, CostKind::DaTracking).unwrap();
        let expected = 2.0 * a.l2_norm().powi(2) / 2.0;
        assert!((j - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn optimality_residual_vanishes_on_fixed_point() {
        let f = random_traj(3, 4);
        let gamma_f = 0.5;
        let lambda = f.scaled(-gamma_f);
        let chk = check_optimality(&f, &lambda, &AdmissibleSet::Unconstrained, gamma_f, 8, 1).unwrap();
        assert!(chk.residual < 1e-14);
        let perturbed = {
            let mut p = f.clone();
            p.axpy(0.3, &random_traj(4, 4));
            p
        };
        let chk = check_optimality(&perturbed, &lambda, &AdmissibleSet::Unconstrained, gamma_f, 8, 1).unwrap();
        assert!(chk.residual > 1e-3);
    }
}
