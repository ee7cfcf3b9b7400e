//! Navier-Stokes-α nonlinearity and forward time integration.
//!
//! The state equation, after Leray projection and division by the Helmholtz
//! multiplier `m(k) = 1 + α^2|k|^2`, reads mode by mode
//!
//! ```text
//! du/dt + ν|k|^2 u = m(k)^{-1} (f - B(u, u))
//! ```
//!
//! The linear part is diagonal and is treated by Crank-Nicolson; `f - B(u,u)`
//! is treated explicitly with Heun's predictor-corrector (second order) or a
//! single explicit evaluation (first order). Controls are sampled at the
//! nodes and enter each step through the trapezoid average of the two
//! endpoint samples, which keeps the discrete control space aligned with the
//! trapezoid L2(Q) product used by the optimizer.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{component_grids, gradient_grids, helmholtz_apply, norms, project_grids, SolenoidalField};
use crate::trajectory::Trajectory;

/// Viscosity, regularisation length and horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub nu: f64,
    pub alpha: f64,
    pub t_final: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, alpha: f64, t_final: f64) -> Result<Self> {
        let p = Self { nu, alpha, t_final };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Argument(format!("nu must be > 0, got {}", self.nu)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Argument(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Argument(format!("t_final must be > 0, got {}", self.t_final)));
        }
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    /// Crank-Nicolson linear part, Heun predictor-corrector on `f - B(u,u)`.
    #[default]
    ImexHeun,
    /// Backward Euler linear part, one explicit evaluation of `f - B(u,u)`.
    ImexEuler,
}

impl TimeScheme {
    pub fn order(&self) -> u32 {
        match self {
            TimeScheme::ImexHeun => 2,
            TimeScheme::ImexEuler => 1,
        }
    }
}

fn check_pair(u: &SolenoidalField, v: &SolenoidalField) -> Result<()> {
    if u.modes().same_as(v.modes()) {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "operands on {:?} and {:?}",
            u.modes(),
            v.modes()
        )))
    }
}

/// `B(u, v) = P[(u.∇) w + (∇u)^T w]` with `w = (I - α^2 Δ) v`.
///
/// Products are formed on the grid; the result is dealiased and projected.
/// Since all operands live in the dealiased band, the retained modes of the
/// products are exact and `(B(u, v), u) = 0` holds to round-off.
pub fn nonlinear_b(u: &SolenoidalField, v: &SolenoidalField, alpha: f64) -> Result<SolenoidalField> {
    check_pair(u, v)?;
    Ok(b_op(u, v, alpha))
}

pub(crate) fn b_op(u: &SolenoidalField, v: &SolenoidalField, alpha: f64) -> SolenoidalField {
    let modes = u.modes();
    let dim = modes.dim();
    let w = helmholtz_apply(v, alpha);
    let ug = component_grids(u);
    let wg = component_grids(&w);
    let du = gradient_grids(u);
    let dw = gradient_grids(&w);
    let mut out = vec![vec![0.0; modes.len()]; dim];
    for (i, comp) in out.iter_mut().enumerate() {
        for (p, slot) in comp.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..dim {
                // (u.∇) w_i + ∂_i u_j w_j
                s += ug[j][p] * dw[i * dim + j][p] + du[j * dim + i][p] * wg[j][p];
            }
            *slot = s;
        }
    }
    project_grids(modes, &out)
}

/// `P[(u.∇) v]`, the Navier-Stokes advection term.
pub fn ns_advection(u: &SolenoidalField, v: &SolenoidalField) -> Result<SolenoidalField> {
    check_pair(u, v)?;
    let modes = u.modes();
    let dim = modes.dim();
    let ug = component_grids(u);
    let dv = gradient_grids(v);
    let out: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            (0..modes.len())
                .map(|p| (0..dim).map(|j| ug[j][p] * dv[i * dim + j][p]).sum())
                .collect()
        })
        .collect();
    Ok(project_grids(modes, &out))
}

/// One time step of either scheme; shared with the adjoint sweep, which
/// replays the predictor stages.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stepper {
    pub dt: f64,
    pub nu: f64,
    pub alpha: f64,
    pub scheme: TimeScheme,
}

impl Stepper {
    pub fn new(params: &PhysicalParams, dt: f64, scheme: TimeScheme) -> Self {
        Self {
            dt,
            nu: params.nu,
            alpha: params.alpha,
            scheme,
        }
    }

    pub fn helmholtz(&self, k2: f64) -> f64 {
        1.0 + self.alpha * self.alpha * k2
    }

    /// Implicit resolvent: `(1 + dt ν|k|^2/2)^{-1}` (CN) or `(1 + dt ν|k|^2)^{-1}`.
    pub fn resolvent(&self, k2: f64) -> f64 {
        match self.scheme {
            TimeScheme::ImexHeun => 1.0 / (1.0 + 0.5 * self.dt * self.nu * k2),
            TimeScheme::ImexEuler => 1.0 / (1.0 + self.dt * self.nu * k2),
        }
    }

    /// Explicit part of the linear update: `1 - dt ν|k|^2/2` (CN) or 1.
    pub fn explicit(&self, k2: f64) -> f64 {
        match self.scheme {
            TimeScheme::ImexHeun => 1.0 - 0.5 * self.dt * self.nu * k2,
            TimeScheme::ImexEuler => 1.0,
        }
    }

    /// Heun predictor `u* = R[S u + dt m^{-1}(f - B(u,u))]`, given `B(u,u)`.
    pub fn predictor(&self, u: &SolenoidalField, f: &SolenoidalField, b: &SolenoidalField) -> SolenoidalField {
        let mut rhs = f.clone();
        rhs.axpy(-1.0, b);
        let mut out = u.map_multiplier(|k2| self.resolvent(k2) * self.explicit(k2));
        out.axpy(
            1.0,
            &rhs.map_multiplier(|k2| self.dt * self.resolvent(k2) / self.helmholtz(k2)),
        );
        out
    }

    /// Advance one step; returns `u_{n+1}`.
    pub fn step(&self, u: &SolenoidalField, f0: &SolenoidalField, f1: &SolenoidalField) -> SolenoidalField {
        let b0 = b_op(u, u, self.alpha);
        #[cfg(debug_assertions)]
        debug_check_skew(u, &b0);
        let mut out = u.map_multiplier(|k2| self.resolvent(k2) * self.explicit(k2));
        match self.scheme {
            TimeScheme::ImexHeun => {
                let star = self.predictor(u, f0, &b0);
                let b1 = b_op(&star, &star, self.alpha);
                let mut rhs = f0 + f1;
                rhs.axpy(-1.0, &b0);
                rhs.axpy(-1.0, &b1);
                out.axpy(
                    1.0,
                    &rhs.map_multiplier(|k2| 0.5 * self.dt * self.resolvent(k2) / self.helmholtz(k2)),
                );
            }
            TimeScheme::ImexEuler => {
                let mut rhs = f0 + f1;
                rhs.scale(0.5);
                rhs.axpy(-1.0, &b0);
                out.axpy(
                    1.0,
                    &rhs.map_multiplier(|k2| self.dt * self.resolvent(k2) / self.helmholtz(k2)),
                );
            }
        }
        out
    }
}

#[cfg(debug_assertions)]
fn debug_check_skew(u: &SolenoidalField, b: &SolenoidalField) {
    let pairing = b.l2_inner(u);
    let scale = b.l2_norm() * u.l2_norm();
    debug_assert!(
        pairing.abs() <= 1e-10 * scale + f64::MIN_POSITIVE,
        "skew-symmetry violated: (B(u,u),u) = {pairing:e}, scale {scale:e}"
    );
}

/// Energy bookkeeping for one interval `[t_n, t_{n+1}]`.
///
/// Row 0 holds the initial state with zero dissipation, work and residual.
/// Row `n >= 1` holds `kinetic = ‖u_n‖^2`, `gradient = α^2‖∇u_n‖^2` at the
/// node `t_n`, and the midpoint quantities of the interval ending there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub step: usize,
    pub t: f64,
    pub kinetic: f64,
    pub gradient: f64,
    pub dissipation: f64,
    pub work: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub records: Vec<EnergyRecord>,
}

impl EnergyLedger {
    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.records.iter().all(|r| {
            [r.t, r.kinetic, r.gradient, r.dissipation, r.work, r.residual]
                .iter()
                .all(|v| v.is_finite())
        })
    }

    /// CSV with header `step,t,kinetic,gradient,dissipation,work,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,t,kinetic,gradient,dissipation,work,residual")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.step,
                crate::export::fmt_f64(r.t),
                crate::export::fmt_f64(r.kinetic),
                crate::export::fmt_f64(r.gradient),
                crate::export::fmt_f64(r.dissipation),
                crate::export::fmt_f64(r.work),
                crate::export::fmt_f64(r.residual)
            )?;
        }
        Ok(())
    }
}

/// Residual of the energy identity over one step,
/// `|ΔE/(2Δt) + ν‖∇ū‖^2 + να^2‖Aū‖^2 - (f̄, ū)|` with `E = ‖u‖^2 + α^2‖∇u‖^2`
/// and midpoint values `ū = (u_n + u_{n+1})/2`, `f̄ = (f_n + f_{n+1})/2`.
pub fn energy_residual(
    u0: &SolenoidalField,
    u1: &SolenoidalField,
    f0: &SolenoidalField,
    f1: &SolenoidalField,
    params: &PhysicalParams,
    dt: f64,
) -> f64 {
    interval_energy(u0, u1, f0, f1, params, dt).residual
}

struct IntervalEnergy {
    dissipation: f64,
    work: f64,
    residual: f64,
}

fn energy_of(u: &SolenoidalField, alpha: f64) -> (f64, f64) {
    (u.l2_norm().powi(2), alpha * alpha * norms::v_norm(u).powi(2))
}

fn interval_energy(
    u0: &SolenoidalField,
    u1: &SolenoidalField,
    f0: &SolenoidalField,
    f1: &SolenoidalField,
    p: &PhysicalParams,
    dt: f64,
) -> IntervalEnergy {
    let (k0, g0) = energy_of(u0, p.alpha);
    let (k1, g1) = energy_of(u1, p.alpha);
    let mut mid = u0 + u1;
    mid.scale(0.5);
    let mut fmid = f0 + f1;
    fmid.scale(0.5);
    let a2 = p.alpha * p.alpha;
    let dissipation = p.nu * norms::v_norm(&mid).powi(2) + p.nu * a2 * norms::da_norm(&mid).powi(2);
    let work = fmid.l2_inner(&mid);
    let residual = ((k1 + g1 - k0 - g0) / (2.0 * dt) + dissipation - work).abs();
    IntervalEnergy {
        dissipation,
        work,
        residual,
    }
}

/// Discrete form of the a-priori bound
/// `E(t) + ν∫(‖∇u‖^2 + 2α^2‖Au‖^2) <= C∫‖f‖^2 + E(0)` with `C = 1/(ν λ_1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriCheck {
    pub constant: f64,
    /// `max_n lhs_n / rhs_n` (zero when every right-hand side vanishes).
    pub max_ratio: f64,
    pub holds: bool,
}

/// `‖u‖_{L∞(V)}` and `‖u‖_{L2(D(A))}` of the computed trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionBounds {
    pub sup_v: f64,
    pub l2_da: f64,
}

#[derive(Clone, Debug)]
pub struct StateRun {
    pub trajectory: Trajectory,
    pub ledger: EnergyLedger,
    pub apriori: AprioriCheck,
    pub bounds: SolutionBounds,
    /// `max |u| Δt n`, an advisory Courant number; nothing is enforced.
    pub cfl_advisory: f64,
}

/// Integrate the state equation from `u0` under the control `f` (sampled at
/// the `m_steps + 1` nodes of `[0, params.t_final]`).
pub fn integrate_state(
    u0: &SolenoidalField,
    f: &Trajectory,
    params: &PhysicalParams,
    m_steps: usize,
    scheme: TimeScheme,
) -> Result<StateRun> {
    params.validate()?;
    if m_steps < 1 {
        return Err(Error::Argument("m_steps must be at least 1".into()));
    }
    if f.steps() != m_steps {
        return Err(Error::Mesh(format!(
            "control has {} steps, integrator asked for {m_steps}",
            f.steps()
        )));
    }
    let horizon = f.t_final() - f.t0();
    if (horizon - params.t_final).abs() > 1e-12 * params.t_final {
        return Err(Error::Mesh(format!(
            "control spans {horizon}, horizon is {}",
            params.t_final
        )));
    }
    if !u0.modes().same_as(f.modes()) {
        return Err(Error::Dimension(
            "initial state and control use different mode sets".into(),
        ));
    }

    let dt = f.dt();
    let stepper = Stepper::new(params, dt, scheme);
    let n = u0.modes().n() as f64;
    let f_scale = f.fields().iter().map(|g| g.l2_norm()).fold(0.0, f64::max);
    let scale = u0.l2_norm().max(params.t_final * f_scale);
    let ceiling = 1e8 * scale;

    let (k0, g0) = energy_of(u0, params.alpha);
    let mut ledger = EnergyLedger {
        records: vec![EnergyRecord {
            step: 0,
            t: f.t0(),
            kinetic: k0,
            gradient: g0,
            dissipation: 0.0,
            work: 0.0,
            residual: 0.0,
        }],
    };
    let constant = 1.0 / (params.nu * u0.modes().min_k_squared());
    let mut dissipated = 0.0;
    let mut forcing = 0.0;
    let mut max_ratio: f64 = 0.0;
    let mut holds = true;
    let mut cfl: f64 = max_abs(u0) * dt * n;

    let mut fields = Vec::with_capacity(m_steps + 1);
    fields.push(u0.clone());
    for step in 0..m_steps {
        let u = &fields[step];
        let next = stepper.step(u, f.field(step), f.field(step + 1));
        if !next.is_finite() {
            return Err(Error::BlowUp {
                step: step + 1,
                detail: "non-finite coefficient".into(),
            });
        }
        let norm = next.l2_norm();
        if scale > 0.0 && norm > ceiling {
            return Err(Error::BlowUp {
                step: step + 1,
                detail: format!("‖u‖ = {norm:e} exceeds 1e8 x initial scale {scale:e}"),
            });
        }
        let ie = interval_energy(u, &next, f.field(step), f.field(step + 1), params, dt);
        let (k1, g1) = energy_of(&next, params.alpha);
        ledger.records.push(EnergyRecord {
            step: step + 1,
            t: f.time(step + 1),
            kinetic: k1,
            gradient: g1,
            dissipation: ie.dissipation,
            work: ie.work,
            residual: ie.residual,
        });

        let mut mid = u + &next;
        mid.scale(0.5);
        let mut fmid = f.field(step) + f.field(step + 1);
        fmid.scale(0.5);
        let a2 = params.alpha * params.alpha;
        dissipated += dt * params.nu * (norms::v_norm(&mid).powi(2) + 2.0 * a2 * norms::da_norm(&mid).powi(2));
        forcing += dt * fmid.l2_norm().powi(2);
        let lhs = k1 + g1 + dissipated;
        let rhs = constant * forcing + k0 + g0;
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
        if lhs > rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            holds = false;
        }
        cfl = cfl.max(max_abs(&next) * dt * n);
        fields.push(next);
    }
    let trajectory = Trajectory::new(f.t0(), f.t_final(), fields)?;
    let bounds = SolutionBounds {
        sup_v: trajectory.time_sup(norms::v_norm),
        l2_da: trajectory.time_l2(norms::da_norm),
    };
    Ok(StateRun {
        trajectory,
        ledger,
        apriori: AprioriCheck {
            constant,
            max_ratio,
            holds,
        },
        bounds,
        cfl_advisory: cfl,
    })
}

fn max_abs(u: &SolenoidalField) -> f64 {
    let grids = component_grids(u);
    (0..u.modes().len())
        .map(|p| grids.iter().map(|g| g[p] * g[p]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
