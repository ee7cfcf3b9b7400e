//! Linearised nonlinearity, its adjoint, and the backward adjoint sweep.
//!
//! The sweep is the exact transpose of the forward time-stepper in
//! [`crate::state`], taken with respect to the spectral L2 product. The
//! returned multiplier `λ_n` is the Riesz representative, in the trapezoid
//! L2(Q) product, of the derivative of the tracking terms with respect to the
//! control sample `f_n`, so the reduced gradient is exactly `γ_f f + λ`.
//!
//! Consistency with the continuous adjoint system
//! `-m λ' + ν m A λ + B'*(û)λ = source`, `m λ(T) = γ_T (û(T) - u_T)`
//! (with `m = I - α^2 Δ`) is second order at interior nodes. The two end
//! samples carry trapezoid half-weights and agree with the continuous
//! multiplier to first order only.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::spectral::{
    add_spectrum, component_grids, gradient_grids, grids_to_spectrum, helmholtz_apply, norms, scale_spectrum,
    truncate_project, SolenoidalField,
};
use crate::state::{b_op, PhysicalParams, Stepper, TimeScheme};
use crate::trajectory::Trajectory;

/// Which tracking functional drives the adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    /// `γ_u/2 ∫ ‖u - u_d‖²_{D(A)}`
    #[serde(rename = "J")]
    DaTracking,
    /// `γ_u/2 ∫ ‖u - u_d‖⁸_{L⁴}`
    #[serde(rename = "J0")]
    L4Tracking,
}

#[derive(Clone, Debug)]
pub struct AdjointSource {
    pub kind: CostKind,
    pub target: Trajectory,
    pub weight: f64,
}

/// `γ_T` and `u_T`; the continuous terminal value is `m^{-1} γ_T(û(T) - u_T)`.
#[derive(Clone, Debug)]
pub struct TerminalCondition {
    pub weight: f64,
    pub target: SolenoidalField,
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

/// `B'(û)w = B(û, w) + B(w, û)`.
pub fn linearized_b(u_hat: &SolenoidalField, w: &SolenoidalField, alpha: f64) -> Result<SolenoidalField> {
    check_pair(u_hat, w)?;
    Ok(linearized_op(u_hat, w, alpha))
}

pub(crate) fn linearized_op(u_hat: &SolenoidalField, w: &SolenoidalField, alpha: f64) -> SolenoidalField {
    let mut out = b_op(u_hat, w, alpha);
    out.axpy(1.0, &b_op(w, u_hat, alpha));
    out
}

/// Variants of the closed form of `B'*`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClosedForm {
    /// `-α²Δ(λ.∇û)` in the third term; the exact transpose.
    #[default]
    Laplacian,
    /// `-α²(λ.∇û)` in the third term, without the Laplacian. Kept only to
    /// show that this reading fails the transpose identity.
    WithoutLaplacian,
}

/// `B'*(û)λ = P[-û.∇λ + α²Δ(û.∇λ) - α²Δ(λ.∇û) - (∇λ)^T(I - α²Δ)û + α²(λ.∇)Δû]`.
///
/// Evaluated pseudospectrally with the same dealiasing as [`linearized_b`],
/// which makes it the exact transpose in the truncated solenoidal basis:
/// `(B'*(û)λ, w) = (λ, B'(û)w)` to round-off.
pub fn adjoint_b_star(u_hat: &SolenoidalField, lambda: &SolenoidalField, alpha: f64) -> Result<SolenoidalField> {
    adjoint_b_star_with(u_hat, lambda, alpha, ClosedForm::Laplacian)
}

pub fn adjoint_b_star_with(
    u_hat: &SolenoidalField,
    lambda: &SolenoidalField,
    alpha: f64,
    form: ClosedForm,
) -> Result<SolenoidalField> {
    check_pair(u_hat, lambda)?;
    Ok(b_star_op(u_hat, lambda, alpha, form))
}

pub(crate) fn b_star_op(
    u_hat: &SolenoidalField,
    lambda: &SolenoidalField,
    alpha: f64,
    form: ClosedForm,
) -> SolenoidalField {
    let modes = u_hat.modes();
    let dim = modes.dim();
    let len = modes.len();
    let a2 = alpha * alpha;

    let ug = component_grids(u_hat);
    let lg = component_grids(lambda);
    let du = gradient_grids(u_hat);
    let dl = gradient_grids(lambda);
    let zg = component_grids(&helmholtz_apply(u_hat, alpha));
    let dlap = if a2 != 0.0 {
        Some(gradient_grids(&u_hat.map_multiplier(|k2| -k2)))
    } else {
        None
    };

    let mut adv_l = vec![vec![0.0; len]; dim]; // û.∇λ
    let mut adv_u = vec![vec![0.0; len]; dim]; // λ.∇û
    let mut local = vec![vec![0.0; len]; dim]; // -(∇λ)^T z + α²(λ.∇)Δû
    for i in 0..dim {
        for p in 0..len {
            let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
            for j in 0..dim {
                s1 += ug[j][p] * dl[i * dim + j][p];
                s2 += lg[j][p] * du[i * dim + j][p];
                s3 -= dl[j * dim + i][p] * zg[j][p];
                if let Some(dlap) = &dlap {
                    s3 += a2 * lg[j][p] * dlap[i * dim + j][p];
                }
            }
            adv_l[i][p] = s1;
            adv_u[i][p] = s2;
            local[i][p] = s3;
        }
    }
    let mut total = grids_to_spectrum(modes, &local);
    let mut s1 = grids_to_spectrum(modes, &adv_l);
    scale_spectrum(&mut s1, |k2| -(1.0 + a2 * k2));
    add_spectrum(&mut total, &s1);
    if a2 != 0.0 {
        let mut s2 = grids_to_spectrum(modes, &adv_u);
        match form {
            ClosedForm::Laplacian => scale_spectrum(&mut s2, |k2| a2 * k2),
            ClosedForm::WithoutLaplacian => scale_spectrum(&mut s2, |_| -a2),
        }
        add_spectrum(&mut total, &s2);
    }
    truncate_project(total)
}

/// Riesz representative of the derivative of the tracking integrand at one
/// time: `γ_u A²(u - u_d)` for [`CostKind::DaTracking`] and
/// `4γ_u ‖g‖⁴_{L⁴} P[|g|² g]`, `g = u - u_d`, for [`CostKind::L4Tracking`].
pub fn adjoint_rhs(
    u: &SolenoidalField,
    target: &SolenoidalField,
    kind: CostKind,
    weight: f64,
) -> Result<SolenoidalField> {
    check_pair(u, target)?;
    Ok(rhs_op(u, target, kind, weight))
}

pub(crate) fn rhs_op(u: &SolenoidalField, target: &SolenoidalField, kind: CostKind, weight: f64) -> SolenoidalField {
    let g = u - target;
    match kind {
        CostKind::DaTracking => g.map_multiplier(|k2| weight * k2 * k2),
        CostKind::L4Tracking => {
            let modes = g.modes();
            let grids = component_grids(&g);
            let mut cubic = grids.clone();
            let mut sum4 = 0.0;
            for p in 0..modes.len() {
                let s: f64 = grids.iter().map(|c| c[p] * c[p]).sum();
                sum4 += s * s;
                for (c, comp) in cubic.iter_mut().enumerate() {
                    comp[p] = s * grids[c][p];
                }
            }
            let pow4 = modes.volume() / modes.len() as f64 * sum4;
            let mut out = crate::spectral::project_grids(modes, &cubic);
            out.scale(4.0 * weight * pow4);
            out
        }
    }
}

/// Uniform-in-α monitors of the adjoint:
/// `‖λ‖_{L∞(L²)}`, `α²‖∇λ‖_{L∞(L²)}`, `‖∇λ‖_{L²(L²)}`, `α²‖Aλ‖_{L²(L²)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointMonitors {
    pub alpha: f64,
    pub sup_l2: f64,
    pub sup_alpha2_gradl2: f64,
    pub l2l2_grad: f64,
    pub l2l2_alpha2_a: f64,
}

impl AdjointMonitors {
    pub fn measure(lambda: &Trajectory, alpha: f64) -> Self {
        let a2 = alpha * alpha;
        Self {
            alpha,
            sup_l2: lambda.time_sup(norms::l2_norm),
            sup_alpha2_gradl2: a2 * lambda.time_sup(norms::v_norm),
            l2l2_grad: lambda.time_l2(norms::v_norm),
            l2l2_alpha2_a: a2 * lambda.time_l2(norms::da_norm),
        }
    }

    /// `‖λ‖_{L∞(L²)} + α²‖∇λ‖_{L∞(L²)}`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_l2 + self.sup_alpha2_gradl2
    }
}

/// CSV with header `alpha,sup_l2,sup_alpha2_gradl2,l2l2_grad,l2l2_alpha2_A`.
pub fn write_monitor_csv<W: Write>(mut w: W, rows: &[AdjointMonitors]) -> Result<()> {
    writeln!(w, "alpha,sup_l2,sup_alpha2_gradl2,l2l2_grad,l2l2_alpha2_A")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.sup_l2),
            fmt_f64(r.sup_alpha2_gradl2),
            fmt_f64(r.l2l2_grad),
            fmt_f64(r.l2l2_alpha2_a)
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AdjointRun {
    pub lambda: Trajectory,
    pub monitors: AdjointMonitors,
}

/// Backward sweep for the multiplier `λ` along the state `û` produced by
/// `integrate_state(u0, control, params, m, scheme)`.
///
/// The control is needed to replay the Heun predictor stages.
pub fn integrate_adjoint(
    state: &Trajectory,
    control: &Trajectory,
    source: &AdjointSource,
    terminal: &TerminalCondition,
    params: &PhysicalParams,
    scheme: TimeScheme,
) -> Result<AdjointRun> {
    params.validate()?;
    state.check_mesh(control, "state vs control")?;
    state.check_mesh(&source.target, "state vs tracking target")?;
    if !terminal.target.modes().same_as(state.modes()) {
        return Err(Error::Dimension("terminal target uses a different mode set".into()));
    }
    let m = state.steps();
    let dt = state.dt();
    let step = Stepper::new(params, dt, scheme);
    let alpha = params.alpha;
    let src = |n: usize| {
        let mut s = rhs_op(state.field(n), source.target.field(n), source.kind, source.weight);
        s.scale(state.weight(n));
        s
    };

    let mut fbar = vec![SolenoidalField::zeros(state.modes()); m + 1];
    let mut p = src(m);
    p.axpy(terminal.weight, &(state.last() - &terminal.target));
    for n in (0..m).rev() {
        let u = state.field(n);
        let q = p.map_multiplier(|k2| step.resolvent(k2));
        let mut next = match scheme {
            TimeScheme::ImexHeun => {
                let half = q.map_multiplier(|k2| 0.5 * dt / step.helmholtz(k2));
                fbar[n + 1].axpy(1.0, &half);
                let b0 = b_op(u, u, alpha);
                let star = step.predictor(u, control.field(n), &b0);
                let star_bar = b_star_op(&star, &half, alpha, ClosedForm::Laplacian).scaled(-1.0);
                let qs = star_bar.map_multiplier(|k2| step.resolvent(k2));
                let mut abar = half;
                abar.axpy(1.0, &qs.map_multiplier(|k2| dt / step.helmholtz(k2)));
                fbar[n].axpy(1.0, &abar);
                let mut next = (&q + &qs).map_multiplier(|k2| step.explicit(k2));
                next.axpy(-1.0, &b_star_op(u, &abar, alpha, ClosedForm::Laplacian));
                next
            }
            TimeScheme::ImexEuler => {
                let abar = q.map_multiplier(|k2| dt / step.helmholtz(k2));
                fbar[n].axpy(0.5, &abar);
                fbar[n + 1].axpy(0.5, &abar);
                let mut next = q;
                next.axpy(-1.0, &b_star_op(u, &abar, alpha, ClosedForm::Laplacian));
                next
            }
        };
        next.axpy(1.0, &src(n));
        if !next.is_finite() {
            return Err(Error::BlowUp {
                step: n,
                detail: "non-finite adjoint coefficient".into(),
            });
        }
        p = next;
    }
    let fields = fbar
        .into_iter()
        .enumerate()
        .map(|(n, f)| f.scaled(1.0 / state.weight(n)))
        .collect();
    let lambda = Trajectory::new(state.t0(), state.t_final(), fields)?;
    let monitors = AdjointMonitors::measure(&lambda, alpha);
    Ok(AdjointRun { lambda, monitors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transpose_identity_small_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &(d, n) in &[(2, 8), (3, 8)] {
            let modes = ModeSet::new(d, n).unwrap();
            for &alpha in &[0.0, 0.1, 1.0] {
                let u = SolenoidalField::random(&modes, &mut rng, 0.0);
                let l = SolenoidalField::random(&modes, &mut rng, 0.0);
                let w = SolenoidalField::random(&modes, &mut rng, 0.0);
                let lhs = adjoint_b_star(&u, &l, alpha).unwrap().l2_inner(&w);
                let rhs = l.l2_inner(&linearized_b(&u, &w, alpha).unwrap());
                let scale = adjoint_b_star(&u, &l, alpha).unwrap().l2_norm() + 1.0;
                assert!((lhs - rhs).abs() <= 1e-11 * scale, "alpha {alpha}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn linearization_identities() {
        let modes = ModeSet::new(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = SolenoidalField::random(&modes, &mut rng, 0.0);
        let lin = linearized_b(&u, &u, 0.4).unwrap();
        let twice = b_op(&u, &u, 0.4).scaled(2.0);
        assert!((&lin - &twice).max_coefficient() < 1e-14 * twice.max_coefficient());
        let zero = SolenoidalField::zeros(&modes);
        assert_eq!(linearized_b(&zero, &u, 0.4).unwrap().max_coefficient(), 0.0);
        assert_eq!(adjoint_b_star(&zero, &u, 0.4).unwrap().max_coefficient(), 0.0);
    }

    #[test]
    fn da_rhs_multiplier() {
        let modes = ModeSet::new(2, 8).unwrap();
        let g = SolenoidalField::single_mode(&modes, &[1, 1], &[1.0, -1.0]).unwrap();
        let zero = SolenoidalField::zeros(&modes);
        let r = adjoint_rhs(&g, &zero, CostKind::DaTracking, 1.0).unwrap();
        assert!((&r - &g.scaled(4.0)).max_coefficient() == 0.0);
        for kind in [CostKind::DaTracking, CostKind::L4Tracking] {
            assert_eq!(adjoint_rhs(&g, &g, kind, 1.0).unwrap().max_coefficient(), 0.0);
        }
    }

    #[test]
    fn rhs_rejects_mismatched_modes() {
        let a = SolenoidalField::zeros(&ModeSet::new(2, 8).unwrap());
        let b = SolenoidalField::zeros(&ModeSet::new(2, 10).unwrap());
        assert!(adjoint_rhs(&a, &b, CostKind::L4Tracking, 1.0).is_err());
        assert!(adjoint_b_star(&a, &b, 0.0).is_err());
        assert!(linearized_b(&a, &b, 0.0).is_err());
    }
}
