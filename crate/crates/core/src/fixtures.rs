//! Built-in problem fixtures, generated in code so runs are reproducible
//! without data files.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adjoint::CostKind;
use crate::error::Result;
use crate::optimizer::{AdmissibleSet, ControlProblem, CostWeights, Targets};
use crate::spectral::{to_spectral, truncate_project, ModeSet, SolenoidalField, VectorGrid};
use crate::state::{integrate_state, PhysicalParams, TimeScheme};
use crate::trajectory::Trajectory;

/// `a cos(x_1) e_2`: the smallest shear mode, an exact solution with
/// `B(u, u) = 0` that decays like `e^{-νt}`.
pub fn single_mode(modes: &Arc<ModeSet>, amplitude: f64) -> SolenoidalField {
    let mut k = vec![0; modes.dim()];
    let mut a = vec![0.0; modes.dim()];
    k[0] = 1;
    a[1] = amplitude;
    SolenoidalField::single_mode(modes, &k, &a).expect("unit shear mode is always retained")
}

/// Taylor-Green vortex `a (sin x cos y, -cos x sin y)` in 2D, and
/// `a (sin x cos y cos z, -cos x sin y cos z, 0)` in 3D.
pub fn taylor_green(modes: &Arc<ModeSet>, amplitude: f64) -> SolenoidalField {
    let dim = modes.dim();
    let npts = modes.len();
    let mut values = vec![0.0; dim * npts];
    for idx in 0..npts {
        let x = modes.grid_coordinate(idx, 0);
        let y = modes.grid_coordinate(idx, 1);
        let z = if dim == 3 {
            modes.grid_coordinate(idx, 2).cos()
        } else {
            1.0
        };
        values[idx] = amplitude * x.sin() * y.cos() * z;
        values[npts + idx] = -amplitude * x.cos() * y.sin() * z;
    }
    let grid = VectorGrid::from_values(modes, values).expect("grid sized from the mode set");
    truncate_project(to_spectral(&grid))
}

/// Random smooth field with L2 norm `scale`.
pub fn random_field(modes: &Arc<ModeSet>, rng: &mut ChaCha8Rng, scale: f64) -> SolenoidalField {
    SolenoidalField::random(modes, rng, 2.0).scaled(scale)
}

/// Control `g(x) (1 + ½ sin(2πt/T))` with a random smooth profile `g`.
pub fn smooth_control(
    modes: &Arc<ModeSet>,
    rng: &mut ChaCha8Rng,
    scale: f64,
    t_final: f64,
    m_steps: usize,
) -> Result<Trajectory> {
    let g = random_field(modes, rng, scale);
    let omega = 2.0 * std::f64::consts::PI / t_final;
    Trajectory::from_fn(0.0, t_final, m_steps, |t| g.scaled(1.0 + 0.5 * (omega * t).sin()))
}

/// Random control with independent smooth samples at every node.
pub fn random_control(
    modes: &Arc<ModeSet>,
    rng: &mut ChaCha8Rng,
    scale: f64,
    t_final: f64,
    m_steps: usize,
) -> Result<Trajectory> {
    Trajectory::from_fn(0.0, t_final, m_steps, |_| random_field(modes, rng, scale))
}

/// Geometry and physics of a tracking fixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixtureSpec {
    pub dim: usize,
    pub n: usize,
    pub m_steps: usize,
    pub params: PhysicalParams,
    pub scheme: TimeScheme,
    /// L2 norm of the initial state.
    pub u0_scale: f64,
    /// L2 norm of the spatial profile of the generating control.
    pub control_scale: f64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 8,
            m_steps: 32,
            params: PhysicalParams {
                nu: 0.1,
                alpha: 0.1,
                t_final: 0.5,
            },
            scheme: TimeScheme::ImexHeun,
            u0_scale: 1.0,
            control_scale: 1.0,
            seed: 7,
        }
    }
}

/// Self-generated tracking data: `u_d` is the state driven by a known
/// control `f*` from a random `u0`, and `u_T = u_d(T)`.
#[derive(Clone, Debug)]
pub struct TrackingFixture {
    pub u0: SolenoidalField,
    pub f_star: Trajectory,
    pub targets: Targets,
}

/// Build the tracking fixture. The targets are generated with
/// `target_alpha` (the Navier-Stokes limit when zero), which may differ from
/// the α the problem is later solved with.
pub fn tracking_fixture(spec: &FixtureSpec, target_alpha: f64) -> Result<TrackingFixture> {
    let modes = ModeSet::new(spec.dim, spec.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u0 = random_field(&modes, &mut rng, spec.u0_scale);
    let f_star = smooth_control(&modes, &mut rng, spec.control_scale, spec.params.t_final, spec.m_steps)?;
    let params = spec.params.with_alpha(target_alpha);
    let run = integrate_state(&u0, &f_star, &params, spec.m_steps, spec.scheme)?;
    let u_t = run.trajectory.last().clone();
    Ok(TrackingFixture {
        u0,
        f_star,
        targets: Targets {
            u_d: run.trajectory,
            u_t,
        },
    })
}

/// A [`ControlProblem`] on the tracking fixture.
pub fn tracking_problem(
    spec: &FixtureSpec,
    weights: CostWeights,
    kind: CostKind,
    set: AdmissibleSet,
) -> Result<(ControlProblem, TrackingFixture)> {
    let fx = tracking_fixture(spec, spec.params.alpha)?;
    let problem = ControlProblem {
        u0: fx.u0.clone(),
        params: spec.params,
        m_steps: spec.m_steps,
        scheme: spec.scheme,
        weights,
        kind,
        set,
        targets: fx.targets.clone(),
    };
    problem.validate()?;
    Ok((problem, fx))
}

/// Smooth fixture for α sweeps: the targets come from a Navier-Stokes
/// (α = 0) run over a short horizon, and the problem uses the `J₀` cost.
pub fn smooth_sweep_problem(spec: &FixtureSpec, weights: CostWeights) -> Result<ControlProblem> {
    let fx = tracking_fixture(spec, 0.0)?;
    let problem = ControlProblem {
        u0: fx.u0,
        params: spec.params.with_alpha(0.0),
        m_steps: spec.m_steps,
        scheme: spec.scheme,
        weights,
        kind: CostKind::L4Tracking,
        set: AdmissibleSet::Unconstrained,
        targets: fx.targets,
    };
    problem.validate()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::nonlinear_b;

    #[test]
    fn taylor_green_is_solenoidal_and_steady_in_2d() {
        let modes = ModeSet::new(2, 8).unwrap();
        let tg = taylor_green(&modes, 1.0);
        assert!(tg.max_divergence() < 1e-14);
        // four modes (±1, ±1), each of magnitude 1/4 per component
        assert!((tg.l2_norm().powi(2) - 0.5 * modes.volume()).abs() < 1e-12 * modes.volume());
        // 2D Taylor-Green is a steady Euler flow: the projected advection vanishes
        let b = nonlinear_b(&tg, &tg, 0.0).unwrap();
        assert!(b.l2_norm() < 1e-12);
    }

    #[test]
    fn taylor_green_3d_norm() {
        let modes = ModeSet::new(3, 8).unwrap();
        let tg = taylor_green(&modes, 2.0);
        assert!(tg.max_divergence() < 1e-13);
        let expected = 4.0 * 0.25 * modes.volume();
        assert!((tg.l2_norm().powi(2) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn tracking_fixture_is_deterministic() {
        let spec = FixtureSpec {
            m_steps: 4,
            ..FixtureSpec::default()
        };
        let a = tracking_fixture(&spec, 0.1).unwrap();
        let b = tracking_fixture(&spec, 0.1).unwrap();
        assert_eq!(a.targets.u_t.coefficients(), b.targets.u_t.coefficients());
    }
}
