//! Shared benchmark inputs. The benchmarks themselves live in `benches/`.

use std::sync::Arc;

use nsalpha_core::adjoint::CostKind;
use nsalpha_core::fixtures::{self, FixtureSpec};
use nsalpha_core::optimizer::{AdmissibleSet, ControlProblem, CostWeights};
use nsalpha_core::{ModeSet, PhysicalParams, SolenoidalField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two random smooth fields of unit norm.
pub fn field_pair(dim: usize, n: usize) -> (SolenoidalField, SolenoidalField) {
    let modes: Arc<ModeSet> = ModeSet::new(dim, n).expect("valid mesh");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (
        fixtures::random_field(&modes, &mut rng, 1.0),
        fixtures::random_field(&modes, &mut rng, 1.0),
    )
}

/// Tracking problem on a `dim`-dimensional mesh with `n` points per axis.
pub fn tracking_problem(dim: usize, n: usize, m_steps: usize, kind: CostKind) -> ControlProblem {
    let spec = FixtureSpec {
        dim,
        n,
        m_steps,
        params: PhysicalParams {
            nu: 0.1,
            alpha: 0.1,
            t_final: 0.5,
        },
        u0_scale: 0.5,
        control_scale: 0.5,
        ..FixtureSpec::default()
    };
    let weights = CostWeights {
        gamma_u: 1.0,
        gamma_t: 1.0,
        gamma_f: 1.0,
    };
    fixtures::tracking_problem(&spec, weights, kind, AdmissibleSet::Unconstrained)
        .expect("fixture parameters are valid")
        .0
}
