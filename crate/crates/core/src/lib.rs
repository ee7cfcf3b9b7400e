//! Spectral-Galerkin solvers for distributed optimal control of the
//! Navier-Stokes-α equations on the periodic torus.
//!
//! * [`spectral`]: Fourier basis, Leray projection, Helmholtz/Stokes
//!   multipliers, transforms, norms and the `.nsaf` snapshot format.
//! * [`state`]: the NS-α nonlinearity and the forward IMEX integrator.
//! * [`adjoint`]: linearisation, its transpose and the backward sweep.
//! * [`optimizer`]: costs, reduced gradient, admissible sets and projected
//!   gradient descent.
//! * [`alpha_limit`]: sweeps over α towards the Navier-Stokes limit.
//! * [`fixtures`]: built-in initial states, controls and tracking problems.
//! * [`export`] and [`trajectory`]: CSV formatting and time-discrete fields.

pub mod adjoint;
pub mod alpha_limit;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod optimizer;
pub mod spectral;
pub mod state;
mod sum;
pub mod trajectory;

pub use error::{Error, Result};
pub use spectral::{ModeSet, SolenoidalField, VectorGrid, VectorSpectrum};
pub use state::{integrate_state, nonlinear_b, PhysicalParams, StateRun, TimeScheme};
pub use trajectory::Trajectory;
