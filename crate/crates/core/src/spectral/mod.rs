//! Periodic-torus spectral representation: the truncated divergence-free
//! Fourier basis, Leray projection, the Helmholtz and Stokes multipliers,
//! grid transforms and the norms used throughout the solvers.

mod field;
mod modes;
pub mod norms;
mod ops;
pub mod snapshot;

pub use field::{SolenoidalField, VectorGrid, VectorSpectrum};
pub use modes::{dealias_cutoff, ModeSet};
pub use ops::{helmholtz_apply, helmholtz_solve, leray_project, stokes_apply, stokes_solve, to_physical, to_spectral};

pub(crate) use ops::{
    add_spectrum, component_grids, gradient_grids, grids_to_spectrum, project_grids, scale_spectrum, truncate_project,
};
