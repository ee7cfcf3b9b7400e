use std::sync::Arc;

use num_complex::Complex64;

use super::field::{project_mode, SolenoidalField, VectorGrid, VectorSpectrum};
use super::ModeSet;
use crate::error::{Error, Result};

/// Leray projection of raw coefficients onto the discrete solenoidal space.
///
/// Each mode is multiplied by `I - k k^T/|k|^2`; the mean mode and modes
/// outside the dealiasing band are zeroed and the Hermitian part is kept, so
/// the result is the projection of the real part of `raw`.
pub fn leray_project(modes: &Arc<ModeSet>, raw: &VectorSpectrum) -> Result<SolenoidalField> {
    if !modes.same_as(raw.modes()) {
        return Err(Error::Dimension(format!(
            "spectrum lives on {:?}, expected {:?}",
            raw.modes(),
            modes
        )));
    }
    Ok(truncate_project(raw.clone()))
}

pub(crate) fn truncate_project(mut spec: VectorSpectrum) -> SolenoidalField {
    let modes = Arc::clone(spec.modes());
    let dim = modes.dim();
    let len = modes.len();
    {
        let coeff = spec.coefficients_mut();
        for idx in 0..len {
            let conj = modes.conjugate_index(idx);
            if conj < idx {
                continue;
            }
            let mut v = [Complex64::new(0.0, 0.0); 3];
            if idx != 0 && modes.is_retained(idx) {
                for c in 0..dim {
                    v[c] = 0.5 * (coeff[c * len + idx] + coeff[c * len + conj].conj());
                }
                project_mode(modes.wavevector(idx), modes.k_squared(idx), &mut v[..dim]);
            }
            for c in 0..dim {
                coeff[c * len + idx] = v[c];
                coeff[c * len + conj] = v[c].conj();
            }
        }
    }
    SolenoidalField::from_spectrum_unchecked(spec)
}

/// `(I - α^2 Δ) u`: mode-wise multiplier `1 + α^2 |k|^2`.
pub fn helmholtz_apply(u: &SolenoidalField, alpha: f64) -> SolenoidalField {
    let a2 = alpha * alpha;
    u.map_multiplier(|k2| 1.0 + a2 * k2)
}

/// Inverse of [`helmholtz_apply`]; the multiplier is at least one.
pub fn helmholtz_solve(u: &SolenoidalField, alpha: f64) -> SolenoidalField {
    let a2 = alpha * alpha;
    u.map_multiplier(|k2| 1.0 / (1.0 + a2 * k2))
}

/// Stokes operator `A = -PΔ`, multiplier `|k|^2` on solenoidal fields.
pub fn stokes_apply(u: &SolenoidalField) -> SolenoidalField {
    u.map_multiplier(|k2| k2)
}

/// `A^{-1}` on mean-free fields.
pub fn stokes_solve(u: &SolenoidalField) -> SolenoidalField {
    u.map_multiplier(|k2| if k2 > 0.0 { 1.0 / k2 } else { 0.0 })
}

/// Evaluate a spectrum on the `n^d` grid, `u(x_j) = sum_k c_k e^{ik.x_j}`.
/// Imaginary round-off is discarded.
pub fn to_physical(u: &VectorSpectrum) -> VectorGrid {
    let modes = u.modes();
    let mut values = Vec::with_capacity(modes.dim() * modes.len());
    for c in 0..modes.dim() {
        values.extend(scalar_to_grid(modes, u.component(c)));
    }
    VectorGrid::from_values(modes, values).expect("grid size follows the mode set")
}

/// Inverse of [`to_physical`]: `c_k = N^{-1} sum_j u(x_j) e^{-ik.x_j}`.
pub fn to_spectral(grid: &VectorGrid) -> VectorSpectrum {
    let modes = grid.modes();
    let mut coeff = Vec::with_capacity(modes.dim() * modes.len());
    for c in 0..modes.dim() {
        coeff.extend(grid_to_scalar(modes, grid.component(c)));
    }
    VectorSpectrum::from_coefficients(modes, coeff).expect("spectrum size follows the mode set")
}

pub(crate) fn scalar_to_grid(modes: &ModeSet, coeff: &[Complex64]) -> Vec<f64> {
    let mut buf = coeff.to_vec();
    modes.fft_inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

pub(crate) fn grid_to_scalar(modes: &ModeSet, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    modes.fft_forward(&mut buf);
    let inv = 1.0 / modes.len() as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    buf
}

/// Grid samples of each component.
pub(crate) fn component_grids(u: &SolenoidalField) -> Vec<Vec<f64>> {
    let modes = u.modes();
    (0..modes.dim())
        .map(|c| scalar_to_grid(modes, u.component(c)))
        .collect()
}

/// Grid samples of `∂_j u_i`, stored at `i * d + j`.
pub(crate) fn gradient_grids(u: &SolenoidalField) -> Vec<Vec<f64>> {
    let modes = u.modes();
    let dim = modes.dim();
    let len = modes.len();
    let mut out = Vec::with_capacity(dim * dim);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..dim {
        let comp = u.component(i);
        for j in 0..dim {
            for (idx, slot) in buf.iter_mut().enumerate() {
                let k = modes.wavevector(idx)[j] as f64;
                *slot = Complex64::new(0.0, k) * comp[idx];
            }
            out.push(scalar_to_grid(modes, &buf));
        }
    }
    out
}

/// Forward transform of per-component grids, without projection.
pub(crate) fn grids_to_spectrum(modes: &Arc<ModeSet>, comps: &[Vec<f64>]) -> VectorSpectrum {
    let mut coeff = Vec::with_capacity(modes.dim() * modes.len());
    for comp in comps {
        coeff.extend(grid_to_scalar(modes, comp));
    }
    VectorSpectrum::from_coefficients(modes, coeff).expect("one grid per component")
}

/// Dealias and Leray-project a vector field given on the grid.
pub(crate) fn project_grids(modes: &Arc<ModeSet>, comps: &[Vec<f64>]) -> SolenoidalField {
    truncate_project(grids_to_spectrum(modes, comps))
}

/// Apply a real multiplier of `|k|^2` to a raw spectrum in place.
pub(crate) fn scale_spectrum(spec: &mut VectorSpectrum, m: impl Fn(f64) -> f64) {
    let modes = Arc::clone(spec.modes());
    let len = modes.len();
    let coeff = spec.coefficients_mut();
    for c in 0..modes.dim() {
        for idx in 0..len {
            coeff[c * len + idx] *= m(modes.k_squared(idx));
        }
    }
}

/// `a += b`.
pub(crate) fn add_spectrum(a: &mut VectorSpectrum, b: &VectorSpectrum) {
    for (x, y) in a.coefficients_mut().iter_mut().zip(b.coefficients()) {
        *x += y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::norms;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projector_annihilates_gradients() {
        let modes = ModeSet::new(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scalar = SolenoidalField::random(&modes, &mut rng, 0.0);
        // any Hermitian scalar works; reuse the first component
        let grad = VectorSpectrum::gradient_of(&modes, scalar.component(0)).unwrap();
        let p = leray_project(&modes, &grad).unwrap();
        assert!(p.max_coefficient() < 1e-15);
    }

    #[test]
    fn projector_hand_values() {
        let modes = ModeSet::new(2, 8).unwrap();
        let mut raw = VectorSpectrum::zeros(&modes);
        let i10 = modes.index(&[1, 0]).unwrap();
        let i01 = modes.index(&[0, 1]).unwrap();
        for idx in [i10, modes.conjugate_index(i10), i01, modes.conjugate_index(i01)] {
            raw.set_mode(idx, &[c(1.0), c(0.0)]);
        }
        let p = leray_project(&modes, &raw).unwrap();
        assert_eq!(p.mode(i10)[0], c(0.0));
        assert_eq!(p.mode(i10)[1], c(0.0));
        assert_eq!(p.mode(i01)[0], c(1.0));
        assert_eq!(p.mode(i01)[1], c(0.0));
    }

    #[test]
    fn projector_is_idempotent_on_solenoidal_input() {
        let modes = ModeSet::new(3, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = SolenoidalField::random(&modes, &mut rng, 1.0);
        let p = leray_project(&modes, u.as_spectrum()).unwrap();
        assert!((&p - &u).max_coefficient() < 1e-16);
    }

    #[test]
    fn projector_rejects_foreign_mode_set() {
        let a = ModeSet::new(2, 8).unwrap();
        let b = ModeSet::new(2, 16).unwrap();
        assert!(leray_project(&a, &VectorSpectrum::zeros(&b)).is_err());
    }

    #[test]
    fn helmholtz_multiplier() {
        let modes = ModeSet::new(2, 8).unwrap();
        let u = SolenoidalField::single_mode(&modes, &[1, 0], &[0.0, 1.0]).unwrap();
        let doubled = helmholtz_apply(&u, 1.0);
        assert!((&doubled - &u.scaled(2.0)).max_coefficient() == 0.0);
        let same = helmholtz_apply(&u, 0.0);
        assert!((&same - &u).max_coefficient() == 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = SolenoidalField::random(&modes, &mut rng, 0.0);
        let back = helmholtz_solve(&helmholtz_apply(&r, 0.7), 0.7);
        assert!((&back - &r).max_coefficient() < 1e-16);
    }

    #[test]
    fn stokes_multiplier_and_self_adjointness() {
        let modes = ModeSet::new(2, 8).unwrap();
        let u = SolenoidalField::single_mode(&modes, &[0, 2], &[1.5, 0.0]).unwrap();
        assert!((&stokes_apply(&u) - &u.scaled(4.0)).max_coefficient() == 0.0);
        assert_eq!(stokes_apply(&SolenoidalField::zeros(&modes)).max_coefficient(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = SolenoidalField::random(&modes, &mut rng, 0.0);
            let b = SolenoidalField::random(&modes, &mut rng, 0.0);
            let lhs = norms::l2_inner(&stokes_apply(&a), &b).unwrap();
            let rhs = norms::l2_inner(&a, &stokes_apply(&b)).unwrap();
            assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn single_mode_samples_match_cosine() {
        let modes = ModeSet::new(2, 8).unwrap();
        let u = SolenoidalField::single_mode(&modes, &[1, 2], &[2.0, -1.0]).unwrap();
        let g = to_physical(u.as_spectrum());
        for idx in 0..modes.len() {
            let x = modes.grid_coordinate(idx, 0);
            let y = modes.grid_coordinate(idx, 1);
            let phase = (x + 2.0 * y).cos();
            assert!((g.component(0)[idx] - 2.0 * phase).abs() < 1e-14);
            assert!((g.component(1)[idx] + phase).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_zero_grid() {
        let modes = ModeSet::new(3, 8).unwrap();
        let g = to_physical(SolenoidalField::zeros(&modes).as_spectrum());
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_shape_mismatch_is_an_error() {
        let modes = ModeSet::new(2, 8).unwrap();
        assert!(VectorGrid::from_values(&modes, vec![0.0; 10]).is_err());
    }
}
