//! Norms and inner products on the discrete solenoidal space.
//!
//! Normalisation: with `u(x) = sum_k c_k e^{ik.x}` on `[0, 2π)^d`,
//! `(u, v) = (2π)^d sum_k Re(conj(c_k) . d_k)`, which is the exact L2
//! integral of the trigonometric polynomials. Gradient-type norms weight the
//! same sum by `|k|^2` (V), `|k|^4` (D(A)) or `|k|^-4` (the dual of D(A)).
//! The L4 norm is a grid quadrature `((2π)^d/N sum_x |u(x)|^4)^(1/4)`; that
//! discrete functional is what the L4 tracking cost differentiates.

use super::ops::component_grids;
use super::SolenoidalField;
use crate::error::{Error, Result};
use crate::sum::Accumulator;

fn check(u: &SolenoidalField, v: &SolenoidalField) -> Result<()> {
    if u.modes().same_as(v.modes()) {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "fields on {:?} and {:?}",
            u.modes(),
            v.modes()
        )))
    }
}

pub(crate) fn weighted_inner(u: &SolenoidalField, v: &SolenoidalField, w: impl Fn(f64) -> f64) -> f64 {
    let modes = u.modes();
    let len = modes.len();
    let (a, b) = (u.coefficients(), v.coefficients());
    let mut sum = Accumulator::default();
    for c in 0..modes.dim() {
        for idx in 0..len {
            let (x, y) = (a[c * len + idx], b[c * len + idx]);
            sum.add(w(modes.k_squared(idx)) * (x.re * y.re + x.im * y.im));
        }
    }
    modes.volume() * sum.value()
}

pub fn l2_inner(u: &SolenoidalField, v: &SolenoidalField) -> Result<f64> {
    check(u, v)?;
    Ok(u.l2_inner(v))
}

pub fn l2_norm(u: &SolenoidalField) -> f64 {
    u.l2_norm()
}

/// `(∇u, ∇v)`.
pub fn v_inner(u: &SolenoidalField, v: &SolenoidalField) -> Result<f64> {
    check(u, v)?;
    Ok(weighted_inner(u, v, |k2| k2))
}

/// `‖∇u‖`.
pub fn v_norm(u: &SolenoidalField) -> f64 {
    weighted_inner(u, u, |k2| k2).max(0.0).sqrt()
}

/// `(Au, Av)`.
pub fn da_inner(u: &SolenoidalField, v: &SolenoidalField) -> Result<f64> {
    check(u, v)?;
    Ok(weighted_inner(u, v, |k2| k2 * k2))
}

/// `‖Au‖`.
pub fn da_norm(u: &SolenoidalField) -> f64 {
    weighted_inner(u, u, |k2| k2 * k2).max(0.0).sqrt()
}

/// `‖A^{-1}u‖`, the norm of `u` as an element of `D(A)'`.
pub fn dual_da_norm(u: &SolenoidalField) -> f64 {
    weighted_inner(u, u, |k2| if k2 > 0.0 { 1.0 / (k2 * k2) } else { 0.0 })
        .max(0.0)
        .sqrt()
}

/// `‖u‖_{L^4}^4` by grid quadrature.
pub fn l4_norm_pow4(u: &SolenoidalField) -> f64 {
    let modes = u.modes();
    let grids = component_grids(u);
    let sum: Accumulator = (0..modes.len())
        .map(|p| {
            let s: f64 = grids.iter().map(|g| g[p] * g[p]).sum();
            s * s
        })
        .collect();
    modes.volume() / modes.len() as f64 * sum.value()
}

pub fn l4_norm(u: &SolenoidalField) -> f64 {
    l4_norm_pow4(u).powf(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{to_physical, ModeSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_wavenumber_norms_coincide() {
        let modes = ModeSet::new(2, 8).unwrap();
        let u = SolenoidalField::single_mode(&modes, &[0, 1], &[3.0, 0.0]).unwrap();
        let l2 = l2_norm(&u);
        assert!((v_norm(&u) - l2).abs() < 1e-14 * l2);
        assert!((da_norm(&u) - l2).abs() < 1e-14 * l2);
        // ‖a cos(y)‖^2 = a^2 (2π)^2 / 2
        let expected = (9.0 * modes.volume() / 2.0f64).sqrt();
        assert!((l2 - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn l4_of_single_mode_matches_closed_form() {
        // ∫ (a cos y)^4 = a^4 (2π)^2 3/8
        let modes = ModeSet::new(2, 16).unwrap();
        let u = SolenoidalField::single_mode(&modes, &[0, 1], &[2.0, 0.0]).unwrap();
        let expected = 16.0 * modes.volume() * 3.0 / 8.0;
        assert!((l4_norm_pow4(&u) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn parseval_against_grid_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(d, n) in &[(2, 8), (2, 16), (3, 8)] {
            let modes = ModeSet::new(d, n).unwrap();
            let u = SolenoidalField::random(&modes, &mut rng, 0.0).scaled(3.7);
            let grid = to_physical(u.as_spectrum());
            let spectral = l2_norm(&u).powi(2);
            assert!((grid.l2_norm_squared() - spectral).abs() <= 1e-12 * spectral);
        }
    }

    #[test]
    fn poincare_chain_and_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let modes = ModeSet::new(2, 16).unwrap();
        for _ in 0..20 {
            let u = SolenoidalField::random(&modes, &mut rng, 0.5);
            assert!(l2_norm(&u) <= v_norm(&u) * (1.0 + 1e-14));
            assert!(v_norm(&u) <= da_norm(&u) * (1.0 + 1e-14));
            let c = -2.5;
            let cu = u.scaled(c);
            for (a, b) in [
                (l2_norm(&cu), l2_norm(&u)),
                (v_norm(&cu), v_norm(&u)),
                (da_norm(&cu), da_norm(&u)),
                (l4_norm(&cu), l4_norm(&u)),
                (dual_da_norm(&cu), dual_da_norm(&u)),
            ] {
                assert!((a - c.abs() * b).abs() < 1e-13 * a);
            }
        }
    }

    #[test]
    fn inner_products_reject_mismatched_meshes() {
        let a = SolenoidalField::zeros(&ModeSet::new(2, 8).unwrap());
        let b = SolenoidalField::zeros(&ModeSet::new(3, 8).unwrap());
        assert!(l2_inner(&a, &b).is_err());
        assert!(v_inner(&a, &b).is_err());
        assert!(da_inner(&a, &b).is_err());
    }
}
