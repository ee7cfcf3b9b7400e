use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::ModeSet;
use crate::error::{Error, Result};
use crate::sum::Accumulator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Raw spectral coefficients of a vector field, one block of `modes.len()`
/// complex numbers per component, so that `u(x) = sum_k c_k e^{ik.x}`.
#[derive(Clone, Debug)]
pub struct VectorSpectrum {
    modes: Arc<ModeSet>,
    coeff: Vec<Complex64>,
}

impl VectorSpectrum {
    pub fn zeros(modes: &Arc<ModeSet>) -> Self {
        Self {
            coeff: vec![ZERO; modes.dim() * modes.len()],
            modes: Arc::clone(modes),
        }
    }

    pub fn from_coefficients(modes: &Arc<ModeSet>, coeff: Vec<Complex64>) -> Result<Self> {
        let expected = modes.dim() * modes.len();
        if coeff.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} coefficients for d={} n={}, got {}",
                modes.dim(),
                modes.n(),
                coeff.len()
            )));
        }
        Ok(Self {
            modes: Arc::clone(modes),
            coeff,
        })
    }

    /// `i k phi_k`, the spectrum of a gradient field.
    pub fn gradient_of(modes: &Arc<ModeSet>, phi: &[Complex64]) -> Result<Self> {
        if phi.len() != modes.len() {
            return Err(Error::Dimension(format!(
                "scalar spectrum has {} entries, mode set has {}",
                phi.len(),
                modes.len()
            )));
        }
        let mut out = Self::zeros(modes);
        let len = modes.len();
        for (idx, &p) in phi.iter().enumerate() {
            for (a, &k) in modes.wavevector(idx).iter().enumerate() {
                out.coeff[a * len + idx] = Complex64::new(0.0, k as f64) * p;
            }
        }
        Ok(out)
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeff
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.modes.len();
        &self.coeff[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.modes.len();
        &mut self.coeff[c * len..(c + 1) * len]
    }

    /// Coefficient vector at one mode; unused trailing entries are zero.
    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        let len = self.modes.len();
        let mut v = [ZERO; 3];
        for (c, slot) in v.iter_mut().enumerate().take(self.modes.dim()) {
            *slot = self.coeff[c * len + idx];
        }
        v
    }

    pub fn set_mode(&mut self, idx: usize, value: &[Complex64]) {
        let len = self.modes.len();
        for (c, &v) in value.iter().enumerate().take(self.modes.dim()) {
            self.coeff[c * len + idx] = v;
        }
    }
}

/// Spectral coefficients of a real, mean-free, divergence-free vector field
/// supported on the retained (dealiased) modes.
///
/// Invariants: `k . c_k = 0`, `c_{-k} = conj(c_k)`, `c_0 = 0`, and `c_k = 0`
/// outside the dealiasing band. Every constructor and operator in this crate
/// preserves them.
#[derive(Clone, Debug)]
pub struct SolenoidalField {
    spec: VectorSpectrum,
}

impl SolenoidalField {
    pub fn zeros(modes: &Arc<ModeSet>) -> Self {
        Self {
            spec: VectorSpectrum::zeros(modes),
        }
    }

    /// The field `a cos(k.x)`; requires `a . k = 0` and a retained, non-zero `k`.
    pub fn single_mode(modes: &Arc<ModeSet>, k: &[i32], amplitude: &[f64]) -> Result<Self> {
        let dim = modes.dim();
        if k.len() != dim || amplitude.len() != dim {
            return Err(Error::Dimension(format!(
                "wavevector and amplitude must have {dim} components"
            )));
        }
        let idx = modes
            .index(k)
            .ok_or_else(|| Error::Argument(format!("wavevector {k:?} is not representable")))?;
        if idx == 0 || !modes.is_retained(idx) {
            return Err(Error::Argument(format!(
                "wavevector {k:?} is the mean mode or outside the dealiasing band"
            )));
        }
        let dot: f64 = k.iter().zip(amplitude).map(|(&kk, &a)| kk as f64 * a).sum();
        let scale = amplitude.iter().map(|a| a.abs()).fold(0.0, f64::max) * k.len() as f64;
        if dot.abs() > 1e-14 * scale.max(1.0) * modes.k_squared(idx).sqrt() {
            return Err(Error::Argument("amplitude is not orthogonal to the wavevector".into()));
        }
        let mut spec = VectorSpectrum::zeros(modes);
        let half: Vec<Complex64> = amplitude.iter().map(|&a| Complex64::new(0.5 * a, 0.0)).collect();
        spec.set_mode(idx, &half);
        spec.set_mode(modes.conjugate_index(idx), &half);
        Ok(Self { spec })
    }

    /// Random smooth field with unit L2 norm; mode amplitudes decay like
    /// `(1 + |k|^2)^(-decay/2)`.
    pub fn random<R: Rng + ?Sized>(modes: &Arc<ModeSet>, rng: &mut R, decay: f64) -> Self {
        let dim = modes.dim();
        let mut spec = VectorSpectrum::zeros(modes);
        for idx in modes.active_modes() {
            let conj = modes.conjugate_index(idx);
            if conj < idx {
                continue;
            }
            let weight = (1.0 + modes.k_squared(idx)).powf(-0.5 * decay);
            let mut v = [ZERO; 3];
            for slot in v.iter_mut().take(dim) {
                *slot = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * weight;
            }
            project_mode(modes.wavevector(idx), modes.k_squared(idx), &mut v[..dim]);
            spec.set_mode(idx, &v[..dim]);
            let c: Vec<Complex64> = v[..dim].iter().map(|z| z.conj()).collect();
            spec.set_mode(conj, &c);
        }
        let mut field = Self { spec };
        let norm = field.l2_norm();
        if norm > 0.0 {
            field.scale(1.0 / norm);
        }
        field
    }

    pub(crate) fn from_spectrum_unchecked(spec: VectorSpectrum) -> Self {
        Self { spec }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.spec.modes
    }

    pub fn as_spectrum(&self) -> &VectorSpectrum {
        &self.spec
    }

    pub fn into_spectrum(self) -> VectorSpectrum {
        self.spec
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.spec.coeff
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        self.spec.component(c)
    }

    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        self.spec.mode(idx)
    }

    /// `max_k |k . c_k|`.
    pub fn max_divergence(&self) -> f64 {
        let modes = self.modes();
        (0..modes.len())
            .map(|idx| {
                let c = self.mode(idx);
                modes
                    .wavevector(idx)
                    .iter()
                    .zip(c.iter())
                    .map(|(&k, z)| z * k as f64)
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.spec.coeff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `c_{-k} = conj(c_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let modes = self.modes();
        let mut worst = 0.0f64;
        for idx in 0..modes.len() {
            let a = self.mode(idx);
            let b = self.mode(modes.conjugate_index(idx));
            for c in 0..modes.dim() {
                worst = worst.max((a[c] - b[c].conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&mut self, a: f64) {
        self.spec.coeff.iter_mut().for_each(|z| *z *= a);
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SolenoidalField) {
        assert_same(self.modes(), x.modes());
        for (y, xv) in self.spec.coeff.iter_mut().zip(&x.spec.coeff) {
            *y += xv * a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.spec.coeff.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Multiply mode `k` by the real multiplier `m(|k|^2)`.
    pub(crate) fn map_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let modes = self.modes();
        let len = modes.len();
        let mut out = self.clone();
        for c in 0..modes.dim() {
            for idx in 0..len {
                out.spec.coeff[c * len + idx] *= m(modes.k_squared(idx));
            }
        }
        out
    }

    /// Euclidean pairing `sum_k Re(conj(a_k) . b_k)` without the volume factor.
    pub(crate) fn raw_dot(&self, other: &SolenoidalField) -> f64 {
        assert_same(self.modes(), other.modes());
        self.spec
            .coeff
            .iter()
            .zip(&other.spec.coeff)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .collect::<Accumulator>()
            .value()
    }

    /// L2 inner product (see [`crate::spectral::norms`]).
    pub fn l2_inner(&self, other: &SolenoidalField) -> f64 {
        self.modes().volume() * self.raw_dot(other)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).max(0.0).sqrt()
    }
}

pub(crate) fn assert_same(a: &ModeSet, b: &ModeSet) {
    assert!(a.same_as(b), "fields live on different mode sets ({a:?} vs {b:?})");
}

/// `v <- (I - k k^T/|k|^2) v`.
pub(crate) fn project_mode(k: &[i32], k2: f64, v: &mut [Complex64]) {
    if k2 == 0.0 {
        v.iter_mut().for_each(|z| *z = ZERO);
        return;
    }
    let dot: Complex64 = k.iter().zip(v.iter()).map(|(&kk, z)| z * kk as f64).sum();
    let s = dot / k2;
    for (z, &kk) in v.iter_mut().zip(k) {
        *z -= s * kk as f64;
    }
}

impl Add for &SolenoidalField {
    type Output = SolenoidalField;
    fn add(self, rhs: &SolenoidalField) -> SolenoidalField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SolenoidalField {
    type Output = SolenoidalField;
    fn sub(self, rhs: &SolenoidalField) -> SolenoidalField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &SolenoidalField {
    type Output = SolenoidalField;
    fn neg(self) -> SolenoidalField {
        self.scaled(-1.0)
    }
}

impl Mul<&SolenoidalField> for f64 {
    type Output = SolenoidalField;
    fn mul(self, rhs: &SolenoidalField) -> SolenoidalField {
        rhs.scaled(self)
    }
}

/// Physical-space samples of a vector field, one block of `n^d` values per
/// component, ordered like the spectral storage.
#[derive(Clone, Debug)]
pub struct VectorGrid {
    modes: Arc<ModeSet>,
    values: Vec<f64>,
}

impl VectorGrid {
    pub fn from_values(modes: &Arc<ModeSet>, values: Vec<f64>) -> Result<Self> {
        let expected = modes.dim() * modes.len();
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "grid has {} samples, expected {expected}",
                values.len()
            )));
        }
        Ok(Self {
            modes: Arc::clone(modes),
            values,
        })
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.modes.len();
        &self.values[c * len..(c + 1) * len]
    }

    /// Quadrature `(2π)^d / N sum_x |u(x)|^2`.
    pub fn l2_norm_squared(&self) -> f64 {
        let w = self.modes.volume() / self.modes.len() as f64;
        w * self.values.iter().map(|v| v * v).sum::<f64>()
    }
}
