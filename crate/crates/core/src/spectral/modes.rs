use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Truncated Fourier basis on the torus `[0, 2π)^d`.
///
/// Modes are stored in FFT order on an `n^d` grid with axis 0 varying slowest.
/// Along each axis the integer wavenumber of index `i` is `i` for `i <= n/2`
/// and `i - n` otherwise, so components lie in `[-n/2 + 1, n/2]`.
///
/// A mode is *retained* (dealiased) when `3|k_i| < n` on every axis. For `n`
/// not divisible by three this is the usual `|k_i| <= floor(n/3)` cutoff; for
/// `n` divisible by three the cutoff drops to `n/3 - 1`, which keeps every
/// quadratic product of retained fields free of aliasing back into the
/// retained band. Nyquist modes are never retained, so every retained `k` has
/// its partner `-k` retained as well.
pub struct ModeSet {
    dim: usize,
    n: usize,
    len: usize,
    cutoff: i32,
    wavevectors: Vec<[i32; 3]>,
    k2: Vec<f64>,
    retained: Vec<bool>,
    conjugate: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeSet")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

impl ModeSet {
    pub fn new(dim: usize, n: usize) -> Result<Arc<Self>> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Argument(format!("spatial dimension must be 2 or 3, got {dim}")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "grid size must be even and at least 4, got {n}"
            )));
        }
        let len = n.pow(dim as u32);
        let cutoff = dealias_cutoff(n);
        let mut wavevectors = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut retained = Vec::with_capacity(len);
        for idx in 0..len {
            let k = wavevector_of(idx, dim, n);
            let sq = k.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>();
            wavevectors.push(k);
            k2.push(sq);
            retained.push(k[..dim].iter().all(|c| c.abs() <= cutoff));
        }
        let conjugate = (0..len)
            .map(|idx| {
                let k = wavevectors[idx];
                let mut neg = [0i32; 3];
                for a in 0..dim {
                    neg[a] = -k[a];
                }
                index_of(&neg, dim, n)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Arc::new(Self {
            dim,
            n,
            len,
            cutoff,
            wavevectors,
            k2,
            retained,
            conjugate,
            forward,
            inverse,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, equal to the number of stored modes per component.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest retained `|k_i|`.
    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    pub fn domain_period(&self) -> f64 {
        2.0 * PI
    }

    /// `(2π)^d`, the measure of the torus.
    pub fn volume(&self) -> f64 {
        self.domain_period().powi(self.dim as i32)
    }

    pub fn wavevector(&self, idx: usize) -> &[i32] {
        &self.wavevectors[idx][..self.dim]
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    /// Dealiasing mask: true for modes kept after nonlinear products.
    pub fn is_retained(&self, idx: usize) -> bool {
        self.retained[idx]
    }

    pub fn is_mean(&self, idx: usize) -> bool {
        idx == 0
    }

    /// Index of `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        self.conjugate[idx]
    }

    /// Flat index of a wavevector, or `None` when it is not representable.
    pub fn index(&self, k: &[i32]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let half = (self.n / 2) as i32;
        if k.iter().any(|&c| c <= -half || c > half) {
            return None;
        }
        let mut kk = [0i32; 3];
        kk[..self.dim].copy_from_slice(k);
        Some(index_of(&kk, self.dim, self.n))
    }

    /// Retained, non-mean mode indices.
    pub fn active_modes(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.len).filter(move |&i| self.retained[i])
    }

    /// Smallest non-zero `|k|^2`, the Poincaré constant of the mean-free torus.
    pub fn min_k_squared(&self) -> f64 {
        1.0
    }

    /// Grid coordinate of point `idx` along `axis`.
    pub fn grid_coordinate(&self, idx: usize, axis: usize) -> f64 {
        let stride = self.n.pow((self.dim - 1 - axis) as u32);
        let i = (idx / stride) % self.n;
        self.domain_period() * i as f64 / self.n as f64
    }

    pub(crate) fn same_as(&self, other: &ModeSet) -> bool {
        std::ptr::eq(self, other) || (self.dim == other.dim && self.n == other.n)
    }

    /// In-place unnormalised multi-dimensional DFT, `sum_x v(x) e^{-ik.x}`.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// In-place unnormalised inverse DFT, `sum_k c_k e^{ik.x}`.
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len);
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // contiguous last axis
        plan.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let outer = self.len / (n * stride);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Retained cutoff `K` with `3K < n`.
pub fn dealias_cutoff(n: usize) -> i32 {
    ((n - 1) / 3) as i32
}

fn wavevector_of(idx: usize, dim: usize, n: usize) -> [i32; 3] {
    let mut k = [0i32; 3];
    let mut rest = idx;
    for a in (0..dim).rev() {
        let i = rest % n;
        rest /= n;
        k[a] = if i <= n / 2 { i as i32 } else { i as i32 - n as i32 };
    }
    k
}

fn index_of(k: &[i32; 3], dim: usize, n: usize) -> usize {
    let mut idx = 0;
    for &c in &k[..dim] {
        let i = c.rem_euclid(n as i32) as usize;
        idx = idx * n + i;
    }
    idx
}
