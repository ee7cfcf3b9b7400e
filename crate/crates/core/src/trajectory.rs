use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{ModeSet, SolenoidalField};
use crate::sum::Accumulator;

/// Uniform-in-time sequence of solenoidal fields, `steps + 1` samples on
/// `[t0, t_final]`.
///
/// The discrete L2(Q) inner product used for controls, gradients and
/// projections is the trapezoid rule in time times the spectral L2 product
/// in space; see [`Trajectory::inner`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    t0: f64,
    t_final: f64,
    fields: Vec<SolenoidalField>,
}

impl Trajectory {
    pub fn new(t0: f64, t_final: f64, fields: Vec<SolenoidalField>) -> Result<Self> {
        if !t0.is_finite() || !t_final.is_finite() || t_final <= t0 {
            return Err(Error::Mesh(format!("time interval [{t0}, {t_final}] is empty")));
        }
        if fields.len() < 2 {
            return Err(Error::Mesh(format!(
                "a trajectory needs at least two samples, got {}",
                fields.len()
            )));
        }
        let modes = fields[0].modes();
        if fields.iter().any(|f| !f.modes().same_as(modes)) {
            return Err(Error::Dimension("trajectory samples use different mode sets".into()));
        }
        Ok(Self { t0, t_final, fields })
    }

    pub fn zeros(modes: &Arc<ModeSet>, t0: f64, t_final: f64, steps: usize) -> Result<Self> {
        Self::constant(&SolenoidalField::zeros(modes), t0, t_final, steps)
    }

    pub fn constant(field: &SolenoidalField, t0: f64, t_final: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Argument("m_steps must be at least 1".into()));
        }
        Self::new(t0, t_final, vec![field.clone(); steps + 1])
    }

    /// Sample `f(t)` at the nodes.
    pub fn from_fn(t0: f64, t_final: f64, steps: usize, mut f: impl FnMut(f64) -> SolenoidalField) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Argument("m_steps must be at least 1".into()));
        }
        let dt = (t_final - t0) / steps as f64;
        let fields = (0..=steps).map(|n| f(t0 + n as f64 * dt)).collect();
        Self::new(t0, t_final, fields)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn dt(&self) -> f64 {
        (self.t_final - self.t0) / self.steps() as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt()
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        self.fields[0].modes()
    }

    pub fn fields(&self) -> &[SolenoidalField] {
        &self.fields
    }

    pub fn field(&self, n: usize) -> &SolenoidalField {
        &self.fields[n]
    }

    pub fn last(&self) -> &SolenoidalField {
        &self.fields[self.fields.len() - 1]
    }

    pub fn into_fields(self) -> Vec<SolenoidalField> {
        self.fields
    }

    /// Trapezoid weight of node `n`.
    pub fn weight(&self, n: usize) -> f64 {
        let dt = self.dt();
        if n == 0 || n == self.steps() {
            0.5 * dt
        } else {
            dt
        }
    }

    pub fn same_mesh(&self, other: &Trajectory) -> bool {
        let tol = 1e-12 * (self.t_final - self.t0).abs().max(1.0);
        self.steps() == other.steps()
            && (self.t0 - other.t0).abs() <= tol
            && (self.t_final - other.t_final).abs() <= tol
            && self.modes().same_as(other.modes())
    }

    pub fn check_mesh(&self, other: &Trajectory, what: &str) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::Mesh(format!(
                "{what}: {} steps on [{}, {}] vs {} steps on [{}, {}]",
                self.steps(),
                self.t0,
                self.t_final,
                other.steps(),
                other.t0,
                other.t_final
            )))
        }
    }

    /// Discrete L2(Q) inner product: trapezoid in time, spectral L2 in space.
    pub fn inner(&self, other: &Trajectory) -> f64 {
        assert!(self.same_mesh(other), "trajectories on different meshes");
        (0..=self.steps())
            .map(|n| self.weight(n) * self.fields[n].l2_inner(&other.fields[n]))
            .collect::<Accumulator>()
            .value()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// `sqrt(sum_n w_n q(field_n)^2)` for a spatial norm `q`.
    pub fn time_l2(&self, q: impl Fn(&SolenoidalField) -> f64) -> f64 {
        (0..=self.steps())
            .map(|n| self.weight(n) * q(&self.fields[n]).powi(2))
            .collect::<Accumulator>()
            .value()
            .sqrt()
    }

    /// `max_n q(field_n)`.
    pub fn time_sup(&self, q: impl Fn(&SolenoidalField) -> f64) -> f64 {
        self.fields.iter().map(q).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&SolenoidalField) -> SolenoidalField) -> Self {
        Self {
            t0: self.t0,
            t_final: self.t_final,
            fields: self.fields.iter().map(f).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|f| f.scaled(a))
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Trajectory) {
        assert!(self.same_mesh(x), "trajectories on different meshes");
        for (y, xv) in self.fields.iter_mut().zip(&x.fields) {
            y.axpy(a, xv);
        }
    }

    pub fn sub(&self, other: &Trajectory) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(SolenoidalField::is_finite)
    }
}
