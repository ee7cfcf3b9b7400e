//! Invariant checks run by `nsalpha verify` on the configured mesh and
//! physics. Each check reports a measured value against a threshold.

use std::io::Write;
use std::sync::Arc;

use nsalpha_core::adjoint::{adjoint_b_star, linearized_b};
use nsalpha_core::export::fmt_f64;
use nsalpha_core::fixtures;
use nsalpha_core::optimizer::{project_admissible, AdmissibleSet};
use nsalpha_core::spectral::snapshot::{read_snapshot, write_snapshot};
use nsalpha_core::spectral::{leray_project, norms, to_spectral};
use nsalpha_core::{integrate_state, nonlinear_b, ModeSet, SolenoidalField, Trajectory, VectorGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::run::build_problem;
use crate::CliError;

const SAMPLES: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

/// Run every check; solver failures abort, failed checks do not.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let modes = cfg.modes();
    let alphas = [0.0, cfg.physics.alpha, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (energy, trajectory) = energy_order(cfg, &mut rng)?;
    Ok(vec![
        skew_symmetry(&modes, &alphas, &mut rng)?,
        transpose_identity(&modes, &alphas, &mut rng)?,
        gradient_fd(cfg, &mut rng)?,
        single_mode_decay(cfg)?,
        projection(&modes, cfg, &mut rng)?,
        energy,
        snapshot_round_trip(&trajectory)?,
    ])
}

fn random_pair(modes: &Arc<ModeSet>, rng: &mut ChaCha8Rng) -> (SolenoidalField, SolenoidalField) {
    let du = rng.gen_range(0.0..4.0);
    let dv = rng.gen_range(0.0..4.0);
    (
        SolenoidalField::random(modes, rng, du),
        SolenoidalField::random(modes, rng, dv),
    )
}

fn skew_symmetry(modes: &Arc<ModeSet>, alphas: &[f64], rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for &alpha in alphas {
        for _ in 0..SAMPLES {
            let (u, v) = random_pair(modes, rng);
            let b = nonlinear_b(&u, &v, alpha)?;
            let scale = u.l2_norm() * v.l2_norm() * norms::da_norm(&u);
            worst = worst.max(b.l2_inner(&u).abs() / scale);
        }
    }
    Ok(Check {
        name: "skew-symmetry",
        value: worst,
        threshold: 1e-12,
        pass: worst <= 1e-12,
        detail: format!(
            "max |<B(u,v),u>| / (|u| |v| |Au|) over {} pairs",
            SAMPLES * alphas.len()
        ),
    })
}

fn transpose_identity(modes: &Arc<ModeSet>, alphas: &[f64], rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for &alpha in alphas {
        for _ in 0..SAMPLES {
            let u = SolenoidalField::random(modes, rng, 1.0);
            let (l, w) = random_pair(modes, rng);
            let lin = linearized_b(&u, &w, alpha)?;
            let star = adjoint_b_star(&u, &l, alpha)?;
            let scale = star.l2_norm() * w.l2_norm() + l.l2_norm() * lin.l2_norm();
            worst = worst.max((star.l2_inner(&w) - l.l2_inner(&lin)).abs() / scale);
        }
    }
    Ok(Check {
        name: "transpose identity",
        value: worst,
        threshold: 1e-11,
        pass: worst <= 1e-11,
        detail: format!(
            "max relative |(B'*l, w) - (l, B'w)| over {} triples",
            SAMPLES * alphas.len()
        ),
    })
}

fn gradient_fd(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let eps = 1e-5;
    let problem = build_problem(cfg, rng, cfg.physics.alpha)?;
    let modes = cfg.modes();
    let (t_final, m) = (cfg.physics.t_final, cfg.mesh.m_steps);
    let mut f = fixtures::random_control(&modes, rng, 0.5, t_final, m)?;
    if let AdmissibleSet::L2Ball { radius } = problem.set {
        // an interior point, so two-sided differences stay admissible
        f = f.scaled(0.5 * radius / f.norm());
    }
    let g = problem.evaluate(&f)?.gradient;
    let mut worst: f64 = 0.0;
    let directions = 4;
    for _ in 0..directions {
        let d = fixtures::random_control(&modes, rng, 1.0, t_final, m)?;
        let at = |s: f64| {
            let mut x = f.clone();
            x.axpy(s, &d);
            problem.cost(&x)
        };
        let fd = (at(eps)? - at(-eps)?) / (2.0 * eps);
        worst = worst.max((g.inner(&d) - fd).abs() / fd.abs());
    }
    Ok(Check {
        name: "gradient vs finite differences",
        value: worst,
        threshold: 1e-6,
        pass: worst <= 1e-6,
        detail: format!("max relative error over {directions} random directions, central step {eps:.0e}"),
    })
}

fn single_mode_decay(cfg: &RunConfig) -> Result<Check, CliError> {
    let modes = cfg.modes();
    let u0 = fixtures::single_mode(&modes, 1.0);
    let p = cfg.physics;
    let exact = (-p.nu * p.t_final).exp() * u0.l2_norm();
    let err_at = |m: usize, alpha: f64| -> Result<f64, CliError> {
        let f = Trajectory::zeros(&modes, 0.0, p.t_final, m)?;
        let run = integrate_state(&u0, &f, &p.with_alpha(alpha), m, cfg.scheme)?;
        Ok((run.trajectory.last().l2_norm() - exact).abs() / exact)
    };
    let m = cfg.mesh.m_steps;
    let coarse = err_at(m, p.alpha)?;
    let fine = err_at(2 * m, p.alpha)?;
    let mut spread: f64 = 0.0;
    for alpha in [0.0, 1.0] {
        spread = spread.max((err_at(m, alpha)? - coarse).abs());
    }
    let order = (coarse / fine).log2();
    let need = f64::from(cfg.scheme.order()) - 0.2;
    // at round-off level the observed order is meaningless
    let pass = (order >= need || fine <= 1e-13) && spread <= 1e-14;
    Ok(Check {
        name: "single-mode decay",
        value: order,
        threshold: need,
        pass,
        detail: format!(
            "rel. error vs e^(-nu t)|u0|: {coarse:.2e} (m={m}), {fine:.2e} (m={}); alpha spread {spread:.1e}",
            2 * m
        ),
    })
}

fn projection(modes: &Arc<ModeSet>, cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Check, CliError> {
    let grid = |rng: &mut ChaCha8Rng| {
        let values = (0..modes.dim() * modes.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        VectorGrid::from_values(modes, values).expect("sized from the mode set")
    };
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let (a, b) = (grid(rng), grid(rng));
        let pa = leray_project(modes, &to_spectral(&a))?;
        let pb = leray_project(modes, &to_spectral(&b))?;
        let diff = VectorGrid::from_values(modes, a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect())?;
        // ratio above one means the projection expanded a distance
        worst = worst.max((&pa - &pb).l2_norm() / diff.l2_norm_squared().sqrt());
        let again = leray_project(modes, pa.as_spectrum())?;
        worst = worst.max(1.0 + (&again - &pa).l2_norm() / pa.l2_norm());
        worst = worst.max(1.0 + pa.max_divergence() / pa.max_coefficient());
    }
    let radius = match cfg.admissible_set {
        AdmissibleSet::L2Ball { radius } => radius,
        AdmissibleSet::Unconstrained => 1.0,
    };
    let ball = AdmissibleSet::L2Ball { radius };
    let (t_final, m) = (cfg.physics.t_final, cfg.mesh.m_steps);
    for _ in 0..SAMPLES / 5 {
        let x = fixtures::random_control(modes, rng, 2.0 * radius, t_final, m)?;
        let y = fixtures::random_control(modes, rng, 2.0 * radius, t_final, m)?;
        let gap = project_admissible(&ball, &x).sub(&project_admissible(&ball, &y)).norm();
        worst = worst.max(gap / x.sub(&y).norm());
    }
    let threshold = 1.0 + 1e-13;
    Ok(Check {
        name: "projection properties",
        value: worst,
        threshold,
        pass: worst <= threshold,
        detail: "Leray: non-expansive, idempotent, divergence-free; L2 ball: non-expansive (max ratio)".into(),
    })
}

fn energy_order(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<(Check, Trajectory), CliError> {
    let modes = cfg.modes();
    let p = cfg.physics;
    let m = cfg.mesh.m_steps;
    let u0 = fixtures::random_field(&modes, rng, 1.0);
    let g = fixtures::random_field(&modes, rng, 1.0);
    let omega = 2.0 * std::f64::consts::PI / p.t_final;
    let control = |steps| Trajectory::from_fn(0.0, p.t_final, steps, |t| g.scaled(1.0 + 0.5 * (omega * t).sin()));
    let coarse = integrate_state(&u0, &control(m)?, &p, m, cfg.scheme)?;
    let fine = integrate_state(&u0, &control(2 * m)?, &p, 2 * m, cfg.scheme)?;
    let (rc, rf) = (coarse.ledger.max_residual(), fine.ledger.max_residual());
    let order = (rc / rf).log2();
    let need = f64::from(cfg.scheme.order()) - 0.2;
    Ok((
        Check {
            name: "energy identity order",
            value: order,
            threshold: need,
            pass: order >= need || rf <= 1e-12,
            detail: format!("max step residual {rc:.2e} (m={m}) -> {rf:.2e} (m={})", 2 * m),
        },
        coarse.trajectory,
    ))
}

fn snapshot_round_trip(trajectory: &Trajectory) -> Result<Check, CliError> {
    let mut first = Vec::new();
    write_snapshot(&mut first, trajectory.fields())?;
    let decoded = read_snapshot(first.as_slice())?;
    let mut second = Vec::new();
    write_snapshot(&mut second, &decoded.fields)?;
    let same_values = decoded
        .fields
        .iter()
        .zip(trajectory.fields())
        .all(|(a, b)| a.coefficients() == b.coefficients());
    let pass = first == second && same_values && decoded.fields.len() == trajectory.fields().len();
    Ok(Check {
        name: "snapshot round trip",
        value: f64::from(u8::from(!pass)),
        threshold: 0.0,
        pass,
        detail: format!(
            "{} fields, {} bytes, byte-identical rewrite",
            decoded.fields.len(),
            first.len()
        ),
    })
}

/// Fixed-width pass/fail table.
pub fn table(checks: &[Check]) -> String {
    let mut s = format!(
        "{:<32} {:>6} {:>12} {:>12}  {}\n",
        "check", "result", "value", "threshold", "detail"
    );
    for c in checks {
        s.push_str(&format!(
            "{:<32} {:>6} {:>12.4e} {:>12.4e}  {}\n",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.threshold,
            c.detail
        ));
    }
    s
}

/// CSV with header `check,pass,value,threshold`.
pub fn write_csv<W: Write>(mut w: W, checks: &[Check]) -> nsalpha_core::Result<()> {
    writeln!(w, "check,pass,value,threshold")?;
    for c in checks {
        writeln!(w, "{},{},{},{}", c.name, c.pass, fmt_f64(c.value), fmt_f64(c.threshold))?;
    }
    Ok(())
}
