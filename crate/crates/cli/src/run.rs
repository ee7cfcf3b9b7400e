//! Input construction and the `simulate`, `optimize` and `sweep-alpha` modes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nsalpha_core::adjoint::{write_monitor_csv, AdjointMonitors};
use nsalpha_core::alpha_limit::{run_sweep, SweepConfig};
use nsalpha_core::fixtures;
use nsalpha_core::optimizer::{
    check_optimality, projected_gradient, ControlProblem, OptimalityReport, OptimizeError, Targets,
};
use nsalpha_core::spectral::snapshot::{read_snapshot, write_snapshot};
use nsalpha_core::{integrate_state, SolenoidalField, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_config, ConfigErrors, ConfigIssue, ForcingSpec, InitialSpec, Mode, RunConfig, TargetSpec};
use crate::manifest::{Manifest, RunStatus, Timings};
use crate::{verify, CliError};

/// What a finished run reports back to the caller.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub status: RunStatus,
    /// Human-readable report for stdout.
    pub report: String,
    /// Absolute or working-directory-relative paths of the files written.
    pub artifacts: Vec<PathBuf>,
}

impl RunSummary {
    /// 0, or 3 when a verification check failed.
    pub fn exit_code(&self) -> u8 {
        if self.status == RunStatus::Failed {
            3
        } else {
            0
        }
    }
}

/// Read, parse and validate a configuration file. Relative input paths are
/// resolved against the file's directory and file inputs are checked.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![ConfigIssue {
            path: "--config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    cfg.check_files()?;
    Ok(cfg)
}

/// Execute the configured mode and write its artifacts under `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut out = Output::create(&cfg.output_dir)?;
    let (status, report, iterations, summary, phases) = match cfg.mode {
        Mode::Simulate => simulate(cfg, &mut out)?,
        Mode::Optimize => optimize(cfg, &mut out)?,
        Mode::SweepAlpha => sweep(cfg, &mut out)?,
        Mode::Verify => verify_mode(cfg, &mut out)?,
    };
    let manifest = Manifest {
        tool: "nsalpha".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: cfg.mode.name().into(),
        seed: cfg.seed,
        mesh: cfg.mesh,
        params: cfg.physics,
        scheme: cfg.scheme,
        cost: cfg.cost,
        weights: cfg.weights,
        set: cfg.admissible_set,
        status,
        iterations,
        summary,
        artifacts: out.names.iter().cloned().chain(["manifest.json".to_string()]).collect(),
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            phases,
        },
    };
    let path = out.dir.join("manifest.json");
    manifest.write(&path)?;
    out.paths.push(path);
    Ok(RunSummary {
        status,
        report,
        artifacts: out.paths,
    })
}

type ModeResult = (
    RunStatus,
    String,
    Vec<nsalpha_core::optimizer::IterationRecord>,
    BTreeMap<String, f64>,
    BTreeMap<String, f64>,
);

struct Output {
    dir: PathBuf,
    names: Vec<String>,
    paths: Vec<PathBuf>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            names: Vec::new(),
            paths: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> nsalpha_core::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|()| w.flush().map_err(Into::into))
            .map_err(|e| match e {
                nsalpha_core::Error::Io(io) => CliError::io(&path, io),
                other => other.into(),
            })?;
        self.names.push(name.to_string());
        self.paths.push(path);
        Ok(())
    }
}

fn read_fields(path: &Path) -> Result<Vec<SolenoidalField>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(read_snapshot(BufReader::new(file))?.fields)
}

/// Generator shared by every random draw of a run, seeded once.
pub fn run_rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

pub fn initial_state(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<SolenoidalField, CliError> {
    let modes = cfg.modes();
    Ok(match &cfg.initial {
        InitialSpec::Zero => SolenoidalField::zeros(&modes),
        InitialSpec::Random { scale } => fixtures::random_field(&modes, rng, *scale),
        InitialSpec::SingleMode { amplitude } => fixtures::single_mode(&modes, *amplitude),
        InitialSpec::TaylorGreen { amplitude } => fixtures::taylor_green(&modes, *amplitude),
        InitialSpec::File { path } => read_fields(path)?.remove(0),
    })
}

/// The optimal-control problem described by the configuration. Tracking
/// targets without an explicit α are generated with `default_target_alpha`.
pub fn build_problem(
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
    default_target_alpha: f64,
) -> Result<ControlProblem, CliError> {
    let modes = cfg.modes();
    let (t_final, m) = (cfg.physics.t_final, cfg.mesh.m_steps);
    let u0 = initial_state(cfg, rng)?;
    let targets = match &cfg.target {
        TargetSpec::Zero => Targets {
            u_d: Trajectory::zeros(&modes, 0.0, t_final, m)?,
            u_t: SolenoidalField::zeros(&modes),
        },
        TargetSpec::Tracking { control_scale, alpha } => {
            let f_star = fixtures::smooth_control(&modes, rng, *control_scale, t_final, m)?;
            let params = cfg.physics.with_alpha(alpha.unwrap_or(default_target_alpha));
            let run = integrate_state(&u0, &f_star, &params, m, cfg.scheme)?;
            let u_t = run.trajectory.last().clone();
            Targets {
                u_d: run.trajectory,
                u_t,
            }
        }
        TargetSpec::Files { u_d, u_t } => Targets {
            u_d: Trajectory::new(0.0, t_final, read_fields(u_d)?)?,
            u_t: read_fields(u_t)?.remove(0),
        },
    };
    let problem = ControlProblem {
        u0,
        params: cfg.physics,
        m_steps: m,
        scheme: cfg.scheme,
        weights: cfg.weights,
        kind: cfg.cost,
        set: cfg.admissible_set,
        targets,
    };
    problem.validate()?;
    Ok(problem)
}

fn simulate(cfg: &RunConfig, out: &mut Output) -> Result<ModeResult, CliError> {
    let modes = cfg.modes();
    let mut rng = run_rng(cfg);
    let (t_final, m) = (cfg.physics.t_final, cfg.mesh.m_steps);
    let u0 = initial_state(cfg, &mut rng)?;
    let forcing = match cfg.forcing {
        ForcingSpec::Zero => Trajectory::zeros(&modes, 0.0, t_final, m)?,
        ForcingSpec::Smooth { scale } => fixtures::smooth_control(&modes, &mut rng, scale, t_final, m)?,
    };
    let t = Instant::now();
    let run = integrate_state(&u0, &forcing, &cfg.physics, m, cfg.scheme)?;
    let solve = t.elapsed().as_secs_f64();
    out.write("trajectory.nsaf", |w| write_snapshot(w, run.trajectory.fields()))?;
    out.write("energy.csv", |w| run.ledger.write_csv(w))?;

    let last = run.ledger.records.last().expect("ledger has the initial row");
    let summary = BTreeMap::from([
        ("final_kinetic".to_string(), last.kinetic),
        ("max_energy_residual".to_string(), run.ledger.max_residual()),
        ("apriori_max_ratio".to_string(), run.apriori.max_ratio),
        ("apriori_holds".to_string(), f64::from(u8::from(run.apriori.holds))),
        ("sup_v".to_string(), run.bounds.sup_v),
        ("l2_da".to_string(), run.bounds.l2_da),
        ("cfl_advisory".to_string(), run.cfl_advisory),
    ]);
    let report = format!(
        "simulate: {m} steps to T = {t_final}, final |u|^2 = {:.6e}, max energy residual {:.3e}, a-priori bound {}",
        last.kinetic,
        run.ledger.max_residual(),
        if run.apriori.holds { "holds" } else { "VIOLATED" }
    );
    Ok((
        RunStatus::Completed,
        report,
        Vec::new(),
        summary,
        BTreeMap::from([("solve".to_string(), solve)]),
    ))
}

fn optimize(cfg: &RunConfig, out: &mut Output) -> Result<ModeResult, CliError> {
    let mut rng = run_rng(cfg);
    let problem = build_problem(cfg, &mut rng, cfg.physics.alpha)?;
    let t = Instant::now();
    let (report, status): (OptimalityReport, RunStatus) =
        match projected_gradient(&problem, &problem.zero_control(), &cfg.optimizer) {
            Ok(r) => {
                let s = if r.converged {
                    RunStatus::Converged
                } else {
                    RunStatus::MaxIters
                };
                (r, s)
            }
            Err(OptimizeError::Stagnation { report, .. }) => (*report, RunStatus::Stagnated),
            Err(OptimizeError::Solver(e)) => return Err(e.into()),
        };
    let solve = t.elapsed().as_secs_f64();
    let check = check_optimality(
        &report.control,
        &report.adjoint,
        &problem.set,
        problem.weights.gamma_f,
        16,
        cfg.seed,
    )?;
    let monitors = AdjointMonitors::measure(&report.adjoint, cfg.physics.alpha);

    out.write("history.csv", |w| report.write_history_csv(w))?;
    out.write("control.nsaf", |w| write_snapshot(w, report.control.fields()))?;
    out.write("state.nsaf", |w| write_snapshot(w, report.state.fields()))?;
    out.write("adjoint.nsaf", |w| write_snapshot(w, report.adjoint.fields()))?;
    out.write("monitors.csv", |w| write_monitor_csv(w, &[monitors]))?;

    let last = report.history.last().expect("history holds the initial iterate");
    let summary = BTreeMap::from([
        ("J".to_string(), report.cost),
        ("J_initial".to_string(), report.history[0].cost),
        ("vi_residual".to_string(), report.vi_residual),
        ("grad_norm".to_string(), last.grad_norm),
        ("control_norm".to_string(), report.control.norm()),
        ("optimality_residual".to_string(), check.residual),
        ("optimality_min_pairing".to_string(), check.min_pairing),
    ]);
    let text = format!(
        "optimize: {status:?} after {} iterations, J {:.6e} -> {:.6e}, VI residual {:.3e} (tol {:.1e}), optimality residual {:.3e}",
        report.iterations(),
        report.history[0].cost,
        report.cost,
        report.vi_residual,
        cfg.optimizer.tol,
        check.residual
    );
    let history = report.history.clone();
    Ok((
        status,
        text,
        history,
        summary,
        BTreeMap::from([("optimize".to_string(), solve)]),
    ))
}

fn sweep(cfg: &RunConfig, out: &mut Output) -> Result<ModeResult, CliError> {
    let mut rng = run_rng(cfg);
    let problem = build_problem(cfg, &mut rng, 0.0)?;
    let sweep_cfg = SweepConfig {
        alphas: cfg.sweep.alphas.clone(),
        problem,
        options: cfg.optimizer,
        parallel: cfg.sweep.parallel,
    };
    let t = Instant::now();
    let table = run_sweep(&sweep_cfg)?;
    let solve = t.elapsed().as_secs_f64();
    out.write("sweep.csv", |w| table.write_csv(w))?;
    out.write("sweep.dat", |w| table.write_gnuplot(w))?;
    let monitors: Vec<AdjointMonitors> = table.rows.iter().map(|r| r.monitors).collect();
    out.write("monitors.csv", |w| write_monitor_csv(w, &monitors))?;

    let converged = table.rows.iter().filter(|r| r.converged).count();
    let status = if converged == table.rows.len() {
        RunStatus::Completed
    } else {
        RunStatus::Partial
    };
    let summary = BTreeMap::from([
        ("rows".to_string(), table.rows.len() as f64),
        ("converged_rows".to_string(), converged as f64),
        ("limit_residual".to_string(), table.limit.residual),
        ("limit_equation".to_string(), table.limit.equation),
        ("limit_terminal".to_string(), table.limit.terminal),
        ("limit_truncation".to_string(), table.limit.truncation),
    ]);
    let mut text =
        String::from("alpha          J              gap_state_L2V  gap_adj_L2V    ee7_sup        iters conv\n");
    for r in &table.rows {
        text.push_str(&format!(
            "{:<14.6e} {:<14.6e} {:<14.6e} {:<14.6e} {:<14.6e} {:>5} {}\n",
            r.alpha,
            r.cost,
            r.gap_state_l2v,
            r.gap_adj_l2v,
            r.sup_bound(),
            r.iters,
            r.converged
        ));
    }
    text.push_str(&format!(
        "limit adjoint residual {:.3e} (truncation scale {:.3e}); {converged}/{} rows converged",
        table.limit.residual,
        table.limit.truncation,
        table.rows.len()
    ));
    Ok((
        status,
        text,
        Vec::new(),
        summary,
        BTreeMap::from([("sweep".to_string(), solve)]),
    ))
}

fn verify_mode(cfg: &RunConfig, out: &mut Output) -> Result<ModeResult, CliError> {
    let t = Instant::now();
    let checks = verify::run_checks(cfg)?;
    let elapsed = t.elapsed().as_secs_f64();
    out.write("verify.csv", |w| verify::write_csv(w, &checks))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let status = if failed == 0 {
        RunStatus::Completed
    } else {
        RunStatus::Failed
    };
    let summary = BTreeMap::from([
        ("checks".to_string(), checks.len() as f64),
        ("failed".to_string(), failed as f64),
    ]);
    let mut text = verify::table(&checks);
    text.push_str(&format!(
        "{} of {} checks passed in {elapsed:.1} s",
        checks.len() - failed,
        checks.len()
    ));
    Ok((
        status,
        text,
        Vec::new(),
        summary,
        BTreeMap::from([("verify".to_string(), elapsed)]),
    ))
}
