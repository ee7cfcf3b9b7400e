use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsalpha_cli::manifest::RunStatus;
use nsalpha_cli::{load_config, parse_config, run, Manifest, Mode, RunConfig};
use nsalpha_core::spectral::snapshot::{read_snapshot, write_snapshot};
use tempfile::TempDir;

fn example_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("config/example.toml")
}

fn nsalpha(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsalpha"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn config(text: &str, mode: Mode, out: &Path) -> RunConfig {
    let mut cfg = parse_config(text).unwrap();
    cfg.mode = mode;
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn shipped_example_is_the_default_configuration() {
    let text = std::fs::read_to_string(example_path()).unwrap();
    assert_eq!(parse_config(&text).unwrap(), RunConfig::default());
    assert_eq!(load_config(&example_path()).unwrap(), RunConfig::default());
}

#[test]
fn negative_viscosity_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[physics]\nnu = -1\n");
    let out = nsalpha(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("physics.nu") && err.contains("nu > 0"), "{err}");
}

#[test]
fn every_problem_is_reported_at_once() {
    let dir = TempDir::new().unwrap();
    let text = "seed = \"seven\"\n[mesh]\ndim = 4\nsize = 8\n[physics]\nt_final = 0\n[weights]\ngamma_f = -1\n";
    let cfg = write_config(dir.path(), text);
    let out = nsalpha(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in [
        "seed:",
        "mesh.dim:",
        "mesh.size: unknown key",
        "physics.t_final:",
        "weights.gamma_f:",
    ] {
        assert!(err.contains(key), "missing {key} in\n{err}");
    }
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(nsalpha(&["--help"]).status.code(), Some(0));
    assert_eq!(nsalpha(&["--version"]).status.code(), Some(0));
    assert_eq!(nsalpha(&["fly", "--config", "x.toml"]).status.code(), Some(1));
    assert_eq!(nsalpha(&["verify"]).status.code(), Some(1));
    let missing = nsalpha(&["verify", "--config", "/nonexistent/run.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    assert_eq!(
        nsalpha(&["verify", "--config", cfg.to_str().unwrap(), "--threads", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn ten_point_grid_is_accepted() {
    let dir = TempDir::new().unwrap();
    let cfg = config("[mesh]\nn = 10\nm_steps = 8\n", Mode::Simulate, dir.path());
    assert_eq!(cfg.modes().cutoff(), 3);
    run(&cfg).unwrap();
    let manifest = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.mesh.n, 10);
    let file = std::fs::File::open(dir.path().join("trajectory.nsaf")).unwrap();
    let snap = read_snapshot(file).unwrap();
    assert_eq!((snap.modes.n(), snap.fields.len()), (10, 9));
}

#[test]
fn single_mode_energy_decays_at_second_order() {
    let nu = 0.2;
    let mut errors = Vec::new();
    for m in [16, 32] {
        let dir = TempDir::new().unwrap();
        let text = format!(
            "[mesh]\nm_steps = {m}\n[physics]\nnu = {nu}\nalpha = 0.3\nt_final = 1.0\n[initial]\nkind = \"single-mode\"\namplitude = 2.0\n"
        );
        run(&config(&text, Mode::Simulate, dir.path())).unwrap();
        let (header, rows) = read_csv(&dir.path().join("energy.csv"));
        assert_eq!(
            header,
            ["step", "t", "kinetic", "gradient", "dissipation", "work", "residual"]
        );
        assert_eq!(rows.len(), m + 1);
        let e0 = rows[0][2];
        // a cos(x_1) e_2 has |u|^2 = a^2/2 (2π)^2
        assert!((e0 - 2.0 * (2.0 * std::f64::consts::PI).powi(2)).abs() < 1e-12 * e0);
        let worst = rows
            .iter()
            .map(|r| (r[2] - (-2.0 * nu * r[1]).exp() * e0).abs() / e0)
            .fold(0.0, f64::max);
        errors.push(worst);
    }
    let order = (errors[0] / errors[1]).log2();
    assert!(errors[1] < 1e-5, "{errors:?}");
    assert!(order > 1.9 && order < 2.1, "observed order {order}");
}

#[test]
fn optimize_writes_monotone_history_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = config("", Mode::Optimize, dir.path());
    let summary = run(&cfg).unwrap();
    assert_eq!(summary.status, RunStatus::Converged);
    assert_eq!(summary.exit_code(), 0);

    let manifest_path = dir.path().join("manifest.json");
    let manifest = Manifest::read(&manifest_path).unwrap();
    assert!(manifest.iterations.len() > 2);
    assert!(manifest.iterations.windows(2).all(|w| w[1].cost <= w[0].cost));
    assert!(manifest.summary["optimality_residual"] <= 10.0 * cfg.optimizer.tol);
    for name in [
        "history.csv",
        "control.nsaf",
        "state.nsaf",
        "adjoint.nsaf",
        "monitors.csv",
        "manifest.json",
    ] {
        assert!(manifest.artifacts.iter().any(|a| a == name), "{name} not listed");
        assert!(dir.path().join(name).exists());
    }

    // manifest: read then write gives the same bytes
    let again = dir.path().join("again.json");
    manifest.write(&again).unwrap();
    assert_eq!(std::fs::read(&manifest_path).unwrap(), std::fs::read(&again).unwrap());

    // history CSV agrees with the manifest to the last bit
    let (header, rows) = read_csv(&dir.path().join("history.csv"));
    assert_eq!(header, ["iter", "J", "step", "grad_norm", "vi_residual"]);
    for (row, rec) in rows.iter().zip(&manifest.iterations) {
        assert_eq!((row[1], row[4]), (rec.cost, rec.vi_residual));
    }

    for name in ["control.nsaf", "state.nsaf", "adjoint.nsaf"] {
        let bytes = std::fs::read(dir.path().join(name)).unwrap();
        let snap = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(snap.fields.len(), cfg.mesh.m_steps + 1);
        let mut rewritten = Vec::new();
        write_snapshot(&mut rewritten, &snap.fields).unwrap();
        assert_eq!(bytes, rewritten);
    }
}

#[test]
fn same_seed_gives_identical_outputs() {
    let text = "[mesh]\nm_steps = 16\n[sweep]\nalphas = [0.5, 0.25, 0.0]\n";
    let outputs: Vec<TempDir> = (0..2).map(|_| TempDir::new().unwrap()).collect();
    for (i, dir) in outputs.iter().enumerate() {
        let cfg = write_config(dir.path(), text);
        let threads = if i == 0 { "1" } else { "3" };
        for mode in ["simulate", "optimize", "sweep-alpha"] {
            let out = dir.path().join(mode);
            let status = nsalpha(&[
                mode,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "11",
                "--threads",
                threads,
            ]);
            assert_eq!(
                status.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&status.stderr)
            );
        }
    }
    let files = [
        "simulate/energy.csv",
        "simulate/trajectory.nsaf",
        "optimize/history.csv",
        "optimize/monitors.csv",
        "optimize/control.nsaf",
        "sweep-alpha/sweep.csv",
        "sweep-alpha/sweep.dat",
        "sweep-alpha/monitors.csv",
    ];
    for f in files {
        let a = std::fs::read(outputs[0].path().join(f)).unwrap();
        let b = std::fs::read(outputs[1].path().join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
    // manifests agree apart from timings
    let read = |d: &TempDir| {
        let mut m = Manifest::read(&d.path().join("optimize/manifest.json")).unwrap();
        m.timings = Default::default();
        m
    };
    assert_eq!(read(&outputs[0]), read(&outputs[1]));
    assert_eq!(read(&outputs[0]).seed, 11);

    // a different seed changes the data
    let dir = TempDir::new().unwrap();
    let mut cfg = config(text, Mode::Simulate, dir.path());
    cfg.seed = 12;
    run(&cfg).unwrap();
    let other = std::fs::read(dir.path().join("energy.csv")).unwrap();
    assert_ne!(
        other,
        std::fs::read(outputs[0].path().join("simulate/energy.csv")).unwrap()
    );
}

#[test]
fn verify_passes_on_the_default_mesh() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let status = nsalpha(&["verify", "--config", example_path().to_str().unwrap(), "--out", out_s]);
    let stdout = String::from_utf8_lossy(&status.stdout);
    assert_eq!(status.status.code(), Some(0), "{stdout}");
    for name in [
        "skew-symmetry",
        "transpose identity",
        "gradient vs finite differences",
        "single-mode decay",
        "projection properties",
    ] {
        assert!(stdout.contains(name), "{name} missing from\n{stdout}");
    }
    assert!(!stdout.contains("FAIL"));
    let manifest = Manifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.status, RunStatus::Completed);
}

#[test]
fn verify_also_passes_in_three_dimensions_with_euler() {
    let dir = TempDir::new().unwrap();
    let text = "[mesh]\ndim = 3\nm_steps = 16\n[physics]\nscheme = \"imex-euler\"\n[admissible_set]\nkind = \"ball\"\nradius = 0.5\n[weights]\ngamma_f = 0.5\n";
    let summary = run(&config(text, Mode::Verify, dir.path())).unwrap();
    assert_eq!(summary.status, RunStatus::Completed, "{}", summary.report);
}

#[test]
fn blow_up_is_a_solver_failure() {
    let dir = TempDir::new().unwrap();
    let text = "[mesh]\nm_steps = 4\n[physics]\nnu = 1e-3\nalpha = 0.0\nt_final = 10.0\nscheme = \"imex-euler\"\n[initial]\nscale = 1e4\n";
    let cfg = write_config(dir.path(), text);
    let out = nsalpha(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blew up"));
}

#[test]
fn file_targets_are_checked_against_the_mesh() {
    let dir = TempDir::new().unwrap();
    // produce a state trajectory and reuse it as tracking data
    let sim = dir.path().join("sim");
    run(&config("[mesh]\nm_steps = 8\n", Mode::Simulate, &sim)).unwrap();
    let bytes = std::fs::read(sim.join("trajectory.nsaf")).unwrap();
    let snap = read_snapshot(bytes.as_slice()).unwrap();
    let mut last = Vec::new();
    write_snapshot(&mut last, &snap.fields[8..]).unwrap();
    std::fs::write(dir.path().join("u_T.nsaf"), last).unwrap();

    let text = "[mesh]\nm_steps = 8\n[target]\nkind = \"files\"\nu_d = \"sim/trajectory.nsaf\"\nu_T = \"u_T.nsaf\"\n";
    let cfg_path = write_config(dir.path(), text);
    let mut cfg = load_config(&cfg_path).unwrap();
    cfg.mode = Mode::Optimize;
    cfg.output_dir = dir.path().join("opt");
    assert_eq!(run(&cfg).unwrap().status, RunStatus::Converged);

    // wrong time mesh, wrong grid, missing file: all reported together
    let text = "[mesh]\nn = 10\nm_steps = 4\n[initial]\nkind = \"file\"\npath = \"nope.nsaf\"\n[target]\nkind = \"files\"\nu_d = \"sim/trajectory.nsaf\"\nu_T = \"u_T.nsaf\"\n";
    let err = load_config(&write_config(dir.path(), text)).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let msg = err.to_string();
    for key in ["initial.path", "target.u_d", "target.u_T"] {
        assert!(msg.contains(key), "missing {key} in {msg}");
    }
}

#[test]
fn sweep_writes_table_and_gnuplot_data() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        "[mesh]\nm_steps = 16\n[sweep]\nalphas = [0.5, 0.25, 0.125, 0.0]\n",
        Mode::SweepAlpha,
        dir.path(),
    );
    let summary = run(&cfg).unwrap();
    assert_eq!(summary.status, RunStatus::Completed, "{}", summary.report);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,J,gap_state_L2V,gap_state_LinfL2,gap_adj_L2V,gap_adj_L2L2,ee7_sup,iters,converged"
    );
    let gaps: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(gaps.len(), 4);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    let dat = std::fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
    assert!(dat.starts_with("# alpha J"));
    let manifest = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.summary["converged_rows"], 4.0);
}
