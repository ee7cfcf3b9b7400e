//! Run configuration: TOML schema, defaults and validation.
//!
//! Every key is optional and falls back to [`RunConfig::default`], which the
//! shipped `config/example.toml` spells out in full. Validation collects all
//! problems, each tagged with its key path, instead of stopping at the first.

use std::fmt;
use std::path::{Path, PathBuf};

use nsalpha_core::adjoint::CostKind;
use nsalpha_core::alpha_limit::SweepConfig;
use nsalpha_core::optimizer::{AdmissibleSet, CostWeights, DescentOptions};
use nsalpha_core::spectral::snapshot::read_snapshot;
use nsalpha_core::{ModeSet, PhysicalParams, TimeScheme};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Optimize,
    SweepAlpha,
    Verify,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Optimize => "optimize",
            Mode::SweepAlpha => "sweep-alpha",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub dim: usize,
    pub n: usize,
    pub m_steps: usize,
}

/// Initial state `u0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialSpec {
    Zero,
    /// Random smooth field with the given L2 norm.
    Random {
        scale: f64,
    },
    /// `a cos(x_1) e_2`.
    SingleMode {
        amplitude: f64,
    },
    TaylorGreen {
        amplitude: f64,
    },
    /// Snapshot holding one field.
    File {
        path: PathBuf,
    },
}

/// Control used by `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForcingSpec {
    Zero,
    /// `g(x)(1 + ½ sin(2πt/T))` with a random smooth profile of L2 norm `scale`.
    Smooth {
        scale: f64,
    },
}

/// Tracking targets `u_d`, `u_T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSpec {
    /// Zero targets.
    Zero,
    /// `u_d` is the state driven from `u0` by a smooth random control of
    /// profile norm `control_scale`, generated with `alpha` (the run's α when
    /// absent, 0 in `sweep-alpha`); `u_T = u_d(T)`.
    Tracking { control_scale: f64, alpha: Option<f64> },
    /// Snapshots with `m_steps + 1` fields (`u_d`) and one field (`u_T`).
    Files { u_d: PathBuf, u_t: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSettings {
    pub alphas: Vec<f64>,
    pub parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mesh: MeshConfig,
    pub physics: PhysicalParams,
    pub scheme: TimeScheme,
    pub weights: CostWeights,
    pub cost: CostKind,
    pub admissible_set: AdmissibleSet,
    pub initial: InitialSpec,
    pub forcing: ForcingSpec,
    pub target: TargetSpec,
    pub optimizer: DescentOptions,
    pub sweep: SweepSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Verify,
            seed: 7,
            output_dir: PathBuf::from("nsalpha-out"),
            mesh: MeshConfig {
                dim: 2,
                n: 8,
                m_steps: 32,
            },
            physics: PhysicalParams {
                nu: 0.1,
                alpha: 0.1,
                t_final: 0.5,
            },
            scheme: TimeScheme::ImexHeun,
            weights: CostWeights {
                gamma_u: 1.0,
                gamma_t: 1.0,
                gamma_f: 1.0,
            },
            cost: CostKind::DaTracking,
            admissible_set: AdmissibleSet::Unconstrained,
            initial: InitialSpec::Random { scale: 0.1 },
            forcing: ForcingSpec::Zero,
            target: TargetSpec::Tracking {
                control_scale: 0.1,
                alpha: None,
            },
            optimizer: DescentOptions {
                max_iters: 200,
                tol: 1e-9,
                c1: 1e-4,
                initial_step: 1.0,
                max_halvings: 40,
            },
            sweep: SweepSettings {
                alphas: SweepConfig::dyadic_alphas(6),
                parallel: true,
            },
        }
    }
}

/// One validation problem, addressed by its dotted key path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for issue in &self.0 {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn mentions(&self, path: &str) -> bool {
        self.0.iter().any(|i| i.path == path)
    }
}

const ROOT_KEYS: &[&str] = &[
    "mode",
    "seed",
    "output_dir",
    "cost",
    "mesh",
    "physics",
    "weights",
    "admissible_set",
    "initial",
    "forcing",
    "target",
    "optimizer",
    "sweep",
];

/// Reads typed values out of a TOML table, recording every problem.
#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issue(
                    join(prefix, key),
                    format!("unknown key (expected one of: {})", allowed.join(", ")),
                );
            }
        }
    }

    fn section<'t>(&mut self, root: &'t Table, name: &str, allowed: &[&str]) -> Option<&'t Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => {
                self.unknown_keys(t, name, allowed);
                Some(t)
            }
            Some(other) => {
                self.issue(name, format!("expected a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn f64(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: f64) -> f64 {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(other) => {
                self.issue(
                    join(prefix, key),
                    format!("expected a number, found {}", other.type_str()),
                );
                default
            }
        }
    }

    fn opt_f64(&mut self, t: Option<&Table>, prefix: &str, key: &str) -> Option<f64> {
        t.and_then(|t| t.get(key)).map(|_| self.f64(t, prefix, key, f64::NAN))
    }

    fn int(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: u64) -> u64 {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(Value::Integer(i)) => {
                self.issue(join(prefix, key), format!("must be non-negative, got {i}"));
                default
            }
            Some(other) => {
                self.issue(
                    join(prefix, key),
                    format!("expected an integer, found {}", other.type_str()),
                );
                default
            }
        }
    }

    fn bool(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: bool) -> bool {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.issue(
                    join(prefix, key),
                    format!("expected a boolean, found {}", other.type_str()),
                );
                default
            }
        }
    }

    fn string(&mut self, t: Option<&Table>, prefix: &str, key: &str) -> Option<String> {
        match t.and_then(|t| t.get(key)) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.issue(
                    join(prefix, key),
                    format!("expected a string, found {}", other.type_str()),
                );
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, t: Option<&Table>, prefix: &str, key: &str, options: &[(&str, T)], default: T) -> T {
        match self.string(t, prefix, key) {
            None => default,
            Some(s) => match options.iter().find(|(name, _)| *name == s) {
                Some((_, v)) => *v,
                None => {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    self.issue(
                        join(prefix, key),
                        format!("unknown value {s:?} (expected one of: {})", names.join(", ")),
                    );
                    default
                }
            },
        }
    }

    fn f64_list(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: &[f64]) -> Vec<f64> {
        match t.and_then(|t| t.get(key)) {
            None => default.to_vec(),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        other => self.issue(
                            format!("{}[{i}]", join(prefix, key)),
                            format!("expected a number, found {}", other.type_str()),
                        ),
                    }
                }
                out
            }
            Some(other) => {
                self.issue(
                    join(prefix, key),
                    format!("expected an array, found {}", other.type_str()),
                );
                default.to_vec()
            }
        }
    }

    fn require(&mut self, ok: bool, path: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.issue(path, message());
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigIssue {
            path: "<document>".into(),
            message: e.to_string().trim().to_string(),
        }])
    })?;
    let d = RunConfig::default();
    let mut r = Reader::default();
    r.unknown_keys(&root, "", ROOT_KEYS);
    let top = Some(&root);

    let mode = r.choice(
        top,
        "",
        "mode",
        &[
            ("simulate", Mode::Simulate),
            ("optimize", Mode::Optimize),
            ("sweep-alpha", Mode::SweepAlpha),
            ("verify", Mode::Verify),
        ],
        d.mode,
    );
    let seed = r.int(top, "", "seed", d.seed);
    let output_dir = r
        .string(top, "", "output_dir")
        .map(PathBuf::from)
        .unwrap_or(d.output_dir.clone());
    let cost = r.choice(
        top,
        "",
        "cost",
        &[("J", CostKind::DaTracking), ("J0", CostKind::L4Tracking)],
        d.cost,
    );

    let t = r.section(&root, "mesh", &["dim", "n", "m_steps"]);
    let mesh = MeshConfig {
        dim: r.int(t, "mesh", "dim", d.mesh.dim as u64) as usize,
        n: r.int(t, "mesh", "n", d.mesh.n as u64) as usize,
        m_steps: r.int(t, "mesh", "m_steps", d.mesh.m_steps as u64) as usize,
    };
    r.require(matches!(mesh.dim, 2 | 3), "mesh.dim", || {
        format!("must be 2 or 3, got {}", mesh.dim)
    });
    r.require(mesh.n >= 4 && mesh.n.is_multiple_of(2), "mesh.n", || {
        format!("must be even and >= 4, got {}", mesh.n)
    });
    r.require(mesh.m_steps >= 1, "mesh.m_steps", || "must be >= 1".into());

    let t = r.section(&root, "physics", &["nu", "alpha", "t_final", "scheme"]);
    let physics = PhysicalParams {
        nu: r.f64(t, "physics", "nu", d.physics.nu),
        alpha: r.f64(t, "physics", "alpha", d.physics.alpha),
        t_final: r.f64(t, "physics", "t_final", d.physics.t_final),
    };
    let scheme = r.choice(
        t,
        "physics",
        "scheme",
        &[
            ("imex-heun", TimeScheme::ImexHeun),
            ("imex-euler", TimeScheme::ImexEuler),
        ],
        d.scheme,
    );
    r.require(physics.nu > 0.0 && physics.nu.is_finite(), "physics.nu", || {
        format!("must satisfy nu > 0, got {}", physics.nu)
    });
    r.require(
        physics.alpha >= 0.0 && physics.alpha.is_finite(),
        "physics.alpha",
        || format!("must satisfy alpha >= 0, got {}", physics.alpha),
    );
    r.require(
        physics.t_final > 0.0 && physics.t_final.is_finite(),
        "physics.t_final",
        || format!("must satisfy t_final > 0, got {}", physics.t_final),
    );

    let t = r.section(&root, "weights", &["gamma_u", "gamma_T", "gamma_f"]);
    let weights = CostWeights {
        gamma_u: r.f64(t, "weights", "gamma_u", d.weights.gamma_u),
        gamma_t: r.f64(t, "weights", "gamma_T", d.weights.gamma_t),
        gamma_f: r.f64(t, "weights", "gamma_f", d.weights.gamma_f),
    };
    for (key, v) in [
        ("gamma_u", weights.gamma_u),
        ("gamma_T", weights.gamma_t),
        ("gamma_f", weights.gamma_f),
    ] {
        r.require(v >= 0.0 && v.is_finite(), &format!("weights.{key}"), || {
            format!("must be >= 0, got {v}")
        });
    }
    r.require(
        weights.gamma_u != 0.0 || weights.gamma_t != 0.0 || weights.gamma_f != 0.0,
        "weights",
        || "gamma_u, gamma_T and gamma_f must not all be zero".into(),
    );

    let t = r.section(&root, "admissible_set", &["kind", "radius"]);
    let ball = r.choice(
        t,
        "admissible_set",
        "kind",
        &[("unconstrained", false), ("ball", true)],
        false,
    );
    let admissible_set = if ball {
        match r.opt_f64(t, "admissible_set", "radius") {
            None => {
                r.issue("admissible_set.radius", "required when kind = \"ball\"");
                AdmissibleSet::L2Ball { radius: 1.0 }
            }
            Some(radius) => {
                r.require(radius > 0.0 && radius.is_finite(), "admissible_set.radius", || {
                    format!("must be > 0, got {radius}")
                });
                AdmissibleSet::L2Ball { radius }
            }
        }
    } else {
        if t.is_some_and(|t| t.contains_key("radius")) {
            r.issue("admissible_set.radius", "only allowed when kind = \"ball\"");
        }
        AdmissibleSet::Unconstrained
    };
    if matches!(admissible_set, AdmissibleSet::Unconstrained) && weights.gamma_f <= 0.0 {
        r.issue(
            "weights.gamma_f",
            "must be > 0 when the admissible set is unconstrained",
        );
    }

    let t = r.section(&root, "initial", &["kind", "scale", "amplitude", "path"]);
    let initial = parse_initial(&mut r, t);
    let t = r.section(&root, "forcing", &["kind", "scale"]);
    let forcing = match r.choice(t, "forcing", "kind", &[("zero", false), ("smooth", true)], false) {
        false => ForcingSpec::Zero,
        true => {
            let scale = r.f64(t, "forcing", "scale", 1.0);
            r.require(scale >= 0.0 && scale.is_finite(), "forcing.scale", || {
                format!("must be >= 0, got {scale}")
            });
            ForcingSpec::Smooth { scale }
        }
    };
    let t = r.section(&root, "target", &["kind", "control_scale", "alpha", "u_d", "u_T"]);
    let target = parse_target(&mut r, t);

    let t = r.section(
        &root,
        "optimizer",
        &["max_iters", "tol", "c1", "initial_step", "max_halvings"],
    );
    let o = d.optimizer;
    let optimizer = DescentOptions {
        max_iters: r.int(t, "optimizer", "max_iters", o.max_iters as u64) as usize,
        tol: r.f64(t, "optimizer", "tol", o.tol),
        c1: r.f64(t, "optimizer", "c1", o.c1),
        initial_step: r.f64(t, "optimizer", "initial_step", o.initial_step),
        max_halvings: r.int(t, "optimizer", "max_halvings", o.max_halvings as u64) as usize,
    };
    r.require(optimizer.tol > 0.0, "optimizer.tol", || {
        format!("must be > 0, got {}", optimizer.tol)
    });
    r.require(optimizer.c1 > 0.0 && optimizer.c1 < 1.0, "optimizer.c1", || {
        format!("must lie in (0, 1), got {}", optimizer.c1)
    });
    r.require(
        optimizer.initial_step > 0.0 && optimizer.initial_step.is_finite(),
        "optimizer.initial_step",
        || format!("must be > 0, got {}", optimizer.initial_step),
    );

    let t = r.section(&root, "sweep", &["alphas", "parallel"]);
    let sweep = SweepSettings {
        alphas: r.f64_list(t, "sweep", "alphas", &d.sweep.alphas),
        parallel: r.bool(t, "sweep", "parallel", d.sweep.parallel),
    };
    let a = &sweep.alphas;
    if a.last() != Some(&0.0) {
        r.issue("sweep.alphas", "must end with 0");
    } else if a[..a.len() - 1].iter().any(|&x| !(x > 0.0 && x.is_finite())) || a.windows(2).any(|w| w[0] <= w[1]) {
        r.issue(
            "sweep.alphas",
            "must be strictly decreasing positive values followed by 0",
        );
    }

    if r.issues.is_empty() {
        Ok(RunConfig {
            mode,
            seed,
            output_dir,
            mesh,
            physics,
            scheme,
            weights,
            cost,
            admissible_set,
            initial,
            forcing,
            target,
            optimizer,
            sweep,
        })
    } else {
        Err(ConfigErrors(r.issues))
    }
}

fn parse_initial(r: &mut Reader, t: Option<&Table>) -> InitialSpec {
    #[derive(Clone, Copy)]
    enum K {
        Zero,
        Random,
        Single,
        Tg,
        File,
    }
    let kind = r.choice(
        t,
        "initial",
        "kind",
        &[
            ("zero", K::Zero),
            ("random", K::Random),
            ("single-mode", K::Single),
            ("taylor-green", K::Tg),
            ("file", K::File),
        ],
        K::Random,
    );
    let allowed: &[&str] = match kind {
        K::Zero => &["kind"],
        K::Random => &["kind", "scale"],
        K::Single | K::Tg => &["kind", "amplitude"],
        K::File => &["kind", "path"],
    };
    if let Some(t) = t {
        for key in t.keys().filter(|k| !allowed.contains(&k.as_str())) {
            if ["scale", "amplitude", "path"].contains(&key.as_str()) {
                r.issue(format!("initial.{key}"), "not used by this initial kind");
            }
        }
    }
    let nonneg = |r: &mut Reader, key: &str, default: f64| {
        let v = r.f64(t, "initial", key, default);
        r.require(v.is_finite(), &format!("initial.{key}"), || {
            format!("must be finite, got {v}")
        });
        v
    };
    match kind {
        K::Zero => InitialSpec::Zero,
        K::Random => {
            let scale = nonneg(r, "scale", 0.1);
            r.require(scale >= 0.0, "initial.scale", || format!("must be >= 0, got {scale}"));
            InitialSpec::Random { scale }
        }
        K::Single => InitialSpec::SingleMode {
            amplitude: nonneg(r, "amplitude", 1.0),
        },
        K::Tg => InitialSpec::TaylorGreen {
            amplitude: nonneg(r, "amplitude", 1.0),
        },
        K::File => match r.string(t, "initial", "path") {
            Some(p) => InitialSpec::File { path: PathBuf::from(p) },
            None => {
                r.issue("initial.path", "required when kind = \"file\"");
                InitialSpec::Zero
            }
        },
    }
}

fn parse_target(r: &mut Reader, t: Option<&Table>) -> TargetSpec {
    #[derive(Clone, Copy, PartialEq)]
    enum K {
        Zero,
        Tracking,
        Files,
    }
    let kind = r.choice(
        t,
        "target",
        "kind",
        &[("zero", K::Zero), ("tracking", K::Tracking), ("files", K::Files)],
        K::Tracking,
    );
    if let Some(t) = t {
        let allowed: &[&str] = match kind {
            K::Zero => &["kind"],
            K::Tracking => &["kind", "control_scale", "alpha"],
            K::Files => &["kind", "u_d", "u_T"],
        };
        for key in t.keys().filter(|k| !allowed.contains(&k.as_str())) {
            if ["control_scale", "alpha", "u_d", "u_T"].contains(&key.as_str()) {
                r.issue(format!("target.{key}"), "not used by this target kind");
            }
        }
    }
    match kind {
        K::Zero => TargetSpec::Zero,
        K::Tracking => {
            let control_scale = r.f64(t, "target", "control_scale", 0.1);
            r.require(
                control_scale >= 0.0 && control_scale.is_finite(),
                "target.control_scale",
                || format!("must be >= 0, got {control_scale}"),
            );
            let alpha = r.opt_f64(t, "target", "alpha");
            if let Some(a) = alpha {
                r.require(a >= 0.0 && a.is_finite(), "target.alpha", || {
                    format!("must be >= 0, got {a}")
                });
            }
            TargetSpec::Tracking { control_scale, alpha }
        }
        K::Files => {
            let path = |r: &mut Reader, key: &str| match r.string(t, "target", key) {
                Some(p) => PathBuf::from(p),
                None => {
                    r.issue(format!("target.{key}"), "required when kind = \"files\"");
                    PathBuf::new()
                }
            };
            let u_d = path(r, "u_d");
            let u_t = path(r, "u_T");
            TargetSpec::Files { u_d, u_t }
        }
    }
}

impl RunConfig {
    /// The mode set of the configured mesh.
    pub fn modes(&self) -> std::sync::Arc<ModeSet> {
        ModeSet::new(self.mesh.dim, self.mesh.n).expect("validated mesh")
    }

    /// Resolve relative input paths against `base` (normally the directory of
    /// the configuration file).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let InitialSpec::File { path } = &mut self.initial {
            fix(path);
        }
        if let TargetSpec::Files { u_d, u_t } = &mut self.target {
            fix(u_d);
            fix(u_t);
        }
    }

    /// Check that file inputs exist, parse, and match the mesh.
    pub fn check_files(&self) -> Result<(), ConfigErrors> {
        let mut issues = Vec::new();
        let mut check = |key: &str, path: &Path, count: usize| {
            let found = std::fs::File::open(path)
                .map_err(|e| format!("cannot open {}: {e}", path.display()))
                .and_then(|f| {
                    read_snapshot(std::io::BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))
                });
            match found {
                Err(message) => issues.push(ConfigIssue {
                    path: key.into(),
                    message,
                }),
                Ok(s) => {
                    let (dim, n) = (s.modes.dim(), s.modes.n());
                    if dim != self.mesh.dim || n != self.mesh.n || s.fields.len() != count {
                        issues.push(ConfigIssue {
                            path: key.into(),
                            message: format!(
                                "{} holds {} field(s) on d={dim} n={n}; expected {count} on d={} n={}",
                                path.display(),
                                s.fields.len(),
                                self.mesh.dim,
                                self.mesh.n
                            ),
                        });
                    }
                }
            }
        };
        if let InitialSpec::File { path } = &self.initial {
            check("initial.path", path, 1);
        }
        if let TargetSpec::Files { u_d, u_t } = &self.target {
            check("target.u_d", u_d, self.mesh.m_steps + 1);
            check("target.u_T", u_t, 1);
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(issues))
        }
    }
}
