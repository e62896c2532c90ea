//! Declarative experiment configuration: a TOML file with nested sections,
//! overridable field-by-field from command-line flags. Unknown keys are
//! rejected at parse time so typos cannot silently fall back to defaults.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Everything that can fail before any physics runs (exit code 2) versus
/// failures during a run (exit code 1).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "run error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Run(_) => "run",
        }
    }
    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Run(m) => m,
        }
    }
}

impl From<faberdyn::Error> for CliError {
    fn from(e: faberdyn::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

// ─────────────────────────────────────────────────────────────────────────────
// File schema (everything optional; defaults are per experiment)
// ─────────────────────────────────────────────────────────────────────────────

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<String>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub np: NpSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n_sites: Option<usize>,
    pub j: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    /// "open" or "periodic" (spectra also accepts the aliases obc/pbc).
    pub boundary: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    /// Emit observables every this many steps (1 = every step).
    pub snapshot_every: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpSection {
    /// "threshold" (adaptive truncation) or "fixed" (exact order).
    pub policy: Option<String>,
    pub threshold: Option<f64>,
    pub order: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub n_trajectories: Option<usize>,
    pub out_dir: Option<String>,
    pub threads: Option<usize>,
    pub dt_max: Option<f64>,
    pub norm_tol: Option<f64>,
}

// ─────────────────────────────────────────────────────────────────────────────
// Resolved configuration
// ─────────────────────────────────────────────────────────────────────────────

/// Expansion-order policy for the propagator tables.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum NpPolicy {
    /// Truncate once coefficients fall below `threshold`.
    Threshold { threshold: f64 },
    /// Use exactly `order` terms.
    Fixed { order: usize },
}

/// Fully resolved run parameters; serialized verbatim into the manifest so a
/// rerun needs nothing but this record.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub experiment: String,
    pub n_sites: usize,
    pub j: f64,
    pub gamma: f64,
    pub delta: f64,
    pub boundary: String,
    pub t_final: f64,
    pub dt: f64,
    pub snapshot_every: usize,
    pub np: NpPolicy,
    pub seed: u64,
    pub n_trajectories: usize,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub dt_max: f64,
    pub norm_tol: f64,
}

/// The experiment registry, in stable listing order.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    (
        "benchmark_cdw",
        "charge-density-wave quench of the free non-reciprocal chain: density, current, and entropy profiles over time, with boundary accumulation",
    ),
    (
        "hn_domain_wall",
        "domain-wall melting of the free non-reciprocal chain: space-time density, current, and entropy profiles",
    ),
    (
        "ghd_compare",
        "domain-wall melting at large size compared site-by-site against the ballistic hydrodynamic closed forms for density, current, and entropy",
    ),
    (
        "interacting_neel",
        "interacting non-reciprocal spin chain from the alternating (Néel) state: magnetization and current space-time profiles, half-chain entropy, settling time, and late-time averaged profile",
    ),
    (
        "interacting_dw",
        "interacting non-reciprocal spin chain from a domain wall: magnetization and current space-time profiles and half-chain entropy",
    ),
    (
        "model_a_traj",
        "jump unravelling with boundary-and-bond lowering channels: ensemble-averaged magnetization and conditional half-chain entropy with standard errors",
    ),
    (
        "model_b_traj",
        "jump unravelling with excitation-transport bond channels: ensemble-averaged magnetization and conditional half-chain entropy with standard errors",
    ),
    (
        "spectra",
        "single-particle spectra of the non-reciprocal chain: closed-form versus dense eigenvalues for open or periodic boundaries",
    ),
];

fn known_experiment(name: &str) -> CliResult<()> {
    if EXPERIMENTS.iter().any(|(n, _)| *n == name) {
        return Ok(());
    }
    let names: Vec<&str> = EXPERIMENTS.iter().map(|(n, _)| *n).collect();
    Err(CliError::Config(format!(
        "unknown experiment `{name}`; expected one of: {}",
        names.join(", ")
    )))
}

/// Per-experiment desk-scale defaults. Every field can be overridden by the
/// config file and then by flags.
fn defaults(experiment: &str) -> Resolved {
    let base = Resolved {
        experiment: experiment.to_string(),
        n_sites: 24,
        j: 1.0,
        gamma: 0.2,
        delta: 0.0,
        boundary: "open".into(),
        t_final: 10.0,
        dt: 0.1,
        snapshot_every: 1,
        np: NpPolicy::Threshold { threshold: 1e-16 },
        seed: 1,
        n_trajectories: 100,
        out_dir: PathBuf::from("out"),
        threads: 0,
        dt_max: 0.05,
        norm_tol: 1e-10,
    };
    match experiment {
        "benchmark_cdw" => Resolved {
            gamma: -0.8,
            t_final: 10.0,
            ..base
        },
        "hn_domain_wall" => Resolved {
            n_sites: 64,
            t_final: 20.0,
            ..base
        },
        "ghd_compare" => Resolved {
            n_sites: 256,
            t_final: 40.0,
            ..base
        },
        "interacting_neel" => Resolved {
            n_sites: 12,
            gamma: 0.8,
            delta: 1.0,
            t_final: 20.0,
            dt: 0.05,
            snapshot_every: 4,
            ..base
        },
        "interacting_dw" => Resolved {
            n_sites: 12,
            gamma: 0.2,
            delta: 1.0,
            t_final: 20.0,
            dt: 0.05,
            snapshot_every: 4,
            ..base
        },
        "model_a_traj" => Resolved {
            n_sites: 8,
            gamma: 0.8,
            t_final: 10.0,
            dt: 0.25, // snapshot spacing
            ..base
        },
        "model_b_traj" => Resolved {
            n_sites: 8,
            gamma: 0.8,
            t_final: 10.0,
            dt: 0.25,
            ..base
        },
        "spectra" => Resolved {
            n_sites: 64,
            gamma: 0.5,
            ..base
        },
        _ => base,
    }
}

/// Command-line overrides (a subset of the file schema, flattened).
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n_sites: Option<usize>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub j: Option<f64>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub boundary: Option<String>,
    pub seed: Option<u64>,
    pub n_trajectories: Option<usize>,
    pub threads: Option<usize>,
    pub out_dir: Option<String>,
}

/// Merges defaults ← file ← flags and validates the result.
pub fn resolve(
    experiment: &str,
    file: &FileConfig,
    flags: &Overrides,
) -> CliResult<Resolved> {
    known_experiment(experiment)?;
    if let Some(name) = &file.experiment {
        if name != experiment {
            return Err(CliError::Config(format!(
                "config file names experiment `{name}` but `{experiment}` was requested"
            )));
        }
    }
    let mut r = defaults(experiment);

    let m = &file.model;
    r.n_sites = m.n_sites.unwrap_or(r.n_sites);
    r.j = m.j.unwrap_or(r.j);
    r.gamma = m.gamma.unwrap_or(r.gamma);
    r.delta = m.delta.unwrap_or(r.delta);
    r.boundary = m.boundary.clone().unwrap_or(r.boundary);
    let t = &file.time;
    r.t_final = t.t_final.unwrap_or(r.t_final);
    r.dt = t.dt.unwrap_or(r.dt);
    r.snapshot_every = t.snapshot_every.unwrap_or(r.snapshot_every);
    r.np = match file.np.policy.as_deref() {
        None => match (file.np.threshold, file.np.order) {
            (None, None) => r.np,
            (Some(th), None) => NpPolicy::Threshold { threshold: th },
            (None, Some(order)) => NpPolicy::Fixed { order },
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either np.threshold or np.order, not both".into(),
                ))
            }
        },
        Some("threshold") => NpPolicy::Threshold {
            threshold: file.np.threshold.unwrap_or(1e-16),
        },
        Some("fixed") => NpPolicy::Fixed {
            order: file.np.order.ok_or_else(|| {
                CliError::Config("np.policy = \"fixed\" requires np.order".into())
            })?,
        },
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown np.policy `{other}`; expected \"threshold\" or \"fixed\""
            )))
        }
    };
    let rs = &file.run;
    r.seed = rs.seed.unwrap_or(r.seed);
    r.n_trajectories = rs.n_trajectories.unwrap_or(r.n_trajectories);
    r.out_dir = rs.out_dir.clone().map(PathBuf::from).unwrap_or(r.out_dir);
    r.threads = rs.threads.unwrap_or(r.threads);
    r.dt_max = rs.dt_max.unwrap_or(r.dt_max);
    r.norm_tol = rs.norm_tol.unwrap_or(r.norm_tol);

    r.n_sites = flags.n_sites.unwrap_or(r.n_sites);
    r.gamma = flags.gamma.unwrap_or(r.gamma);
    r.delta = flags.delta.unwrap_or(r.delta);
    r.j = flags.j.unwrap_or(r.j);
    r.t_final = flags.t_final.unwrap_or(r.t_final);
    r.dt = flags.dt.unwrap_or(r.dt);
    r.boundary = flags.boundary.clone().unwrap_or(r.boundary);
    r.seed = flags.seed.unwrap_or(r.seed);
    r.n_trajectories = flags.n_trajectories.unwrap_or(r.n_trajectories);
    r.threads = flags.threads.unwrap_or(r.threads);
    r.out_dir = flags
        .out_dir
        .clone()
        .map(PathBuf::from)
        .unwrap_or(r.out_dir);

    validate(&r)?;
    Ok(r)
}

fn validate(r: &Resolved) -> CliResult<()> {
    let fail = |m: String| Err(CliError::Config(m));
    if r.n_sites < 2 {
        return fail(format!("n_sites must be at least 2, got {}", r.n_sites));
    }
    if !(r.j.is_finite() && r.j > 0.0) {
        return fail(format!("j must be positive, got {}", r.j));
    }
    if !r.gamma.is_finite() || !r.delta.is_finite() {
        return fail("gamma and delta must be finite".into());
    }
    if !(r.t_final.is_finite() && r.t_final > 0.0) {
        return fail(format!("t_final must be positive, got {}", r.t_final));
    }
    if !(r.dt.is_finite() && r.dt > 0.0 && r.dt <= r.t_final) {
        return fail(format!("dt must lie in (0, t_final], got {}", r.dt));
    }
    if r.snapshot_every == 0 {
        return fail("snapshot_every must be at least 1".into());
    }
    match r.np {
        NpPolicy::Threshold { threshold } => {
            if !(threshold > 0.0 && threshold < 1.0) {
                return fail(format!("np threshold must lie in (0, 1), got {threshold}"));
            }
        }
        NpPolicy::Fixed { order } => {
            if order < 2 || order > 100_000 {
                return fail(format!("np order must lie in [2, 100000], got {order}"));
            }
        }
    }
    match r.experiment.as_str() {
        "interacting_neel" | "interacting_dw" => {
            if r.n_sites > 20 {
                return fail(format!(
                    "sector evolution is capped at 20 sites for desk-scale runs, got {}",
                    r.n_sites
                ));
            }
        }
        "model_a_traj" | "model_b_traj" => {
            if r.n_sites > 14 {
                return fail(format!(
                    "trajectory ensembles are capped at 14 sites (full 2^L space), got {}",
                    r.n_sites
                ));
            }
            if r.n_trajectories == 0 {
                return fail("n_trajectories must be at least 1".into());
            }
            if !(r.dt_max > 0.0 && r.dt_max.is_finite()) {
                return fail(format!("dt_max must be positive, got {}", r.dt_max));
            }
            if !(r.norm_tol > 0.0 && r.norm_tol <= 1e-6) {
                return fail(format!(
                    "norm_tol must lie in (0, 1e-6], got {}",
                    r.norm_tol
                ));
            }
        }
        _ => {}
    }
    match normalized_boundary(&r.boundary) {
        Some(_) => Ok(()),
        None => fail(format!(
            "unknown boundary `{}`; expected open/obc or periodic/pbc",
            r.boundary
        )),
    }
}

/// Canonical boundary name, accepting the common aliases.
pub fn normalized_boundary(name: &str) -> Option<faberdyn::operators::Boundary> {
    match name.to_ascii_lowercase().as_str() {
        "open" | "obc" => Some(faberdyn::operators::Boundary::Open),
        "periodic" | "pbc" => Some(faberdyn::operators::Boundary::Periodic),
        _ => None,
    }
}

/// Loads and parses the TOML config file, surfacing unknown keys verbatim.
pub fn load_file(path: &std::path::Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}
