//! Configuration, presets and the run driver behind the `komparo` binary.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use komparo::certify::{
    full_report, CertReport, CertifyError, CheckId, PointProbe, ProbeTolerance, ReportConfig,
    TableProbe, ToleranceRule,
};
use komparo::envelope::{s_grid_select, EnvelopeError};
use komparo::funcspec::{builtin, FuncExpr};
use komparo::grid::{GridError, SampleGrid};
use komparo::oracle::{equivalence_suite, OracleError, SuiteSummary};
use komparo::EnvelopeKind;
use serde::{Deserialize, Serialize};

/// The `g_spec` that selects norm envelopes.
pub const NORM_SENTINEL: &str = "norm";

pub const PRESETS: [&str; 3] = ["exmupper", "hahn-doublewell", "open-problem-experiment"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Io { .. } => 3,
            CliError::ChecksFailed(_) => 4,
        }
    }

    fn io(path: &Path, e: impl ToString) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Eval(_) => CliError::Parse(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<EnvelopeError> for CliError {
    fn from(e: EnvelopeError) -> Self {
        match e {
            EnvelopeError::Grid(g) => g.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<CertifyError> for CliError {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::Eval(_) => CliError::Parse(e.to_string()),
            CertifyError::Grid(g) => g.into(),
            CertifyError::Envelope(env) => env.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Eval(_) => CliError::Parse(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SGrid {
    /// `count` quantiles of the lattice values of `g`.
    Auto {
        count: usize,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tau_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_zero: komparo::certify::TAU_ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Relative paths are taken from the directory of the config file.
    pub dir: PathBuf,
}

fn all_checks() -> Vec<CheckId> {
    CheckId::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub f_spec: String,
    pub g_spec: String,
    pub dimension: usize,
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
    pub symmetric: bool,
    pub s_grid: SGrid,
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    #[serde(default = "all_checks")]
    pub checks: Vec<CheckId>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub s_probe: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_probes: Vec<PointProbe>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table_probes: Vec<TableProbe>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divergence_targets: Vec<f64>,
    /// Report probe results without verdicts.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub experiment: bool,
    pub output: Output,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn is_hahn(&self) -> bool {
        self.g_spec == NORM_SENTINEL
    }
}

const PROBE_RADII: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

fn line_config(f: &str, g: &str, s_grid: SGrid) -> RunConfig {
    RunConfig {
        f_spec: f.into(),
        g_spec: g.into(),
        dimension: 1,
        bounds: vec![[-5.0, 5.0]],
        resolution: vec![1001],
        symmetric: true,
        s_grid,
        breakpoints: Vec::new(),
        checks: all_checks(),
        tolerances: Tolerances::default(),
        s_probe: Vec::new(),
        point_probes: Vec::new(),
        table_probes: Vec::new(),
        ladder: Vec::new(),
        level_targets: Vec::new(),
        divergence_targets: Vec::new(),
        experiment: false,
        output: Output {
            dir: PathBuf::from("."),
        },
    }
}

/// Canned configurations. All write next to the config file.
pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    // A table gap cannot resolve below the variation of f over one lattice
    // step; for x^2 near 0 on a 0.01 lattice that is 0.01^2.
    let lattice_gap = 0.01f64.powi(2) + 1e-9;
    match name {
        "exmupper" => Ok(RunConfig {
            s_probe: vec![0.5, 1.0, 2.0],
            point_probes: vec![PointProbe {
                at: vec![0.0],
                radii: PROBE_RADII.to_vec(),
            }],
            table_probes: vec![TableProbe {
                kind: EnvelopeKind::InfEnv,
                at: 0.0,
                radii: vec![0.05, 0.01],
                tolerance: Some(ProbeTolerance::Absolute(lattice_gap)),
            }],
            ..line_config(
                "exmupper_f",
                "identity_1d",
                SGrid::Explicit(vec![-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0]),
            )
        }),
        "hahn-doublewell" => Ok(RunConfig {
            checks: vec![
                CheckId::Monotone,
                CheckId::Semicontinuity,
                CheckId::LevelBounded,
                CheckId::Divergence,
                CheckId::Sandwich,
                CheckId::Duality,
            ],
            point_probes: [0.0, 0.5, 1.0]
                .iter()
                .map(|&x| PointProbe {
                    at: vec![x],
                    radii: PROBE_RADII.to_vec(),
                })
                .collect(),
            table_probes: [EnvelopeKind::HahnLower, EnvelopeKind::HahnUpper]
                .iter()
                .flat_map(|&kind| {
                    [0.5, 1.0, 2.0].map(|at| TableProbe {
                        kind,
                        at,
                        radii: vec![0.05, 0.01],
                        tolerance: Some(ProbeTolerance::Rule(ToleranceRule::LatticeVariation)),
                    })
                })
                .collect(),
            divergence_targets: vec![1.0, 10.0, 100.0],
            ..line_config(
                "double_well",
                NORM_SENTINEL,
                SGrid::Explicit((0..=20).map(|k| f64::from(k) / 4.0).collect()),
            )
        }),
        "open-problem-experiment" => Ok(RunConfig {
            checks: vec![CheckId::Semicontinuity],
            table_probes: [0.0, 0.5, 1.0]
                .iter()
                .map(|&at| TableProbe {
                    kind: EnvelopeKind::InfEnv,
                    at,
                    radii: vec![0.05, 0.01],
                    tolerance: Some(ProbeTolerance::Absolute(lattice_gap)),
                })
                .collect(),
            experiment: true,
            breakpoints: vec![0.0, 0.5, 1.0],
            ..line_config("exmupper_f", "x1^2", SGrid::Auto { count: 21 })
        }),
        _ => Err(CliError::Config(format!(
            "unknown preset {name:?}; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: CertReport,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// One line per top-level check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.report
            .summary()
            .map(|c| match c.reason {
                Some(r) => format!(
                    "{:<18} {} ({})",
                    c.check_id,
                    c.verdict.as_str(),
                    serde_json::to_value(r)
                        .expect("reason serializes")
                        .as_str()
                        .unwrap_or_default()
                ),
                None => format!("{:<18} {}", c.check_id, c.verdict.as_str()),
            })
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.report
            .summary()
            .filter(|c| c.verdict == komparo::certify::Verdict::Fails)
            .count()
    }
}

/// Builds the grid, tables and report, and writes them under the output
/// directory (which must exist). `base` anchors a relative output path.
pub fn run(config: &RunConfig, base: &Path) -> Result<RunOutcome, CliError> {
    let dir = if config.output.dir.is_absolute() {
        config.output.dir.clone()
    } else {
        base.join(&config.output.dir)
    };
    if !dir.is_dir() {
        return Err(CliError::io(&dir, "output directory does not exist"));
    }
    if config.bounds.len() != config.dimension || config.resolution.len() != config.dimension {
        return Err(CliError::Config(format!(
            "bounds and resolution need {} entries",
            config.dimension
        )));
    }
    let bounds: Vec<(f64, f64)> = config.bounds.iter().map(|b| (b[0], b[1])).collect();
    let grid = SampleGrid::new(&bounds, &config.resolution, config.symmetric)?;

    let parse = |spec: &str| {
        FuncExpr::from_spec(spec, config.dimension).map_err(|e| CliError::Parse(e.to_string()))
    };
    let f = parse(&config.f_spec)?;
    let g = if config.is_hahn() {
        builtin(&format!("euclid_norm({})", config.dimension))
            .map_err(|e| CliError::Config(e.to_string()))?
    } else {
        parse(&config.g_spec)?
    };

    let mut s_values = match &config.s_grid {
        SGrid::Auto { count } => s_grid_select(&g, &grid, &config.breakpoints, *count)?,
        SGrid::Explicit(list) => list.iter().chain(&config.breakpoints).copied().collect(),
    };
    if config.is_hahn() {
        s_values.retain(|&s| s >= 0.0);
    }

    let report_config = ReportConfig {
        tau_zero: config.tolerances.tau_zero,
        s_values,
        s_probe: config.s_probe.clone(),
        checks: config.checks.clone(),
        point_probes: config.point_probes.clone(),
        table_probes: config.table_probes.clone(),
        ladder: config.ladder.clone(),
        level_targets: config.level_targets.clone(),
        divergence_targets: config.divergence_targets.clone(),
        hahn: config.is_hahn(),
        experiment: config.experiment,
    };
    let report = full_report(&f, &g, &grid, &report_config)?;

    let mut files = Vec::new();
    for table in &report.tables {
        let path = dir.join(format!("{}.csv", table.kind.name()));
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        table
            .write_csv(BufWriter::new(file))
            .map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }
    let path = dir.join("report.json");
    fs::write(&path, report.to_json() + "\n").map_err(|e| CliError::io(&path, e))?;
    files.push(path);
    Ok(RunOutcome { report, files })
}

/// Reads a config file and runs it relative to the file's directory.
pub fn run_file(path: &Path) -> Result<RunOutcome, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config = RunConfig::from_json(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    run(&config, base)
}

pub fn write_preset(name: &str, out: &Path) -> Result<(), CliError> {
    let config = preset(name)?;
    fs::write(out, config.to_json() + "\n").map_err(|e| CliError::io(out, e))
}

pub fn oracle_suite(seed: u64, trials: usize) -> Result<SuiteSummary, CliError> {
    Ok(equivalence_suite(seed, trials)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let c = preset(name).unwrap();
            assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        }
        assert!(matches!(preset("nope"), Err(CliError::Config(_))));
    }

    #[test]
    fn exmupper_preset_shape() {
        let c = preset("exmupper").unwrap();
        assert_eq!(c.resolution, vec![1001]);
        assert_eq!(c.bounds, vec![[-5.0, 5.0]]);
        assert!(!c.is_hahn());
        let d = preset("hahn-doublewell").unwrap();
        assert!(d.is_hahn() && d.symmetric);
        assert_eq!(d.f_spec, "double_well");
    }

    #[test]
    fn s_grid_forms() {
        let auto: SGrid = serde_json::from_str(r#"{"auto":{"count":5}}"#).unwrap();
        assert_eq!(auto, SGrid::Auto { count: 5 });
        let explicit: SGrid = serde_json::from_str(r#"{"explicit":[0,1.5]}"#).unwrap();
        assert_eq!(explicit, SGrid::Explicit(vec![0.0, 1.5]));
    }

    #[test]
    fn unknown_keys_and_checks_are_config_errors() {
        let mut v = serde_json::to_value(preset("exmupper").unwrap()).unwrap();
        v["checks"] = serde_json::json!(["supdef", "bogus"]);
        assert!(matches!(
            RunConfig::from_json(&v.to_string()),
            Err(CliError::Config(_))
        ));
        let mut v = serde_json::to_value(preset("exmupper").unwrap()).unwrap();
        v["colour"] = serde_json::json!("red");
        assert!(matches!(
            RunConfig::from_json(&v.to_string()),
            Err(CliError::Config(_))
        ));
    }
}
