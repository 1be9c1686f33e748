use serde::{Deserialize, Serialize};

use super::checks::{
    check_divergence, check_infdef, check_infdef_sufficient, check_level_bounded, check_monotone,
    check_sandwich, check_supdef, check_supdef_pd_shortcut, default_ladder,
};
use super::probe::{probe_function, probe_table, within, SemiProbe};
use super::{CertifyError, CheckResult, Problem, Reason, Verdict, Witness, TAU_ZERO};
use crate::envelope::{dual_check, EnvelopeKind, EnvelopeTable};
use crate::extreal::ExtReal;
use crate::funcspec::FuncExpr;
use crate::grid::SampleGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Monotone,
    Supdef,
    SupdefPd,
    Infdef,
    InfdefSufficient,
    Semicontinuity,
    LevelBounded,
    Divergence,
    Sandwich,
    Duality,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::Monotone,
        CheckId::Supdef,
        CheckId::SupdefPd,
        CheckId::Infdef,
        CheckId::InfdefSufficient,
        CheckId::Semicontinuity,
        CheckId::LevelBounded,
        CheckId::Divergence,
        CheckId::Sandwich,
        CheckId::Duality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Monotone => "monotone",
            CheckId::Supdef => "supdef",
            CheckId::SupdefPd => "supdef-pd",
            CheckId::Infdef => "infdef",
            CheckId::InfdefSufficient => "infdef-sufficient",
            CheckId::Semicontinuity => "semicontinuity",
            CheckId::LevelBounded => "level-bounded",
            CheckId::Divergence => "divergence",
            CheckId::Sandwich => "sandwich",
            CheckId::Duality => "duality",
        }
    }
}

/// Semicontinuity probe of `f` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProbe {
    pub at: Vec<f64>,
    pub radii: Vec<f64>,
}

/// Semicontinuity probe of an envelope in `s`. The table is built locally
/// from every lattice level of `g` within the largest radius of `at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProbe {
    pub kind: EnvelopeKind,
    pub at: f64,
    pub radii: Vec<f64>,
    /// Gap accepted as zero; defaults to the report's `tau_zero`.
    #[serde(default)]
    pub tolerance: Option<ProbeTolerance>,
}

/// Envelope values are lattice optima, so a table cannot show gaps smaller
/// than the variation of `f` over one lattice step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeTolerance {
    Absolute(f64),
    Rule(ToleranceRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToleranceRule {
    /// Largest `|f(x) - f(y)|` over lattice neighbours `x, y` with `g(x)`
    /// within the largest probe radius of the probed level.
    LatticeVariation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub tau_zero: f64,
    /// Levels for the tabulated envelopes.
    pub s_values: Vec<f64>,
    /// Positive levels for the positive definiteness checks; empty means
    /// the positive entries of `s_values`.
    pub s_probe: Vec<f64>,
    pub checks: Vec<CheckId>,
    pub point_probes: Vec<PointProbe>,
    pub table_probes: Vec<TableProbe>,
    /// Empty means quarters of the inscribed radius.
    pub ladder: Vec<f64>,
    pub level_targets: Vec<f64>,
    pub divergence_targets: Vec<f64>,
    /// `g` is the Euclidean norm; tables use the norm kinds.
    pub hahn: bool,
    /// Probes are reported without a verdict.
    pub experiment: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            tau_zero: TAU_ZERO,
            s_values: Vec::new(),
            s_probe: Vec::new(),
            checks: CheckId::ALL.to_vec(),
            point_probes: Vec::new(),
            table_probes: Vec::new(),
            ladder: Vec::new(),
            level_targets: Vec::new(),
            divergence_targets: Vec::new(),
            hahn: false,
            experiment: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportProvenance {
    pub f: String,
    pub g: String,
    pub grid: String,
    pub grid_step: f64,
    pub s_grid: Vec<f64>,
    pub tau_zero: f64,
}

/// Results in a fixed order: each check's aggregated verdict followed by the
/// verdicts it was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub provenance: ReportProvenance,
    pub checks: Vec<CheckResult>,
    /// Upper and lower envelope tables on the report's levels.
    #[serde(skip)]
    pub tables: Vec<EnvelopeTable>,
}

impl CertReport {
    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check_id == id)
    }

    /// Top-level results only.
    pub fn summary(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks
            .iter()
            .filter(|c| !c.check_id.contains(['.', '@']))
    }

    pub fn has_failures(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fails)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn flatten(result: CheckResult, out: &mut Vec<CheckResult>) {
    let mut result = result;
    let parts = std::mem::take(&mut result.parts);
    out.push(result);
    for p in parts {
        flatten(p, out);
    }
}

fn validate(config: &ReportConfig) -> Result<Vec<f64>, CertifyError> {
    if !(config.tau_zero >= 0.0 && config.tau_zero.is_finite()) {
        return Err(CertifyError::Config(
            "tau_zero must be a nonnegative real".into(),
        ));
    }
    if config.s_values.is_empty() {
        return Err(CertifyError::Config("the s-grid is empty".into()));
    }
    if config.s_values.iter().any(|s| !s.is_finite()) {
        return Err(CertifyError::Config("s values must be finite".into()));
    }
    let mut levels: Vec<f64> = config
        .s_values
        .iter()
        .map(|&s| if s == 0.0 { 0.0 } else { s })
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(levels)
}

fn probe_result(id: String, probe: SemiProbe, witness: Witness, experiment: bool) -> CheckResult {
    let detail = format!(
        "value {}, lsc gap {}, usc gap {} (per radius: lsc {:?}, usc {:?})",
        probe.value,
        probe.lsc_gap,
        probe.usc_gap,
        probe
            .lsc_gaps
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
        probe
            .usc_gaps
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
    );
    let side = |suffix: &str, like: bool, gap: ExtReal| {
        let id = format!("{id}.{suffix}");
        let r = if experiment {
            CheckResult::inconclusive(id, Reason::ExperimentOnly, detail.clone())
        } else if like {
            CheckResult::holds(id, detail.clone())
        } else {
            CheckResult::fails(id, witness.clone(), detail.clone())
        };
        r.with_value(gap)
    };
    let parts = vec![
        side("lsc", probe.lsc_like, probe.lsc_gap),
        side("usc", probe.usc_like, probe.usc_gap),
    ];
    CheckResult::aggregate(id, parts)
}

fn format_point(x: &[f64]) -> String {
    let inner: Vec<String> = x.iter().map(ToString::to_string).collect();
    format!("({})", inner.join(","))
}

fn local_table(
    problem: &Problem,
    probe: &TableProbe,
    hahn: bool,
) -> Result<EnvelopeTable, CertifyError> {
    let reach = probe.radii.iter().copied().fold(0.0, f64::max);
    let mut levels: Vec<f64> = problem
        .env
        .g_samples()
        .iter()
        .copied()
        .filter(|&v| within(v, probe.at, reach))
        .chain(std::iter::once(probe.at))
        .filter(|&v| !hahn || v >= 0.0)
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(problem.env.table(&levels, probe.kind)?)
}

fn lattice_variation(problem: &Problem, probe: &TableProbe) -> f64 {
    let reach = probe.radii.iter().copied().fold(0.0, f64::max);
    let (f, g) = (problem.env.f_samples(), problem.env.g_samples());
    let grid = problem.grid();
    (0..grid.len())
        .filter(|&i| within(g[i], probe.at, reach))
        .flat_map(|i| {
            grid.neighbors(i)
                .into_iter()
                .map(move |j| (f[i] - f[j]).abs())
        })
        .fold(0.0, f64::max)
}

fn semicontinuity(problem: &Problem, config: &ReportConfig) -> Result<CheckResult, CertifyError> {
    let tau = config.tau_zero;
    let mut parts = Vec::new();
    for p in &config.point_probes {
        let id = format!("semicontinuity.f@{}", format_point(&p.at));
        match probe_function(&problem.f, &p.at, &p.radii, tau) {
            Ok(probe) => parts.push(probe_result(
                id,
                probe,
                Witness::Point(p.at.clone()),
                config.experiment,
            )),
            Err(CertifyError::NeighborhoodEmpty { radius }) => {
                parts.push(CheckResult::inconclusive(
                    id,
                    Reason::Precondition,
                    format!("no neighbours within radius {radius}"),
                ))
            }
            Err(e) => return Err(e),
        }
    }
    for p in &config.table_probes {
        let id = format!("semicontinuity.{}@{}", p.kind.name(), p.at);
        let table = local_table(problem, p, config.hahn)?;
        let tolerance = match p.tolerance {
            None => tau,
            Some(ProbeTolerance::Absolute(t)) => t,
            Some(ProbeTolerance::Rule(ToleranceRule::LatticeVariation)) => {
                lattice_variation(problem, p)
            }
        };
        match probe_table(&table, p.at, &p.radii, tolerance) {
            Ok(probe) => parts.push(probe_result(id, probe, Witness::S(p.at), config.experiment)),
            Err(CertifyError::NeighborhoodEmpty { radius }) => {
                parts.push(CheckResult::inconclusive(
                    id,
                    Reason::Precondition,
                    format!("no lattice levels within radius {radius} of {}", p.at),
                ))
            }
            Err(e) => return Err(e),
        }
    }
    if parts.is_empty() {
        return Ok(CheckResult::inconclusive(
            "semicontinuity",
            Reason::Precondition,
            "no probes configured",
        ));
    }
    Ok(CheckResult::aggregate("semicontinuity", parts))
}

fn duality(problem: &Problem, levels: &[f64]) -> Result<CheckResult, CertifyError> {
    let grid = problem.grid();
    if !grid.is_symmetric() {
        return Ok(CheckResult::inconclusive(
            "duality",
            Reason::Precondition,
            "grid is not symmetric under negation",
        ));
    }
    let mut parts = Vec::with_capacity(levels.len());
    for &s in levels {
        let id = format!("duality@{s}");
        let d = dual_check(&problem.f, &problem.g, grid, s)?;
        let detail = format!(
            "inf-env = {}, -sup-env(-f, -g, -s) = {}",
            d.inf_value, d.negated_sup_value
        );
        parts.push(if d.pass {
            CheckResult::holds(id, detail).with_value(d.inf_value)
        } else {
            CheckResult::fails(id, Witness::S(s), detail).with_value(d.inf_value)
        });
    }
    Ok(CheckResult::aggregate("duality", parts))
}

/// Runs the configured checks in a fixed order.
///
/// In `hahn` mode `g` is replaced by the Euclidean norm.
pub fn full_report(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    config: &ReportConfig,
) -> Result<CertReport, CertifyError> {
    let levels = validate(config)?;
    let problem = if config.hahn {
        Problem::hahn(f, grid)?
    } else {
        Problem::new(f, g, grid)?
    };
    let tau = config.tau_zero;
    let (upper_kind, lower_kind) = if config.hahn {
        (EnvelopeKind::HahnUpper, EnvelopeKind::HahnLower)
    } else {
        (EnvelopeKind::SupEnv, EnvelopeKind::InfEnv)
    };
    let upper = problem.env.table(&levels, upper_kind)?;
    let lower = problem.env.table(&levels, lower_kind)?;
    let s_probe: Vec<f64> = if config.s_probe.is_empty() {
        levels.iter().copied().filter(|&s| s > 0.0).collect()
    } else {
        config.s_probe.clone()
    };
    let ladder = if config.ladder.is_empty() {
        default_ladder(grid)
    } else {
        config.ladder.clone()
    };

    let mut selected = config.checks.clone();
    selected.sort();
    selected.dedup();

    let mut checks = Vec::new();
    for id in selected {
        let result = match id {
            CheckId::Monotone => CheckResult::aggregate(
                "monotone",
                vec![check_monotone(&upper), check_monotone(&lower)],
            ),
            CheckId::Supdef => check_supdef(&problem, &s_probe, tau),
            CheckId::SupdefPd => match check_supdef_pd_shortcut(&problem, &s_probe, tau) {
                Err(CertifyError::PdAssertionViolated { point }) => CheckResult::fails(
                    "supdef-pd",
                    Witness::Point(point),
                    "pd-assertion-violated: f is not positive definite on the lattice",
                ),
                other => other?,
            },
            CheckId::Infdef => check_infdef(&problem, &s_probe, tau),
            CheckId::InfdefSufficient => check_infdef_sufficient(&problem, &s_probe, tau)?,
            CheckId::Semicontinuity => semicontinuity(&problem, config)?,
            CheckId::LevelBounded => check_level_bounded(
                grid,
                problem.env.f_samples(),
                &ladder,
                &config.level_targets,
            )?,
            CheckId::Divergence => {
                let mut r = check_divergence(&upper, &config.divergence_targets);
                let inner = r.clone();
                r.check_id = "divergence".into();
                r.parts = vec![inner];
                r
            }
            CheckId::Sandwich => check_sandwich(&problem)?,
            CheckId::Duality => duality(&problem, &levels)?,
        };
        flatten(result, &mut checks);
    }

    Ok(CertReport {
        provenance: ReportProvenance {
            f: f.to_string(),
            g: problem.g.to_string(),
            grid: grid.to_string(),
            grid_step: grid.max_step(),
            s_grid: levels,
            tau_zero: tau,
        },
        checks,
        tables: vec![upper, lower],
    })
}
