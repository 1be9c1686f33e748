//! Property checks for envelopes, with structured verdicts and witnesses.
//!
//! Every check is a pure function of its inputs. A `fails` verdict always
//! carries a witness (a lattice point or a level) that reproduces the
//! violated inequality when re-evaluated; an `inconclusive` verdict always
//! carries a reason code.

mod checks;
mod probe;
mod report;

use serde::Serialize;

use crate::envelope::{Envelope, EnvelopeError};
use crate::extreal::ExtReal;
use crate::funcspec::{EvalError, FuncExpr};
use crate::grid::{GridError, SampleGrid};

pub use checks::{
    annulus_minima, check_divergence, check_infdef, check_infdef_sufficient, check_level_bounded,
    check_monotone, check_sandwich, check_supdef, check_supdef_pd_shortcut, AnnulusMin,
};
pub use probe::{probe_function, probe_table, vanishing_infimum, SemiProbe, STENCIL_DIVISIONS};
pub use report::{
    full_report, CertReport, CheckId, PointProbe, ProbeTolerance, ReportConfig, ReportProvenance,
    TableProbe, ToleranceRule,
};

/// Default tolerance for exact-zero conditions.
pub const TAU_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertifyError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("f is not positive definite on the lattice (witness {point:?})")]
    PdAssertionViolated { point: Vec<f64> },
    #[error("annulus {inner} <= ||x|| <= {outer} has no lattice points")]
    EmptyAnnulus { inner: f64, outer: f64 },
    #[error("punctured neighbourhood of radius {radius} has no points")]
    NeighborhoodEmpty { radius: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "holds-on-window")]
    HoldsOnWindow,
    #[serde(rename = "fails")]
    Fails,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsOnWindow => "holds-on-window",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::HoldsOnWindow)
    }
}

/// Machine-readable reasons for `inconclusive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    /// Behaviour at infinity cannot be settled inside the bounded window.
    BoundedDomainLimit,
    /// A check precondition (origin on the lattice, nonempty probes) is unmet.
    Precondition,
    /// Experiment output only; no property is asserted.
    ExperimentOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    None,
    Point(Vec<f64>),
    S(f64),
    /// A pair of levels, e.g. an inversion in a table.
    #[serde(rename = "s")]
    Levels(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<Reason>,
    pub witness: Witness,
    /// The quantity the verdict was decided on, when there is one
    /// (a gap, a lower bound, an optimal value).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<ExtReal>,
    pub detail: String,
    #[serde(skip)]
    pub parts: Vec<CheckResult>,
}

impl CheckResult {
    pub fn holds(id: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::make(id, Verdict::Holds, None, Witness::None, detail)
    }

    pub fn holds_on_window(id: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::make(id, Verdict::HoldsOnWindow, None, Witness::None, detail)
    }

    pub fn fails(id: impl Into<String>, witness: Witness, detail: impl Into<String>) -> Self {
        assert!(witness != Witness::None, "a failure needs a witness");
        Self::make(id, Verdict::Fails, None, witness, detail)
    }

    pub fn inconclusive(id: impl Into<String>, reason: Reason, detail: impl Into<String>) -> Self {
        Self::make(
            id,
            Verdict::Inconclusive,
            Some(reason),
            Witness::None,
            detail,
        )
    }

    fn make(
        id: impl Into<String>,
        verdict: Verdict,
        reason: Option<Reason>,
        witness: Witness,
        detail: impl Into<String>,
    ) -> Self {
        CheckResult {
            check_id: id.into(),
            verdict,
            reason,
            witness,
            value: None,
            detail: detail.into(),
            parts: Vec::new(),
        }
    }

    pub fn with_value(mut self, value: ExtReal) -> Self {
        self.value = Some(value);
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    /// Combines sub-results: any failure fails (carrying the first failing
    /// witness), then any inconclusive, then any window-qualified success.
    pub fn aggregate(id: impl Into<String>, parts: Vec<CheckResult>) -> Self {
        let id = id.into();
        let mut out = if let Some(bad) = parts.iter().find(|p| p.verdict == Verdict::Fails) {
            CheckResult::fails(
                id,
                bad.witness.clone(),
                format!("{} fails: {}", bad.check_id, bad.detail),
            )
        } else if let Some(inc) = parts.iter().find(|p| p.verdict == Verdict::Inconclusive) {
            CheckResult::inconclusive(
                id,
                inc.reason.unwrap_or(Reason::Precondition),
                format!("{} inconclusive: {}", inc.check_id, inc.detail),
            )
        } else if parts.iter().any(|p| p.verdict == Verdict::HoldsOnWindow) {
            CheckResult::holds_on_window(id, "all parts hold, some only on the sampled window")
        } else {
            CheckResult::holds(id, "all parts hold")
        };
        out.parts = parts;
        out
    }

    /// Looks up a part by id, recursively.
    pub fn part(&self, id: &str) -> Option<&CheckResult> {
        self.parts.iter().find_map(|p| {
            if p.check_id == id {
                Some(p)
            } else {
                p.part(id)
            }
        })
    }
}

/// `f`, `g` and their lattice samples.
#[derive(Debug, Clone)]
pub struct Problem {
    pub f: FuncExpr,
    pub g: FuncExpr,
    pub env: Envelope,
}

impl Problem {
    pub fn new(f: &FuncExpr, g: &FuncExpr, grid: &SampleGrid) -> Result<Self, CertifyError> {
        Ok(Problem {
            f: f.clone(),
            g: g.clone(),
            env: Envelope::new(f, g, grid)?,
        })
    }

    /// `g` is the Euclidean norm.
    pub fn hahn(f: &FuncExpr, grid: &SampleGrid) -> Result<Self, CertifyError> {
        let env = Envelope::hahn(f, grid)?;
        let g = crate::funcspec::builtin(&format!("euclid_norm({})", grid.dimension()))
            .expect("euclid_norm is in the catalog");
        Ok(Problem {
            f: f.clone(),
            g,
            env,
        })
    }

    pub fn grid(&self) -> &SampleGrid {
        self.env.grid()
    }

    pub(crate) fn point(&self, index: usize) -> Vec<f64> {
        self.grid().point(index)
    }
}
