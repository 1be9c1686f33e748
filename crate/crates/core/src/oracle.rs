//! Brute-force reference values and a randomized equivalence suite.
//!
//! The scans here evaluate `f` and `g` point by point and keep nothing
//! between calls; they share no code with [`crate::envelope`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::envelope::{Envelope, EnvelopeError, EnvelopeKind, EnvelopeTable};
use crate::extreal::ExtReal;
use crate::funcspec::{EvalError, FuncExpr};
use crate::grid::SampleGrid;

/// Default cap on the number of lattice points a single scan may visit.
pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("lattice has {points} points, over the budget of {budget}")]
    BudgetExceeded { points: usize, budget: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
}

fn scan(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    budget: usize,
    feasible: impl Fn(f64) -> bool,
    better: impl Fn(f64, f64) -> bool,
    empty: ExtReal,
) -> Result<ExtReal, OracleError> {
    if grid.len() > budget {
        return Err(OracleError::BudgetExceeded {
            points: grid.len(),
            budget,
        });
    }
    let mut best: Option<f64> = None;
    for i in 0..grid.len() {
        let x = grid.point(i);
        if feasible(g.eval(&x)?) {
            let v = f.eval(&x)?;
            if best.is_none_or(|b| better(v, b)) {
                best = Some(v);
            }
        }
    }
    Ok(best.map_or(empty, ExtReal::Finite))
}

/// `max { f(x) : g(x) <= s }` over the lattice by exhaustive scan.
pub fn brute_sup(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
) -> Result<ExtReal, OracleError> {
    brute_sup_with_budget(f, g, grid, s, DEFAULT_BUDGET)
}

/// `min { f(x) : s <= g(x) }` over the lattice by exhaustive scan.
pub fn brute_inf(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
) -> Result<ExtReal, OracleError> {
    brute_inf_with_budget(f, g, grid, s, DEFAULT_BUDGET)
}

pub fn brute_sup_with_budget(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
    budget: usize,
) -> Result<ExtReal, OracleError> {
    scan(
        f,
        g,
        grid,
        budget,
        |gv| gv <= s,
        |v, b| v > b,
        ExtReal::NegInf,
    )
}

pub fn brute_inf_with_budget(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
    budget: usize,
) -> Result<ExtReal, OracleError> {
    scan(
        f,
        g,
        grid,
        budget,
        |gv| s <= gv,
        |v, b| v < b,
        ExtReal::PosInf,
    )
}

/// The implementation under test. The suite only sees envelope values
/// through this trait, so deliberately broken versions can be swapped in.
pub trait Candidate {
    fn table(
        &self,
        f: &FuncExpr,
        g: &FuncExpr,
        grid: &SampleGrid,
        s_values: &[f64],
        kind: EnvelopeKind,
    ) -> Result<EnvelopeTable, OracleError>;
}

/// The library's sweep-based tables.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnvelopeCandidate;

impl Candidate for EnvelopeCandidate {
    fn table(
        &self,
        f: &FuncExpr,
        g: &FuncExpr,
        grid: &SampleGrid,
        s_values: &[f64],
        kind: EnvelopeKind,
    ) -> Result<EnvelopeTable, OracleError> {
        Ok(Envelope::new(f, g, grid)?.table(s_values, kind)?)
    }
}

/// One randomly drawn problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub f: FuncExpr,
    pub g: FuncExpr,
    pub grid: SampleGrid,
    /// Strictly increasing; always includes a level below every lattice
    /// value of `g` and one above, so both feasible sets can be empty.
    pub s_values: Vec<f64>,
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(-2.0f64..=2.0) * 100.0).round() / 100.0
}

fn term(c: f64, powers: &[u32]) -> String {
    let mut out = if c < 0.0 {
        format!("(-{})", -c)
    } else {
        c.to_string()
    };
    for (k, &p) in powers.iter().enumerate() {
        match p {
            0 => {}
            1 => out.push_str(&format!(" * x{}", k + 1)),
            _ => out.push_str(&format!(" * x{}^{p}", k + 1)),
        }
    }
    out
}

fn polynomial(rng: &mut ChaCha8Rng, d: usize) -> String {
    let degree = rng.gen_range(0..=4u32);
    let mut terms = Vec::new();
    let mut push = |powers: Vec<u32>, rng: &mut ChaCha8Rng| {
        if powers.iter().sum::<u32>() == 0 || rng.gen_bool(0.6) {
            let c = coefficient(rng);
            if c != 0.0 || powers.iter().sum::<u32>() == 0 {
                terms.push(term(c, &powers));
            }
        }
    };
    for a in 0..=degree {
        if d == 1 {
            push(vec![a], rng);
        } else {
            for b in 0..=degree - a {
                push(vec![a, b], rng);
            }
        }
    }
    terms.join(" + ")
}

fn random_function(rng: &mut ChaCha8Rng, d: usize) -> FuncExpr {
    let body = if rng.gen_bool(0.4) {
        let normal: Vec<String> = (1..=d)
            .map(|k| term(coefficient(rng), &unit(d, k)))
            .collect();
        let offset = coefficient(rng);
        let op = ["<", "<="].choose(rng).expect("nonempty");
        format!(
            "piecewise {{ {} {op} {offset} : {} ; else : {} }}",
            normal.join(" + "),
            polynomial(rng, d),
            polynomial(rng, d)
        )
    } else {
        polynomial(rng, d)
    };
    FuncExpr::parse(&body, d).expect("generated expressions are well formed")
}

fn unit(d: usize, k: usize) -> Vec<u32> {
    (1..=d).map(|i| u32::from(i == k)).collect()
}

fn random_grid(rng: &mut ChaCha8Rng, d: usize) -> SampleGrid {
    let (lo, hi) = if d == 1 { (5, 200) } else { (2, 30) };
    let bounds: Vec<(f64, f64)> = (0..d)
        .map(|_| {
            let b = f64::from(rng.gen_range(5..=50u32)) / 10.0;
            (-b, b)
        })
        .collect();
    let resolution: Vec<usize> = (0..d).map(|_| 2 * rng.gen_range(lo..=hi) + 1).collect();
    SampleGrid::new(&bounds, &resolution, true).expect("generated grids are valid")
}

impl Instance {
    pub fn random(rng: &mut ChaCha8Rng) -> Instance {
        let d = rng.gen_range(1..=2usize);
        let grid = random_grid(rng, d);
        let f = random_function(rng, d);
        let g = if rng.gen_bool(0.2) {
            crate::funcspec::builtin(&format!("euclid_norm({d})")).expect("in catalog")
        } else {
            random_function(rng, d)
        };
        let samples = grid
            .sample(&g)
            .expect("polynomials evaluate on bounded grids");
        let (min, max) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        let mut s_values = vec![min - 1.0, max + 1.0, min, max];
        for _ in 0..4 {
            // Exact lattice values of g exercise ties at the boundary.
            s_values.push(samples[rng.gen_range(0..samples.len())]);
        }
        for _ in 0..3 {
            s_values.push(if min < max {
                rng.gen_range(min..max)
            } else {
                min
            });
        }
        let mut s_values: Vec<f64> = s_values
            .into_iter()
            .map(|s| if s == 0.0 { 0.0 } else { s })
            .collect();
        s_values.sort_by(f64::total_cmp);
        s_values.dedup();
        Instance {
            f,
            g,
            grid,
            s_values,
        }
    }
}

/// The instances drawn by [`equivalence_suite`] for a given seed.
pub fn suite_instances(seed: u64, trials: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| Instance::random(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub trial: usize,
    /// `oracle-sup`, `oracle-inf`, `monotone`, `duality` or `sandwich`.
    pub check: String,
    pub f: String,
    pub g: String,
    pub grid: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExtReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<ExtReal>,
    pub detail: String,
}

/// Violation counts by property, over all trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SuiteCounts {
    pub oracle_mismatches: usize,
    pub monotone_violations: usize,
    pub duality_violations: usize,
    pub sandwich_violations: usize,
    /// Instances where some tabulated level has an empty feasible set.
    pub empty_feasible_instances: usize,
    pub values_compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub trials: usize,
    pub passes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Divergence>,
    #[serde(skip)]
    pub counts: SuiteCounts,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.passes == self.trials
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Runs `trials` random instances against the library's envelopes.
pub fn equivalence_suite(seed: u64, trials: usize) -> Result<SuiteSummary, OracleError> {
    equivalence_suite_with(&EnvelopeCandidate, seed, trials)
}

/// Runs `trials` random instances against `candidate`, checking bit-exact
/// agreement with the brute-force scans, monotonicity of the raw tables,
/// the negation duality between inf and sup, and the sandwich bound.
pub fn equivalence_suite_with(
    candidate: &dyn Candidate,
    seed: u64,
    trials: usize,
) -> Result<SuiteSummary, OracleError> {
    if trials == 0 {
        return Err(OracleError::Precondition(
            "trials must be at least 1".into(),
        ));
    }
    let mut counts = SuiteCounts::default();
    let mut first_failure = None;
    let mut passes = 0;
    for (trial, inst) in suite_instances(seed, trials).into_iter().enumerate() {
        let found = run_instance(candidate, &inst, trial, &mut counts)?;
        match found {
            None => passes += 1,
            Some(d) => {
                first_failure.get_or_insert(d);
            }
        }
    }
    Ok(SuiteSummary {
        trials,
        passes,
        first_failure,
        counts,
    })
}

fn run_instance(
    candidate: &dyn Candidate,
    inst: &Instance,
    trial: usize,
    counts: &mut SuiteCounts,
) -> Result<Option<Divergence>, OracleError> {
    let Instance {
        f,
        g,
        grid,
        s_values,
    } = inst;
    let record = |check: &str,
                  s: Option<f64>,
                  expected: Option<ExtReal>,
                  actual: Option<ExtReal>,
                  detail: String| {
        Divergence {
            trial,
            check: check.into(),
            f: f.to_string(),
            g: g.to_string(),
            grid: grid.to_string(),
            s,
            expected,
            actual,
            detail,
        }
    };
    let mut first: Option<Divergence> = None;

    let sup = candidate.table(f, g, grid, s_values, EnvelopeKind::SupEnv)?;
    let inf = candidate.table(f, g, grid, s_values, EnvelopeKind::InfEnv)?;
    if sup.values.contains(&ExtReal::NegInf) || inf.values.contains(&ExtReal::PosInf) {
        counts.empty_feasible_instances += 1;
    }

    for (k, &s) in s_values.iter().enumerate() {
        for (name, table, expected) in [
            ("oracle-sup", &sup, brute_sup(f, g, grid, s)?),
            ("oracle-inf", &inf, brute_inf(f, g, grid, s)?),
        ] {
            counts.values_compared += 1;
            if !table.values[k].bit_eq(&expected) {
                counts.oracle_mismatches += 1;
                first.get_or_insert_with(|| {
                    record(
                        name,
                        Some(s),
                        Some(expected),
                        Some(table.values[k]),
                        "value differs from scan".into(),
                    )
                });
            }
        }
    }

    for table in [&sup, &inf] {
        if let Some(k) = table.values.windows(2).position(|w| w[1] < w[0]) {
            counts.monotone_violations += 1;
            first.get_or_insert_with(|| {
                record(
                    "monotone",
                    Some(table.s_values[k + 1]),
                    Some(table.values[k]),
                    Some(table.values[k + 1]),
                    format!("{} decreases", table.kind.name()),
                )
            });
        }
    }

    // inf(f, g, s) against -sup(-f, -g, -s), on the negated levels in
    // increasing order.
    let neg_levels: Vec<f64> = s_values.iter().rev().map(|s| -s).collect();
    let neg_sup = candidate.table(
        &f.negated(),
        &g.negated(),
        grid,
        &neg_levels,
        EnvelopeKind::SupEnv,
    )?;
    for ((&s, value), neg) in s_values
        .iter()
        .zip(&inf.values)
        .zip(neg_sup.values.iter().rev())
    {
        let dual = -*neg;
        if !value.bit_eq(&dual) {
            counts.duality_violations += 1;
            first.get_or_insert_with(|| {
                record(
                    "duality",
                    Some(s),
                    Some(dual),
                    Some(*value),
                    "inf differs from -sup of negations".into(),
                )
            });
            break;
        }
    }

    let f_samples = grid
        .sample(f)
        .map_err(|e| OracleError::Precondition(e.to_string()))?;
    let g_samples = grid
        .sample(g)
        .map_err(|e| OracleError::Precondition(e.to_string()))?;
    let mut levels = g_samples.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let upper = candidate.table(f, g, grid, &levels, EnvelopeKind::SupEnv)?;
    let lower = candidate.table(f, g, grid, &levels, EnvelopeKind::InfEnv)?;
    for (i, (&fv, &gv)) in f_samples.iter().zip(&g_samples).enumerate() {
        let k = levels.partition_point(|&v| v < gv);
        let x = ExtReal::Finite(fv);
        if !(lower.values[k] <= x && x <= upper.values[k]) {
            counts.sandwich_violations += 1;
            first.get_or_insert_with(|| {
                record(
                    "sandwich",
                    Some(gv),
                    Some(x),
                    None,
                    format!(
                        "bounds [{}, {}] miss f at {:?}",
                        lower.values[k],
                        upper.values[k],
                        grid.point(i)
                    ),
                )
            });
            break;
        }
    }
    Ok(first)
}
