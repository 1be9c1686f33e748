//! Sup- and inf-envelopes of `f` over level sets of `g` on a lattice.
//!
//! * sup-envelope: `s -> max { f(x) : g(x) <= s }`, `-inf` on an empty sublevel;
//! * inf-envelope: `s -> min { f(x) : s <= g(x) }`, `+inf` on an empty superlevel.
//!
//! With `g` the Euclidean norm these are the upper and lower Hahn comparison
//! functions of `f`. Optima over the lattice are always attained; ties are
//! broken towards the lowest lattice index.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::extreal::ExtReal;
use crate::funcspec::{builtin, FuncExpr};
use crate::grid::{GridError, SampleGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvelopeError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("duality check needs a negation-symmetric grid")]
    NonSymmetricGrid,
    #[error("norm envelopes are defined for s >= 0, got {0}")]
    NegativeLevel(f64),
    #[error("norm envelope requested on an envelope whose constraint is not the norm")]
    NotNormConstraint,
    #[error("s values must be finite and strictly increasing")]
    SValuesNotIncreasing,
    #[error("at least two quantiles are needed, got {0}")]
    QuantileCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvelopeKind {
    #[serde(rename = "sup-env")]
    SupEnv,
    #[serde(rename = "inf-env")]
    InfEnv,
    #[serde(rename = "hahn-upper")]
    HahnUpper,
    #[serde(rename = "hahn-lower")]
    HahnLower,
}

impl EnvelopeKind {
    /// Sup over sublevels (as opposed to inf over superlevels).
    pub fn is_upper(self) -> bool {
        matches!(self, EnvelopeKind::SupEnv | EnvelopeKind::HahnUpper)
    }

    pub fn is_hahn(self) -> bool {
        matches!(self, EnvelopeKind::HahnUpper | EnvelopeKind::HahnLower)
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeKind::SupEnv => "sup-env",
            EnvelopeKind::InfEnv => "inf-env",
            EnvelopeKind::HahnUpper => "hahn-upper",
            EnvelopeKind::HahnLower => "hahn-lower",
        }
    }
}

/// An optimal value and the lattice index attaining it (`None` when the
/// feasible set is empty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub value: ExtReal,
    pub witness: Option<usize>,
}

/// `f` and `g` sampled on a lattice, ready for repeated envelope queries.
#[derive(Debug, Clone)]
pub struct Envelope {
    grid: SampleGrid,
    f: Vec<f64>,
    g: Vec<f64>,
    f_label: String,
    g_label: String,
    hahn: bool,
}

impl Envelope {
    pub fn new(f: &FuncExpr, g: &FuncExpr, grid: &SampleGrid) -> Result<Self, EnvelopeError> {
        Ok(Envelope {
            grid: grid.clone(),
            f: grid.sample(f)?,
            g: grid.sample(g)?,
            f_label: f.to_string(),
            g_label: g.to_string(),
            hahn: false,
        })
    }

    /// Envelopes of `f` over balls and their complements: `g = ||x||`.
    pub fn hahn(f: &FuncExpr, grid: &SampleGrid) -> Result<Self, EnvelopeError> {
        let norm = builtin(&format!("euclid_norm({})", grid.dimension()))
            .expect("euclid_norm is in the catalog");
        let mut env = Self::new(f, &norm, grid)?;
        env.hahn = true;
        Ok(env)
    }

    /// Uses precomputed samples; both slices must have one value per lattice point.
    pub fn from_samples(grid: &SampleGrid, f: Vec<f64>, g: Vec<f64>) -> Self {
        assert_eq!(f.len(), grid.len());
        assert_eq!(g.len(), grid.len());
        Envelope {
            grid: grid.clone(),
            f,
            g,
            f_label: "samples".into(),
            g_label: "samples".into(),
            hahn: false,
        }
    }

    pub fn with_labels(mut self, f: impl Into<String>, g: impl Into<String>) -> Self {
        self.f_label = f.into();
        self.g_label = g.into();
        self
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn f_samples(&self) -> &[f64] {
        &self.f
    }

    pub fn g_samples(&self) -> &[f64] {
        &self.g
    }

    pub fn is_hahn(&self) -> bool {
        self.hahn
    }

    /// Sup-envelope at `s`, by a full scan.
    pub fn sup(&self, s: f64) -> Optimum {
        let mut best: Option<usize> = None;
        for (i, (&fv, &gv)) in self.f.iter().zip(&self.g).enumerate() {
            if gv <= s && best.is_none_or(|b| fv > self.f[b]) {
                best = Some(i);
            }
        }
        self.optimum(best, ExtReal::NegInf)
    }

    /// Inf-envelope at `s`, by a full scan.
    pub fn inf(&self, s: f64) -> Optimum {
        let mut best: Option<usize> = None;
        for (i, (&fv, &gv)) in self.f.iter().zip(&self.g).enumerate() {
            if s <= gv && best.is_none_or(|b| fv < self.f[b]) {
                best = Some(i);
            }
        }
        self.optimum(best, ExtReal::PosInf)
    }

    fn optimum(&self, best: Option<usize>, empty: ExtReal) -> Optimum {
        Optimum {
            value: best.map_or(empty, |i| ExtReal::Finite(self.f[i])),
            witness: best,
        }
    }

    /// Tabulates the envelope on strictly increasing `s_values` with a single
    /// sweep over the lattice sorted by `g`.
    ///
    /// The Hahn kinds require an envelope built with [`Envelope::hahn`] and
    /// nonnegative `s`; the plain kinds accept either.
    pub fn table(
        &self,
        s_values: &[f64],
        kind: EnvelopeKind,
    ) -> Result<EnvelopeTable, EnvelopeError> {
        if s_values.iter().any(|s| !s.is_finite()) || s_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EnvelopeError::SValuesNotIncreasing);
        }
        if kind.is_hahn() {
            if !self.hahn {
                return Err(EnvelopeError::NotNormConstraint);
            }
            if let Some(&s) = s_values.iter().find(|&&s| s < 0.0) {
                return Err(EnvelopeError::NegativeLevel(s));
            }
        }
        let mut order: Vec<usize> = (0..self.grid.len()).collect();
        order.sort_by(|&a, &b| self.g[a].total_cmp(&self.g[b]).then(a.cmp(&b)));

        let mut witnesses = vec![None; s_values.len()];
        let mut best: Option<usize> = None;
        if kind.is_upper() {
            let mut next = 0;
            for (slot, &s) in witnesses.iter_mut().zip(s_values) {
                while next < order.len() && self.g[order[next]] <= s {
                    let i = order[next];
                    if best.is_none_or(|b| better_max(self.f[i], i, self.f[b], b)) {
                        best = Some(i);
                    }
                    next += 1;
                }
                *slot = best;
            }
        } else {
            let mut next = order.len();
            for (slot, &s) in witnesses.iter_mut().zip(s_values).rev() {
                while next > 0 && s <= self.g[order[next - 1]] {
                    let i = order[next - 1];
                    if best.is_none_or(|b| better_min(self.f[i], i, self.f[b], b)) {
                        best = Some(i);
                    }
                    next -= 1;
                }
                *slot = best;
            }
        }
        let empty = if kind.is_upper() {
            ExtReal::NegInf
        } else {
            ExtReal::PosInf
        };
        let values = witnesses
            .iter()
            .map(|w| w.map_or(empty, |i| ExtReal::Finite(self.f[i])))
            .collect();
        Ok(EnvelopeTable {
            kind,
            s_values: s_values.to_vec(),
            values,
            witnesses,
            grid: Some(self.grid.clone()),
            provenance: Provenance {
                f: self.f_label.clone(),
                g: self.g_label.clone(),
                grid: self.grid.to_string(),
                grid_step: self.grid.max_step(),
            },
        })
    }
}

fn better_max(v: f64, i: usize, best: f64, b: usize) -> bool {
    v > best || (v == best && i < b)
}

fn better_min(v: f64, i: usize, best: f64, b: usize) -> bool {
    v < best || (v == best && i < b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub f: String,
    pub g: String,
    pub grid: String,
    /// Largest lattice step; values carry no accuracy claim below it.
    pub grid_step: f64,
}

/// Envelope values on a strictly increasing list of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTable {
    pub kind: EnvelopeKind,
    pub s_values: Vec<f64>,
    pub values: Vec<ExtReal>,
    pub witnesses: Vec<Option<usize>>,
    grid: Option<SampleGrid>,
    pub provenance: Provenance,
}

impl EnvelopeTable {
    /// A table from raw values, without witnesses.
    pub fn from_values(
        kind: EnvelopeKind,
        s_values: Vec<f64>,
        values: Vec<ExtReal>,
    ) -> Result<Self, EnvelopeError> {
        if s_values.len() != values.len()
            || s_values.iter().any(|s| !s.is_finite())
            || s_values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(EnvelopeError::SValuesNotIncreasing);
        }
        let n = s_values.len();
        Ok(EnvelopeTable {
            kind,
            s_values,
            values,
            witnesses: vec![None; n],
            grid: None,
            provenance: Provenance {
                f: "table".into(),
                g: "table".into(),
                grid: String::new(),
                grid_step: 0.0,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.s_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_values.is_empty()
    }

    pub fn value_at(&self, s: f64) -> Option<ExtReal> {
        self.s_values
            .iter()
            .position(|&t| t == s)
            .map(|k| self.values[k])
    }

    pub fn witness_point(&self, k: usize) -> Option<Vec<f64>> {
        let grid = self.grid.as_ref()?;
        self.witnesses[k].map(|i| grid.point(i))
    }

    /// `s,value,witness_x1..witness_xd`; infinite values leave the witness
    /// columns empty and are written as `-inf` / `+inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.grid.as_ref().map_or(0, SampleGrid::dimension);
        write!(w, "s,value")?;
        for i in 1..=d {
            write!(w, ",witness_x{i}")?;
        }
        writeln!(w)?;
        for k in 0..self.len() {
            write!(w, "{},{}", self.s_values[k], self.values[k])?;
            match self.witness_point(k) {
                Some(p) => {
                    for x in p {
                        write!(w, ",{x}")?;
                    }
                }
                None => {
                    for _ in 0..d {
                        write!(w, ",")?;
                    }
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn sup_env(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
) -> Result<Optimum, EnvelopeError> {
    Ok(Envelope::new(f, g, grid)?.sup(s))
}

pub fn inf_env(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
) -> Result<Optimum, EnvelopeError> {
    Ok(Envelope::new(f, g, grid)?.inf(s))
}

/// Upper norm envelope: `max { f(x) : ||x|| <= s }`.
pub fn hahn_upper(f: &FuncExpr, grid: &SampleGrid, s: f64) -> Result<Optimum, EnvelopeError> {
    if s < 0.0 {
        return Err(EnvelopeError::NegativeLevel(s));
    }
    Ok(Envelope::hahn(f, grid)?.sup(s))
}

/// Lower norm envelope: `min { f(x) : s <= ||x|| }`.
pub fn hahn_lower(f: &FuncExpr, grid: &SampleGrid, s: f64) -> Result<Optimum, EnvelopeError> {
    if s < 0.0 {
        return Err(EnvelopeError::NegativeLevel(s));
    }
    Ok(Envelope::hahn(f, grid)?.inf(s))
}

pub fn envelope_table(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s_values: &[f64],
    kind: EnvelopeKind,
) -> Result<EnvelopeTable, EnvelopeError> {
    let env = if kind.is_hahn() {
        Envelope::hahn(f, grid)?
    } else {
        Envelope::new(f, g, grid)?
    };
    env.table(s_values, kind)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCheck {
    /// `inf { f : s <= g }`
    pub inf_value: ExtReal,
    /// `-sup { -f : -g <= -s }`
    pub negated_sup_value: ExtReal,
    pub pass: bool,
}

/// Checks `inf_env(f, g, s) == -sup_env(-f, -g, -s)` bit for bit.
pub fn dual_check(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
) -> Result<DualCheck, EnvelopeError> {
    if !grid.is_symmetric() {
        return Err(EnvelopeError::NonSymmetricGrid);
    }
    let inf_value = Envelope::new(f, g, grid)?.inf(s).value;
    let negated_sup_value = -Envelope::new(&f.negated(), &g.negated(), grid)?
        .sup(-s)
        .value;
    Ok(DualCheck {
        inf_value,
        negated_sup_value,
        pass: inf_value.bit_eq(&negated_sup_value),
    })
}

/// Levels for tabulation: `count` evenly spaced quantiles of the lattice
/// values of `g` (so the lattice minimum and maximum are always present)
/// merged with `breakpoints`, sorted and deduplicated.
pub fn s_grid_select(
    g: &FuncExpr,
    grid: &SampleGrid,
    breakpoints: &[f64],
    count: usize,
) -> Result<Vec<f64>, EnvelopeError> {
    let samples = grid.sample(g)?;
    select_levels(&samples, breakpoints, count)
}

pub(crate) fn select_levels(
    samples: &[f64],
    breakpoints: &[f64],
    count: usize,
) -> Result<Vec<f64>, EnvelopeError> {
    if count < 2 {
        return Err(EnvelopeError::QuantileCount(count));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len() - 1;
    let mut levels: Vec<f64> = (0..count)
        .map(|k| {
            let pos = (k as f64 * last as f64 / (count - 1) as f64).round() as usize;
            sorted[pos.min(last)]
        })
        .chain(breakpoints.iter().copied().filter(|b| b.is_finite()))
        // -0.0 and 0.0 collapse onto 0.0
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(levels)
}
