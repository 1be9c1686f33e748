//! Semicontinuity probes and the local search standing in for vanishing
//! sequences.

use serde::Serialize;

use super::CertifyError;
use crate::envelope::EnvelopeTable;
use crate::extreal::ExtReal;
use crate::funcspec::FuncExpr;
use crate::grid::{LevelKind, SampleGrid};

/// Points per half-axis in the local stencil used to sample a ball.
pub const STENCIL_DIVISIONS: usize = 4;

/// Refinement rounds in [`vanishing_infimum`]; each shrinks the search box
/// by [`STENCIL_DIVISIONS`].
const REFINEMENT_ROUNDS: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiProbe {
    pub value: ExtReal,
    pub radii: Vec<f64>,
    /// `value - min` over each punctured neighbourhood, clamped at zero.
    pub lsc_gaps: Vec<ExtReal>,
    /// `max - value` over each punctured neighbourhood, clamped at zero.
    pub usc_gaps: Vec<ExtReal>,
    /// Estimated limits of the gaps as the radius goes to zero.
    pub lsc_gap: ExtReal,
    pub usc_gap: ExtReal,
    pub lsc_like: bool,
    pub usc_like: bool,
}

fn check_radii(radii: &[f64]) -> Result<(), CertifyError> {
    if radii.is_empty()
        || radii.iter().any(|&r| !(r > 0.0 && r.is_finite()))
        || radii.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(CertifyError::Config(
            "radii must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Limit estimate from the gaps at the two smallest radii, assuming the gap
/// is affine in the radius near zero. Gaps are nondecreasing in the radius,
/// so the estimate is clamped to `[0, last gap]`.
fn limit_estimate(radii: &[f64], gaps: &[ExtReal]) -> ExtReal {
    let n = gaps.len();
    let last = gaps[n - 1];
    if n < 2 {
        return last;
    }
    match (gaps[n - 2].as_finite(), last.as_finite()) {
        (Some(g1), Some(g2)) => {
            let (r1, r2) = (radii[n - 2], radii[n - 1]);
            let g0 = (g2 * r1 - g1 * r2) / (r1 - r2);
            ExtReal::Finite(g0.clamp(0.0, g2))
        }
        _ => last,
    }
}

fn finish(
    value: ExtReal,
    radii: &[f64],
    lows: Vec<ExtReal>,
    highs: Vec<ExtReal>,
    tau: f64,
) -> SemiProbe {
    let lsc_gaps: Vec<ExtReal> = lows.iter().map(|m| value.excess_over(m)).collect();
    let usc_gaps: Vec<ExtReal> = highs.iter().map(|m| m.excess_over(&value)).collect();
    let lsc_gap = limit_estimate(radii, &lsc_gaps);
    let usc_gap = limit_estimate(radii, &usc_gaps);
    SemiProbe {
        value,
        radii: radii.to_vec(),
        lsc_like: lsc_gap <= ExtReal::Finite(tau),
        usc_like: usc_gap <= ExtReal::Finite(tau),
        lsc_gaps,
        usc_gaps,
        lsc_gap,
        usc_gap,
    }
}

/// Offsets of a `(2K+1)^d` stencil scaled to `radius`, inside the closed
/// ball and without the centre.
fn stencil(dimension: usize, radius: f64) -> Vec<Vec<f64>> {
    let k = STENCIL_DIVISIONS as i64;
    let h = radius / STENCIL_DIVISIONS as f64;
    let side = (2 * k + 1) as usize;
    let total = side.pow(dimension as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut offs = Vec::with_capacity(dimension);
        for _ in 0..dimension {
            offs.push(((rest % side) as i64 - k) as f64 * h);
            rest /= side;
        }
        let norm2: f64 = offs.iter().map(|o| o * o).sum();
        if norm2 > 0.0 && norm2 <= radius * radius * (1.0 + 1e-12) {
            out.push(offs);
        }
    }
    out
}

/// Semicontinuity probe of a function at `at`: extreme values over a
/// stencil in each punctured ball of the given (strictly decreasing) radii.
pub fn probe_function(
    f: &FuncExpr,
    at: &[f64],
    radii: &[f64],
    tau: f64,
) -> Result<SemiProbe, CertifyError> {
    check_radii(radii)?;
    let value = ExtReal::Finite(f.eval(at)?);
    let mut lows = Vec::with_capacity(radii.len());
    let mut highs = Vec::with_capacity(radii.len());
    let mut y = vec![0.0; at.len()];
    for &r in radii {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for off in stencil(at.len(), r) {
            for ((yk, a), o) in y.iter_mut().zip(at).zip(&off) {
                *yk = a + o;
            }
            let v = f.eval(&y)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        lows.push(ExtReal::Finite(lo));
        highs.push(ExtReal::Finite(hi));
    }
    Ok(finish(value, radii, lows, highs, tau))
}

/// `|s - at| <= r`, with slack for levels that are lattice coordinates
/// computed in floating point.
pub(crate) fn within(s: f64, at: f64, r: f64) -> bool {
    (s - at).abs() <= r * (1.0 + 1e-9)
}

/// Semicontinuity probe of a tabulated envelope at the level `at` (which
/// must be one of the table's levels); neighbourhoods are taken in `s`.
pub fn probe_table(
    table: &EnvelopeTable,
    at: f64,
    radii: &[f64],
    tau: f64,
) -> Result<SemiProbe, CertifyError> {
    check_radii(radii)?;
    let value = table
        .value_at(at)
        .ok_or_else(|| CertifyError::Precondition(format!("s = {at} is not a table level")))?;
    let mut lows = Vec::with_capacity(radii.len());
    let mut highs = Vec::with_capacity(radii.len());
    for &r in radii {
        let near: Vec<ExtReal> = table
            .s_values
            .iter()
            .zip(&table.values)
            .filter(|(&s, _)| s != at && within(s, at, r))
            .map(|(_, &v)| v)
            .collect();
        if near.is_empty() {
            return Err(CertifyError::NeighborhoodEmpty { radius: r });
        }
        lows.push(*near.iter().min().unwrap());
        highs.push(*near.iter().max().unwrap());
    }
    Ok(finish(value, radii, lows, highs, tau))
}

/// Smallest `|f|` found on the level set `kind(g, s)`, starting from the
/// best lattice member and refining with shrinking stencils around the
/// incumbent. Returns the value and the point attaining it.
///
/// This stands in for a sequence in the level set along which `f -> 0`.
/// Points where `f` or `g` fail to evaluate, or that leave the grid's box,
/// are skipped.
pub fn vanishing_infimum(
    f: &FuncExpr,
    g: &FuncExpr,
    grid: &SampleGrid,
    kind: LevelKind,
    s: f64,
    members: &[usize],
    f_samples: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let start = *members.iter().min_by(|&&a, &&b| {
        f_samples[a]
            .abs()
            .total_cmp(&f_samples[b].abs())
            .then(a.cmp(&b))
    })?;
    let mut best = f_samples[start].abs();
    let mut center = grid.point(start);
    let mut half: Vec<f64> = grid.axes().iter().map(|a| a.step()).collect();
    let k = STENCIL_DIVISIONS as i64;
    let side = (2 * k + 1) as usize;
    let total = side.pow(grid.dimension() as u32);
    let mut y = vec![0.0; center.len()];
    for _ in 0..REFINEMENT_ROUNDS {
        if best == 0.0 {
            break;
        }
        let mut next = center.clone();
        for flat in 0..total {
            let mut rest = flat;
            let mut inside = true;
            for (axis, yk) in y.iter_mut().enumerate() {
                let j = (rest % side) as i64 - k;
                rest /= side;
                *yk = center[axis] + j as f64 * half[axis] / k as f64;
                let a = &grid.axes()[axis];
                inside &= *yk >= a.lo && *yk <= a.hi;
            }
            if !inside {
                continue;
            }
            let feasible = matches!(g.eval(&y), Ok(gv) if kind.contains(gv, s));
            if !feasible {
                continue;
            }
            if let Ok(v) = f.eval(&y) {
                if v.abs() < best {
                    best = v.abs();
                    next.copy_from_slice(&y);
                }
            }
        }
        center = next;
        for h in half.iter_mut() {
            *h /= k as f64;
        }
    }
    Some((best, center))
}
