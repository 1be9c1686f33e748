//! Hausdorff gaps between lattice sets and discrete analogues of
//! Painlevé–Kuratowski limits and hemicontinuity.

use serde::Serialize;

use super::{GridError, LevelKind, LevelSet, SampleGrid};
use crate::funcspec::FuncExpr;

/// A distance between lattice sets. Distances to the empty set are not
/// numbers and are reported as [`Gap::Empty`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gap {
    Distance(f64),
    Empty,
}

impl Gap {
    pub fn distance(&self) -> Option<f64> {
        match *self {
            Gap::Distance(d) => Some(d),
            Gap::Empty => None,
        }
    }
}

/// Membership bitmap plus a ring search for nearest members.
struct Lookup<'a> {
    grid: &'a SampleGrid,
    mask: Vec<bool>,
}

impl<'a> Lookup<'a> {
    fn new(grid: &'a SampleGrid, members: &[usize]) -> Self {
        let mut mask = vec![false; grid.len()];
        for &i in members {
            mask[i] = true;
        }
        Lookup { grid, mask }
    }

    /// Distance from lattice point `from` to the nearest member, stopping
    /// early once it is known to be at most `enough`.
    fn nearest(&self, from: &[f64], center: &[usize], enough: f64) -> f64 {
        let axes = self.grid.axes();
        let min_step = self.grid.min_step();
        let max_ring = axes.iter().map(|a| a.points).max().unwrap();
        let mut best = f64::INFINITY;
        let mut buf = vec![0.0; axes.len()];
        for ring in 0..max_ring {
            // Points in later rings are at least (ring + 1) * min_step away.
            for_each_on_ring(center, ring, self.grid, |idx| {
                if self.mask[idx] {
                    self.grid.point_into(idx, &mut buf);
                    let d = from
                        .iter()
                        .zip(&buf)
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        .sqrt();
                    if d < best {
                        best = d;
                    }
                }
            });
            if best <= enough || best <= (ring + 1) as f64 * min_step {
                break;
            }
        }
        best
    }
}

/// Visits every lattice index whose Chebyshev index distance to `center`
/// is exactly `ring`.
fn for_each_on_ring(
    center: &[usize],
    ring: usize,
    grid: &SampleGrid,
    mut visit: impl FnMut(usize),
) {
    let axes = grid.axes();
    let lo: Vec<usize> = center.iter().map(|&c| c.saturating_sub(ring)).collect();
    let hi: Vec<usize> = center
        .iter()
        .zip(axes)
        .map(|(&c, a)| (c + ring).min(a.points - 1))
        .collect();
    let mut cur = lo.clone();
    loop {
        let on_ring = cur.iter().zip(center).any(|(&i, &c)| i.abs_diff(c) == ring);
        if on_ring {
            visit(grid.flat_index(&cur));
        }
        // odometer increment
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
    }
}

/// One-sided gap `sup_{x in from} dist(x, to)`.
pub fn directed_gap(grid: &SampleGrid, from: &[usize], to: &[usize]) -> Gap {
    if from.is_empty() || to.is_empty() {
        return Gap::Empty;
    }
    let lookup = Lookup::new(grid, to);
    let mut worst: f64 = 0.0;
    for &i in from {
        let p = grid.point(i);
        let d = lookup.nearest(&p, &grid.multi_index(i), worst);
        worst = worst.max(d);
    }
    Gap::Distance(worst)
}

/// Symmetric Hausdorff distance between two lattice index sets.
pub fn hausdorff_gap(grid: &SampleGrid, a: &[usize], b: &[usize]) -> Gap {
    match (directed_gap(grid, a, b), directed_gap(grid, b, a)) {
        (Gap::Distance(x), Gap::Distance(y)) => Gap::Distance(x.max(y)),
        _ => Gap::Empty,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PKLimitResult {
    pub liminf_members: Vec<usize>,
    pub limsup_members: Vec<usize>,
    pub hausdorff_gap_to_target: Gap,
}

/// Discrete set limits of a finite sequence of level sets.
///
/// The tail is the second half of the sequence (at least two sets when
/// available). A point is in the lower limit when it is within one lattice
/// step of every tail set and belongs to the last one; it is in the upper
/// limit when it belongs to some tail set. The gap is the Hausdorff
/// distance from the upper limit to `target`.
pub fn pk_limits(sets: &[LevelSet], target: &LevelSet) -> Result<PKLimitResult, GridError> {
    let last = sets.last().ok_or(GridError::EmptySequence)?;
    let grid = last.grid();
    if sets.iter().any(|s| s.grid() != grid) || target.grid() != grid {
        return Err(GridError::MismatchedGrids);
    }
    let tail = &sets[(sets.len() - 1) / 2..];

    let mut near_all = vec![true; grid.len()];
    let mut in_some = vec![false; grid.len()];
    for set in tail {
        let dilated = dilate(grid, set.members());
        for (flag, &d) in near_all.iter_mut().zip(&dilated) {
            *flag &= d;
        }
        for &i in set.members() {
            in_some[i] = true;
        }
    }
    let liminf_members: Vec<usize> = last
        .members()
        .iter()
        .copied()
        .filter(|&i| near_all[i])
        .collect();
    let limsup_members: Vec<usize> = (0..grid.len()).filter(|&i| in_some[i]).collect();
    let hausdorff_gap_to_target = hausdorff_gap(grid, &limsup_members, target.members());
    Ok(PKLimitResult {
        liminf_members,
        limsup_members,
        hausdorff_gap_to_target,
    })
}

/// Members plus their single-axis lattice neighbours, as a mask.
pub(crate) fn dilate(grid: &SampleGrid, members: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; grid.len()];
    for &i in members {
        mask[i] = true;
        for j in grid.neighbors(i) {
            mask[j] = true;
        }
    }
    mask
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HemiRow {
    pub delta: f64,
    /// `gap(M(s), M(s - delta))`
    pub lower_gap: Gap,
    /// `gap(M(s + delta), M(s))`
    pub upper_gap: Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HemiProbe {
    pub s: f64,
    pub rows: Vec<HemiRow>,
    /// `None` when every lower gap involved an empty set.
    pub lower_hemicontinuous_like: Option<bool>,
    pub upper_hemicontinuous_like: Option<bool>,
}

/// Probes the map `M(s) = [g <= s]` on the lattice for hemicontinuity-like
/// behaviour at `s`, using one-sided gaps at shrinking offsets.
///
/// A verdict is positive when the non-empty gaps shrink as `delta` does
/// (up to one lattice step) and the last one is within `delta + step`.
pub fn hemicontinuity_probe(
    g: &FuncExpr,
    grid: &SampleGrid,
    s: f64,
    deltas: &[f64],
) -> Result<HemiProbe, GridError> {
    if deltas.is_empty()
        || deltas.iter().any(|&d| !(d > 0.0 && d.is_finite()))
        || deltas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(GridError::InvalidDeltas);
    }
    let samples = grid.sample(g)?;
    let level = |t: f64| LevelSet::from_samples(grid, &samples, LevelKind::Sublevel, t);
    let at = level(s);
    let rows: Vec<HemiRow> = deltas
        .iter()
        .map(|&delta| HemiRow {
            delta,
            lower_gap: directed_gap(grid, at.members(), level(s - delta).members()),
            upper_gap: directed_gap(grid, level(s + delta).members(), at.members()),
        })
        .collect();
    let step = grid.max_step();
    let verdict = |pick: fn(&HemiRow) -> Gap| {
        let gaps: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| pick(r).distance().map(|d| (r.delta, d)))
            .collect();
        let &(last_delta, last_gap) = gaps.last()?;
        let shrinking = gaps.windows(2).all(|w| w[1].1 <= w[0].1 + step);
        Some(shrinking && last_gap <= last_delta + step)
    };
    Ok(HemiProbe {
        s,
        lower_hemicontinuous_like: verdict(|r| r.lower_gap),
        upper_hemicontinuous_like: verdict(|r| r.upper_gap),
        rows,
    })
}
