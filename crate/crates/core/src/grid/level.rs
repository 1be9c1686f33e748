use std::io::{self, Write};

use serde::Serialize;

use super::{GridError, SampleGrid};
use crate::funcspec::FuncExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelKind {
    /// `[g <= s]`
    Sublevel,
    /// `[s <= g]`
    Superlevel,
}

impl LevelKind {
    pub fn contains(self, value: f64, threshold: f64) -> bool {
        match self {
            LevelKind::Sublevel => value <= threshold,
            LevelKind::Superlevel => threshold <= value,
        }
    }
}

/// The lattice points of a sublevel or superlevel set, in index order,
/// together with the function values at them.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    grid: SampleGrid,
    kind: LevelKind,
    threshold: f64,
    members: Vec<usize>,
    values: Vec<f64>,
}

impl LevelSet {
    /// Builds a level set from function values already sampled on `grid`.
    pub fn from_samples(
        grid: &SampleGrid,
        samples: &[f64],
        kind: LevelKind,
        threshold: f64,
    ) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        let (members, values) = samples
            .iter()
            .enumerate()
            .filter(|(_, &v)| kind.contains(v, threshold))
            .map(|(i, &v)| (i, v))
            .unzip();
        LevelSet {
            grid: grid.clone(),
            kind,
            threshold,
            members,
            values,
        }
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn kind(&self) -> LevelKind {
        self.kind
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Sorted lattice indices.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &LevelSet) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    /// CSV with one row per member: `x1..xd,g_value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.grid.dimension();
        let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},g_value", header.join(","))?;
        let mut buf = vec![0.0; d];
        for (&i, &v) in self.members.iter().zip(&self.values) {
            self.grid.point_into(i, &mut buf);
            for x in &buf {
                write!(w, "{x},")?;
            }
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// `[g <= s]` on the lattice. An empty result is not an error.
pub fn sublevel(g: &FuncExpr, grid: &SampleGrid, s: f64) -> Result<LevelSet, GridError> {
    let samples = grid.sample(g)?;
    Ok(LevelSet::from_samples(
        grid,
        &samples,
        LevelKind::Sublevel,
        s,
    ))
}

/// `[s <= g]` on the lattice.
pub fn superlevel(g: &FuncExpr, grid: &SampleGrid, s: f64) -> Result<LevelSet, GridError> {
    let samples = grid.sample(g)?;
    Ok(LevelSet::from_samples(
        grid,
        &samples,
        LevelKind::Superlevel,
        s,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::builtin;
    use proptest::prelude::*;

    fn line() -> SampleGrid {
        SampleGrid::line(-5.0, 5.0, 1001, true).unwrap()
    }

    #[test]
    fn identity_sublevel_at_two() {
        let grid = line();
        let set = sublevel(&builtin("identity_1d").unwrap(), &grid, 2.0).unwrap();
        assert_eq!(set.len(), 701);
        assert_eq!(grid.point(*set.members().last().unwrap()), vec![2.0]);
    }

    #[test]
    fn norm_sublevel_below_zero_is_empty() {
        let set = sublevel(&builtin("euclid_norm(1)").unwrap(), &line(), -1.0).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn identity_superlevel_at_zero() {
        let grid = line();
        let set = superlevel(&builtin("identity_1d").unwrap(), &grid, 0.0).unwrap();
        assert_eq!(set.len(), 501);
        assert_eq!(grid.point(set.members()[0]), vec![0.0]);
    }

    #[test]
    fn norm_superlevel_at_zero_is_everything() {
        let set = superlevel(&builtin("euclid_norm(1)").unwrap(), &line(), 0.0).unwrap();
        assert_eq!(set.len(), 1001);
    }

    // Oracle: scan the lattice for the minimum of x^4 - x^2; it is attained
    // at the two points nearest +-1/sqrt(2), which are negatives of each other.
    #[test]
    fn double_well_bottom_level() {
        let grid = line();
        let f = builtin("double_well").unwrap();
        let samples = grid.sample(&f).unwrap();
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let set = sublevel(&f, &grid, min).unwrap();
        let pts: Vec<f64> = set.members().iter().map(|&i| grid.point(i)[0]).collect();
        assert_eq!(pts, vec![-0.71, 0.71]);
        // -0.25 itself sits below the lattice minimum.
        assert!(min > -0.25);
        assert!(sublevel(&f, &grid, -0.25).unwrap().is_empty());
    }

    // Oracle: x^4 - x^2 = 12 at |x| = 2.
    #[test]
    fn double_well_superlevel_twelve() {
        let grid = line();
        let set = superlevel(&builtin("double_well").unwrap(), &grid, 12.0).unwrap();
        let pts: Vec<f64> = set.members().iter().map(|&i| grid.point(i)[0]).collect();
        assert_eq!(set.len(), 2 * 301);
        assert!(pts.iter().all(|x| x.abs() >= 2.0));
        assert!(pts.contains(&2.0) && pts.contains(&-2.0));
    }

    #[test]
    fn csv_export() {
        let grid = SampleGrid::line(-1.0, 1.0, 5, true).unwrap();
        let set = sublevel(&builtin("identity_1d").unwrap(), &grid, 0.0).unwrap();
        let mut out = Vec::new();
        set.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "x1,g_value\n-1,-1\n-0.5,-0.5\n0,0\n"
        );
    }

    proptest! {
        #[test]
        fn nesting(s in -30.0f64..30.0, t in -30.0f64..30.0) {
            let (s, t) = (s.min(t), s.max(t));
            let grid = SampleGrid::new(&[(-2.0, 2.0), (-2.0, 2.0)], &[21, 21], true).unwrap();
            let g = FuncExpr::parse("x1^3 - 2*x2 + piecewise { x1 < x2 : 1 ; else : -1 }", 2).unwrap();
            let samples = grid.sample(&g).unwrap();
            let sub = |v| LevelSet::from_samples(&grid, &samples, LevelKind::Sublevel, v);
            let sup = |v| LevelSet::from_samples(&grid, &samples, LevelKind::Superlevel, v);
            prop_assert!(sub(s).is_subset_of(&sub(t)));
            prop_assert!(sup(t).is_subset_of(&sup(s)));
        }

        #[test]
        fn sublevel_of_g_is_superlevel_of_minus_g(s in -30.0f64..30.0) {
            let grid = SampleGrid::new(&[(-2.0, 2.0), (-2.0, 2.0)], &[21, 21], true).unwrap();
            let g = FuncExpr::parse("x1^2 - x1*x2 + piecewise { x1 <= 0 : 3 ; else : 0 }", 2).unwrap();
            let a = sublevel(&g, &grid, s).unwrap();
            let b = superlevel(&g.negated(), &grid, -s).unwrap();
            prop_assert_eq!(a.members(), b.members());
        }
    }
}
