use serde::Serialize;

use super::probe::vanishing_infimum;
use super::{CertifyError, CheckResult, Problem, Reason, Witness};
use crate::envelope::{EnvelopeKind, EnvelopeTable};
use crate::extreal::ExtReal;
use crate::grid::{LevelKind, LevelSet, SampleGrid};

/// Fails at the first pair of levels whose values decrease.
pub fn check_monotone(table: &EnvelopeTable) -> CheckResult {
    let id = format!("monotone.{}", table.kind.name());
    if table.is_empty() {
        return CheckResult::inconclusive(id, Reason::Precondition, "empty table");
    }
    for (k, w) in table.values.windows(2).enumerate() {
        if w[1] < w[0] {
            let (s0, s1) = (table.s_values[k], table.s_values[k + 1]);
            return CheckResult::fails(
                id,
                Witness::Levels(vec![s0, s1]),
                format!(
                    "value {} at s = {s0} exceeds value {} at s = {s1}",
                    w[0], w[1]
                ),
            );
        }
    }
    CheckResult::holds(id, format!("{} values nondecreasing", table.len()))
}

fn probe_levels_ok(id: &str, problem: &Problem, s_probe: &[f64]) -> Option<CheckResult> {
    if !problem.grid().origin_included() {
        return Some(CheckResult::inconclusive(
            id,
            Reason::Precondition,
            "origin is not a lattice point",
        ));
    }
    if s_probe.is_empty() || s_probe.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Some(CheckResult::inconclusive(
            id,
            Reason::Precondition,
            "probe levels must be a nonempty list of positive reals",
        ));
    }
    None
}

fn first_point(problem: &Problem, idx: usize) -> Witness {
    Witness::Point(problem.point(idx))
}

fn level(problem: &Problem, kind: LevelKind, s: f64) -> LevelSet {
    LevelSet::from_samples(problem.grid(), problem.env.g_samples(), kind, s)
}

/// Positive definiteness of the sup-envelope on the nonnegative reals,
/// through three lattice conditions:
///
/// 1. `[f > 0]` meets `[g <= s]` for every probe level `s`;
/// 2. `[g <= 0]` is nonempty and inside `[f <= 0]`;
/// 3. `|f|` gets within `tau` of zero on `[g <= 0]`.
pub fn check_supdef(problem: &Problem, s_probe: &[f64], tau: f64) -> CheckResult {
    if let Some(r) = probe_levels_ok("supdef", problem, s_probe) {
        return r;
    }
    let f = problem.env.f_samples();

    let mut c1 = CheckResult::holds("supdef.1", "[f > 0] meets [g <= s] at every probe level");
    for &s in s_probe {
        let set = level(problem, LevelKind::Sublevel, s);
        if !set.members().iter().any(|&i| f[i] > tau) {
            c1 = CheckResult::fails(
                "supdef.1",
                Witness::S(s),
                format!("f <= {tau} on all of [g <= {s}]"),
            )
            .with_value(problem.env.sup(s).value);
            break;
        }
    }

    let zero = level(problem, LevelKind::Sublevel, 0.0);
    let c2 = if zero.is_empty() {
        CheckResult::fails("supdef.2", Witness::S(0.0), "[g <= 0] is empty")
    } else if let Some(&bad) = zero.members().iter().find(|&&i| f[i] > tau) {
        let nonpos = f.iter().any(|&v| v <= tau);
        let note = if nonpos { "" } else { "; [f <= 0] is empty" };
        CheckResult::fails(
            "supdef.2",
            first_point(problem, bad),
            format!("f = {} > 0 on [g <= 0]{note}", f[bad]),
        )
        .with_value(ExtReal::Finite(f[bad]))
    } else {
        CheckResult::holds(
            "supdef.2",
            format!("[g <= 0] has {} points, all in [f <= 0]", zero.len()),
        )
    };

    let c3 = vanishing_part("supdef.3", problem, LevelKind::Sublevel, &zero, tau);
    CheckResult::aggregate("supdef", vec![c1, c2, c3])
}

fn vanishing_part(
    id: &str,
    problem: &Problem,
    kind: LevelKind,
    zero: &LevelSet,
    tau: f64,
) -> CheckResult {
    match vanishing_infimum(
        &problem.f,
        &problem.g,
        problem.grid(),
        kind,
        0.0,
        zero.members(),
        problem.env.f_samples(),
    ) {
        None => CheckResult::fails(id, Witness::S(0.0), "level set at 0 is empty"),
        Some((v, at)) if v <= tau => {
            CheckResult::holds(id, format!("|f| = {v} at {at:?}")).with_value(ExtReal::Finite(v))
        }
        Some((v, at)) => CheckResult::fails(
            id,
            Witness::Point(at),
            format!("|f| stays above {v} on the level set"),
        )
        .with_value(ExtReal::Finite(v)),
    }
}

/// Shortcut for a positive definite `f`: the sup-envelope is positive
/// definite iff `[g <= 0]` is exactly the origin and no `[g <= s]` reduces
/// to it. Positive definiteness of `f` is itself verified on the lattice.
pub fn check_supdef_pd_shortcut(
    problem: &Problem,
    s_probe: &[f64],
    tau: f64,
) -> Result<CheckResult, CertifyError> {
    if let Some(r) = probe_levels_ok("supdef-pd", problem, s_probe) {
        return Ok(r);
    }
    let grid = problem.grid();
    let origin = grid.origin_index().expect("origin checked above");
    let f = problem.env.f_samples();
    if f[origin].abs() > tau {
        return Err(CertifyError::PdAssertionViolated {
            point: grid.point(origin),
        });
    }
    if let Some(bad) = (0..grid.len()).find(|&i| i != origin && f[i] <= tau) {
        return Err(CertifyError::PdAssertionViolated {
            point: grid.point(bad),
        });
    }
    for &s in s_probe {
        let set = level(problem, LevelKind::Sublevel, s);
        if !set.members().iter().any(|&i| i != origin) {
            return Ok(CheckResult::fails(
                "supdef-pd",
                Witness::S(s),
                format!("[g <= {s}] has no nonzero lattice point"),
            ));
        }
    }
    let zero = level(problem, LevelKind::Sublevel, 0.0);
    if let Some(&bad) = zero.members().iter().find(|&&i| i != origin) {
        return Ok(CheckResult::fails(
            "supdef-pd",
            first_point(problem, bad),
            "[g <= 0] contains a nonzero point",
        ));
    }
    if zero.is_empty() {
        return Ok(CheckResult::fails(
            "supdef-pd",
            Witness::S(0.0),
            "[g <= 0] is empty",
        ));
    }
    Ok(CheckResult::holds(
        "supdef-pd",
        "[g <= 0] is the origin and every probed [g <= s] is larger",
    ))
}

/// Positive definiteness of the inf-envelope on the nonnegative reals:
///
/// 1. `b_s = min { f : s <= g } > tau` for every probe level (reported per level);
/// 2. `[0 <= g]` is nonempty and `f >= -tau` on it;
/// 3. `|f|` gets within `tau` of zero on `[0 <= g]`.
pub fn check_infdef(problem: &Problem, s_probe: &[f64], tau: f64) -> CheckResult {
    if let Some(r) = probe_levels_ok("infdef", problem, s_probe) {
        return r;
    }
    let f = problem.env.f_samples();
    let mut parts = Vec::new();
    for &s in s_probe {
        let id = format!("infdef.1@{s}");
        let opt = problem.env.inf(s);
        let part = match opt.witness {
            Some(w) if opt.value > ExtReal::Finite(tau) => {
                CheckResult::holds(id, format!("b_s = {} at {:?}", opt.value, problem.point(w)))
                    .with_witness(first_point(problem, w))
            }
            Some(w) => CheckResult::fails(
                id,
                first_point(problem, w),
                format!("min of f over [{s} <= g] is {}", opt.value),
            ),
            // An empty superlevel gives b_s = +inf, which bounds nothing away
            // from zero on the lattice but is vacuously positive.
            None => CheckResult::holds(id, format!("[{s} <= g] is empty, b_s = +inf")),
        };
        parts.push(part.with_value(opt.value));
    }

    let zero = level(problem, LevelKind::Superlevel, 0.0);
    let c2 = if zero.is_empty() {
        CheckResult::fails("infdef.2", Witness::S(0.0), "[0 <= g] is empty")
    } else if let Some(&bad) = zero.members().iter().find(|&&i| f[i] < -tau) {
        CheckResult::fails(
            "infdef.2",
            first_point(problem, bad),
            format!("f = {} < 0 on [0 <= g]", f[bad]),
        )
        .with_value(ExtReal::Finite(f[bad]))
    } else {
        CheckResult::holds(
            "infdef.2",
            format!("f >= 0 on the {} points of [0 <= g]", zero.len()),
        )
    };
    parts.push(c2);
    parts.push(vanishing_part(
        "infdef.3",
        problem,
        LevelKind::Superlevel,
        &zero,
        tau,
    ));
    CheckResult::aggregate("infdef", parts)
}

/// Checkable premises of the sufficient condition for positive definiteness
/// of the inf-envelope: `f >= 0`, `min g <= 0`, the zeros of `f` are zeros of
/// `g`, and for each probe level the sublevel set `[f <= f(y)]` through a
/// minimiser `y` of `f` on `[s <= g]` is a compact set inside the window.
pub fn check_infdef_sufficient(
    problem: &Problem,
    s_probe: &[f64],
    tau: f64,
) -> Result<CheckResult, CertifyError> {
    if !problem.grid().origin_included() {
        return Ok(CheckResult::inconclusive(
            "infdef-sufficient",
            Reason::Precondition,
            "origin is not a lattice point",
        ));
    }
    let grid = problem.grid();
    let f = problem.env.f_samples();
    let g = problem.env.g_samples();
    let argmin = |v: &[f64], key: fn(f64) -> f64| {
        (0..v.len())
            .min_by(|&a, &b| key(v[a]).total_cmp(&key(v[b])).then(a.cmp(&b)))
            .expect("lattice is nonempty")
    };

    let nonneg = match (0..f.len()).find(|&i| f[i] < -tau) {
        Some(bad) => CheckResult::fails(
            "infdef-sufficient.nonnegative",
            first_point(problem, bad),
            format!("f = {}", f[bad]),
        ),
        None => CheckResult::holds("infdef-sufficient.nonnegative", "f >= 0 on the lattice"),
    };

    let gmin = argmin(g, |v| v);
    let min_g = if g[gmin] <= 0.0 {
        CheckResult::holds("infdef-sufficient.min-g", format!("min g = {}", g[gmin]))
    } else {
        CheckResult::fails(
            "infdef-sufficient.min-g",
            first_point(problem, gmin),
            format!("min g = {} > 0", g[gmin]),
        )
    }
    .with_value(ExtReal::Finite(g[gmin]));

    let zeros: Vec<usize> = (0..f.len()).filter(|&i| f[i].abs() <= tau).collect();
    let zero_set = if zeros.is_empty() {
        let best = argmin(f, f64::abs);
        CheckResult::fails(
            "infdef-sufficient.zero-set",
            first_point(problem, best),
            format!("{{f = 0}} is empty; smallest |f| is {}", f[best].abs()),
        )
    } else if let Some(&bad) = zeros.iter().find(|&&i| g[i].abs() > tau) {
        CheckResult::fails(
            "infdef-sufficient.zero-set",
            first_point(problem, bad),
            format!("f = 0 but g = {}", g[bad]),
        )
    } else {
        CheckResult::holds(
            "infdef-sufficient.zero-set",
            format!("{} zeros of f, all zeros of g", zeros.len()),
        )
    };

    let bounded = check_level_bounded(grid, f, &default_ladder(grid), &[])?;
    let compact = if !bounded.verdict.is_positive() {
        CheckResult::inconclusive(
            "infdef-sufficient.compact",
            Reason::BoundedDomainLimit,
            format!("level-boundedness of f not established: {}", bounded.detail),
        )
    } else {
        let mut out = CheckResult::holds(
            "infdef-sufficient.compact",
            "each [f <= f(y)] lies inside the window; f grows on the annulus ladder",
        );
        for &s in s_probe {
            let Some(y) = problem.env.inf(s).witness else {
                continue;
            };
            if let Some(edge) = (0..f.len()).find(|&i| f[i] <= f[y] && on_boundary(grid, i)) {
                out = CheckResult::inconclusive(
                    "infdef-sufficient.compact",
                    Reason::BoundedDomainLimit,
                    format!(
                        "[f <= {}] reaches the window edge at {:?} (s = {s})",
                        f[y],
                        grid.point(edge)
                    ),
                );
                break;
            }
        }
        out
    };
    Ok(CheckResult::aggregate(
        "infdef-sufficient",
        vec![nonneg, min_g, zero_set, compact],
    ))
}

fn on_boundary(grid: &SampleGrid, index: usize) -> bool {
    grid.multi_index(index)
        .iter()
        .zip(grid.axes())
        .any(|(&k, a)| k == 0 || k + 1 == a.points)
}

/// Quarter steps of the radius of the largest ball inside the window.
pub(crate) fn default_ladder(grid: &SampleGrid) -> Vec<f64> {
    let r = grid.inscribed_radius();
    vec![r / 4.0, r / 2.0, 3.0 * r / 4.0, r]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusMin {
    pub inner: f64,
    pub outer: f64,
    pub min: f64,
    pub argmin: Vec<f64>,
}

/// Minimum of the samples over each lattice annulus `r_k <= ||x|| <= r_{k+1}`.
pub fn annulus_minima(
    grid: &SampleGrid,
    samples: &[f64],
    ladder: &[f64],
) -> Result<Vec<AnnulusMin>, CertifyError> {
    if ladder.len() < 2
        || ladder.iter().any(|&r| !(r >= 0.0 && r.is_finite()))
        || ladder.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(CertifyError::Config(
            "radius ladder needs at least two strictly increasing nonnegative rungs".into(),
        ));
    }
    let norms: Vec<f64> = (0..grid.len())
        .map(|i| grid.point(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    ladder
        .windows(2)
        .map(|w| {
            let (inner, outer) = (w[0], w[1]);
            let best = (0..grid.len())
                .filter(|&i| inner <= norms[i] && norms[i] <= outer)
                .min_by(|&a, &b| samples[a].total_cmp(&samples[b]).then(a.cmp(&b)))
                .ok_or(CertifyError::EmptyAnnulus { inner, outer })?;
            if outer > grid.inscribed_radius() * (1.0 + 1e-12) {
                return Err(CertifyError::EmptyAnnulus { inner, outer });
            }
            Ok(AnnulusMin {
                inner,
                outer,
                min: samples[best],
                argmin: grid.point(best),
            })
        })
        .collect()
}

/// Window-qualified level-boundedness from annulus minima. Never returns an
/// unqualified `holds`: growth at infinity cannot be settled on a window.
///
/// An empty `targets` list uses one target, the first minimum plus one.
pub fn check_level_bounded(
    grid: &SampleGrid,
    samples: &[f64],
    ladder: &[f64],
    targets: &[f64],
) -> Result<CheckResult, CertifyError> {
    let id = "level-bounded";
    let minima = annulus_minima(grid, samples, ladder)?;
    let m: Vec<f64> = minima.iter().map(|a| a.min).collect();
    let default_target = [m[0] + 1.0];
    let targets = if targets.is_empty() {
        &default_target[..]
    } else {
        targets
    };
    let listing = m
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let last = minima.last().expect("at least one annulus");
    let reached = targets.iter().all(|&t| m.iter().any(|&v| v >= t));
    let trend = if m.len() >= 2 {
        m[m.len() - 1].partial_cmp(&m[m.len() - 2])
    } else {
        None
    };
    let result = match trend {
        Some(std::cmp::Ordering::Less) => CheckResult::fails(
            id,
            Witness::Point(last.argmin.clone()),
            format!("annulus minima decrease at the edge of the window: {listing}"),
        ),
        _ if reached => CheckResult::holds_on_window(
            id,
            format!("annulus minima {listing} reach every target on this window"),
        ),
        Some(std::cmp::Ordering::Greater) | None => CheckResult::inconclusive(
            id,
            Reason::BoundedDomainLimit,
            format!("annulus minima {listing} still increasing but below a target"),
        ),
        _ => CheckResult::fails(
            id,
            Witness::Point(last.argmin.clone()),
            format!("annulus minima flat at the edge of the window and below a target: {listing}"),
        ),
    };
    Ok(result.with_value(ExtReal::Finite(last.min)))
}

/// Window-qualified divergence of a table to `+inf`: every target must be
/// reached by some tabulated value. An empty `targets` list uses the first
/// finite value plus one.
pub fn check_divergence(table: &EnvelopeTable, targets: &[f64]) -> CheckResult {
    let id = format!("divergence.{}", table.kind.name());
    let finite: Vec<(f64, f64)> = table
        .s_values
        .iter()
        .zip(&table.values)
        .filter_map(|(&s, v)| v.as_finite().map(|v| (s, v)))
        .collect();
    let Some(&(_, first)) = finite.first() else {
        return CheckResult::inconclusive(id, Reason::Precondition, "table has no finite values");
    };
    let default_target = [first + 1.0];
    let targets = if targets.is_empty() {
        &default_target[..]
    } else {
        targets
    };
    let missing: Vec<f64> = targets
        .iter()
        .copied()
        .filter(|&t| !table.values.iter().any(|v| *v >= ExtReal::Finite(t)))
        .collect();
    let max = table
        .values
        .iter()
        .max()
        .copied()
        .unwrap_or(ExtReal::NegInf);
    if missing.is_empty() {
        return CheckResult::holds_on_window(
            id,
            format!("every target reached; largest value {max}"),
        )
        .with_value(max);
    }
    let n = finite.len();
    if n >= 2 && finite[n - 1].1 > finite[n - 2].1 {
        CheckResult::inconclusive(
            id,
            Reason::BoundedDomainLimit,
            format!(
                "targets {missing:?} not reached but values still increasing at the window edge"
            ),
        )
        .with_value(max)
    } else {
        CheckResult::fails(
            id,
            Witness::S(finite[n - 1].0),
            format!(
                "targets {missing:?} not reached and values stopped increasing at {}",
                finite[n - 1].1
            ),
        )
        .with_value(max)
    }
}

/// `inf-env(g(x)) <= f(x) <= sup-env(g(x))` at every lattice point.
pub fn check_sandwich(problem: &Problem) -> Result<CheckResult, CertifyError> {
    let id = "sandwich";
    let f = problem.env.f_samples();
    let g = problem.env.g_samples();
    let mut levels = g.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let upper = problem.env.table(&levels, EnvelopeKind::SupEnv)?;
    let lower = problem.env.table(&levels, EnvelopeKind::InfEnv)?;
    for i in 0..f.len() {
        let k = levels.partition_point(|&v| v < g[i]);
        let fx = ExtReal::Finite(f[i]);
        if !(lower.values[k] <= fx && fx <= upper.values[k]) {
            return Ok(CheckResult::fails(
                id,
                Witness::Point(problem.point(i)),
                format!(
                    "{} <= {} <= {} violated at g = {}",
                    lower.values[k], f[i], upper.values[k], g[i]
                ),
            ));
        }
    }
    Ok(CheckResult::holds(
        id,
        format!("bounds hold at all {} lattice points", f.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::Verdict;
    use crate::funcspec::{builtin, FuncExpr};

    const TAU: f64 = 1e-9;
    const PROBES: [f64; 3] = [0.5, 1.0, 2.0];

    fn line() -> SampleGrid {
        SampleGrid::line(-5.0, 5.0, 1001, true).unwrap()
    }

    fn problem(f: &str, g: &str) -> Problem {
        Problem::new(
            &FuncExpr::from_spec(f, 1).unwrap(),
            &FuncExpr::from_spec(g, 1).unwrap(),
            &line(),
        )
        .unwrap()
    }

    fn hand_table(s: &[f64], v: &[f64]) -> EnvelopeTable {
        EnvelopeTable::from_values(
            EnvelopeKind::SupEnv,
            s.to_vec(),
            v.iter().map(|&x| ExtReal::Finite(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn monotone_examples() {
        let p = problem("exmupper_f", "identity_1d");
        let t = p
            .env
            .table(&[-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0], EnvelopeKind::SupEnv)
            .unwrap();
        assert_eq!(check_monotone(&t).verdict, Verdict::Holds);
        let bad = check_monotone(&hand_table(&[0.0, 1.0], &[1.0, 0.0]));
        assert_eq!(bad.verdict, Verdict::Fails);
        assert_eq!(bad.witness, Witness::Levels(vec![0.0, 1.0]));
        assert_eq!(
            check_monotone(&hand_table(&[0.0], &[3.0])).verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn exmupper_supdef_fails_on_condition_two() {
        let r = check_supdef(&problem("exmupper_f", "identity_1d"), &PROBES, TAU);
        assert_eq!(r.verdict, Verdict::Fails);
        let c2 = r.part("supdef.2").unwrap();
        assert_eq!(c2.verdict, Verdict::Fails);
        assert!(c2.detail.contains("[f <= 0] is empty"));
        assert_eq!(r.part("supdef.1").unwrap().verdict, Verdict::Holds);
        // The witness reproduces: a point with g <= 0 and f > 0.
        let Witness::Point(x) = &r.witness else {
            panic!()
        };
        assert!(x[0] <= 0.0);
        assert_eq!(builtin("exmupper_f").unwrap().eval(x).unwrap(), 1.0);
    }

    // Oracle: for x^2 and |x| the three conditions read off directly;
    // [|x| <= 0] = {0} where x^2 = 0, and x^2 > 0 elsewhere.
    #[test]
    fn squares_supdef_holds() {
        let r = check_supdef(&problem("sum_squares(1)", "euclid_norm(1)"), &PROBES, TAU);
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert_eq!(r.parts.len(), 3);
    }

    #[test]
    fn constant_constraint_breaks_condition_two() {
        let r = check_supdef(&problem("sum_squares(1)", "-1"), &PROBES, TAU);
        assert_eq!(r.part("supdef.2").unwrap().verdict, Verdict::Fails);
        assert_eq!(r.witness, Witness::Point(vec![-5.0]));
    }

    #[test]
    fn pd_shortcut_examples() {
        let grid = SampleGrid::new(&[(-2.0, 2.0), (-2.0, 2.0)], &[41, 41], true).unwrap();
        let p = Problem::new(
            &builtin("sum_squares(2)").unwrap(),
            &builtin("euclid_norm(2)").unwrap(),
            &grid,
        )
        .unwrap();
        assert_eq!(
            check_supdef_pd_shortcut(&p, &PROBES, TAU).unwrap().verdict,
            Verdict::Holds
        );

        let r = check_supdef_pd_shortcut(&problem("sum_squares(1)", "identity_1d"), &PROBES, TAU)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witness, Witness::Point(vec![-5.0]));

        let e = check_supdef_pd_shortcut(&problem("exmupper_f", "identity_1d"), &PROBES, TAU)
            .unwrap_err();
        assert_eq!(e, CertifyError::PdAssertionViolated { point: vec![0.0] });
    }

    #[test]
    fn exmupper_infdef_holds_with_square_bounds() {
        let r = check_infdef(&problem("exmupper_f", "identity_1d"), &PROBES, TAU);
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        for s in PROBES {
            let b = r.part(&format!("infdef.1@{s}")).unwrap().value.unwrap();
            assert!((b.as_finite().unwrap() - s * s).abs() <= 1e-12, "{s}: {b}");
        }
    }

    #[test]
    fn squares_infdef_holds() {
        let r = check_infdef(&problem("sum_squares(1)", "euclid_norm(1)"), &PROBES, TAU);
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        let b = r.part("infdef.1@2").unwrap().value.unwrap();
        assert_eq!(b, ExtReal::Finite(4.0));
    }

    #[test]
    fn zero_function_fails_infdef_one() {
        let r = check_infdef(&problem("0", "identity_1d"), &PROBES, TAU);
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.part("infdef.1@0.5").unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn missing_origin_is_a_precondition() {
        let grid = SampleGrid::line(1.0, 3.0, 11, false).unwrap();
        let p = Problem::new(
            &builtin("identity_1d").unwrap(),
            &builtin("identity_1d").unwrap(),
            &grid,
        )
        .unwrap();
        let r = check_supdef(&p, &PROBES, TAU);
        assert_eq!(
            (r.verdict, r.reason),
            (Verdict::Inconclusive, Some(Reason::Precondition))
        );
        let r = check_infdef(&problem("sum_squares(1)", "euclid_norm(1)"), &[-1.0], TAU);
        assert_eq!(r.reason, Some(Reason::Precondition));
    }

    #[test]
    fn infdef_sufficient_examples() {
        let r = check_infdef_sufficient(&problem("sum_squares(1)", "euclid_norm(1)"), &PROBES, TAU)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");

        let r =
            check_infdef_sufficient(&problem("exmupper_f", "identity_1d"), &PROBES, TAU).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(
            r.part("infdef-sufficient.zero-set").unwrap().verdict,
            Verdict::Fails
        );

        let r =
            check_infdef_sufficient(&problem("sum_squares(1)", "x1^2 - 10"), &PROBES, TAU).unwrap();
        assert_eq!(
            r.part("infdef-sufficient.min-g").unwrap().verdict,
            Verdict::Holds
        );
        assert_eq!(
            r.part("infdef-sufficient.zero-set").unwrap().verdict,
            Verdict::Fails
        );
        assert_eq!(r.witness, Witness::Point(vec![0.0]));
    }

    #[test]
    fn infdef_sufficient_unbounded_sublevels_are_inconclusive() {
        // x^2 / (1 + x^2) is bounded by one, so its growth stalls.
        let r = check_infdef_sufficient(
            &problem("x1^2 / (1 + x1^2)", "euclid_norm(1)"),
            &PROBES,
            TAU,
        )
        .unwrap();
        let c = r.part("infdef-sufficient.compact").unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!(c.reason, Some(Reason::BoundedDomainLimit));
    }

    // Oracle: on a lattice containing the axis points (r, 0), the minimum of
    // x1^2 + x2^2 over r <= ||x|| <= r' is r^2.
    #[test]
    fn level_bounded_squares() {
        let grid = SampleGrid::new(&[(-5.0, 5.0), (-5.0, 5.0)], &[101, 101], true).unwrap();
        let f = grid.sample(&builtin("sum_squares(2)").unwrap()).unwrap();
        let minima = annulus_minima(&grid, &f, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let m: Vec<f64> = minima.iter().map(|a| a.min).collect();
        assert_eq!(m, vec![1.0, 4.0, 9.0]);
        let r = check_level_bounded(&grid, &f, &[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0]).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsOnWindow);
        // One target beyond reach leaves the question open.
        let r = check_level_bounded(&grid, &f, &[1.0, 2.0, 3.0, 4.0], &[50.0]).unwrap();
        assert_eq!(r.reason, Some(Reason::BoundedDomainLimit));
    }

    #[test]
    fn level_bounded_failures() {
        let grid = line();
        let ladder = default_ladder(&grid);
        let id = grid.sample(&builtin("identity_1d").unwrap()).unwrap();
        let r = check_level_bounded(&grid, &id, &ladder, &[]).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witness, Witness::Point(vec![-5.0]));

        let ex = grid.sample(&builtin("exmupper_f").unwrap()).unwrap();
        let r = check_level_bounded(&grid, &ex, &ladder, &[2.0]).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let Witness::Point(x) = &r.witness else {
            panic!()
        };
        assert!(x[0] < 0.0);
    }

    #[test]
    fn ladder_beyond_window_errors() {
        let grid = line();
        let f = grid.sample(&builtin("identity_1d").unwrap()).unwrap();
        assert!(matches!(
            check_level_bounded(&grid, &f, &[1.0, 6.0], &[]),
            Err(CertifyError::EmptyAnnulus { .. })
        ));
        assert!(matches!(
            check_level_bounded(&grid, &f, &[2.0, 1.0], &[]),
            Err(CertifyError::Config(_))
        ));
    }

    #[test]
    fn divergence_examples() {
        let grid = line();
        let env =
            crate::envelope::Envelope::hahn(&builtin("sum_squares(1)").unwrap(), &grid).unwrap();
        let s: Vec<f64> = (0..=10).map(|k| k as f64 / 2.0).collect();
        let t = env.table(&s, EnvelopeKind::HahnUpper).unwrap();
        assert_eq!(
            check_divergence(&t, &[1.0, 4.0, 16.0]).verdict,
            Verdict::HoldsOnWindow
        );

        let p = problem("exmupper_f", "identity_1d");
        let t = p
            .env
            .table(&[-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0], EnvelopeKind::SupEnv)
            .unwrap();
        let r = check_divergence(&t, &[100.0]);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.value, Some(ExtReal::Finite(9.0)));

        let p = problem("min(x1^2, 1)", "euclid_norm(1)");
        let t = p.env.table(&s, EnvelopeKind::SupEnv).unwrap();
        let r = check_divergence(&t, &[2.0]);
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witness, Witness::S(5.0));
    }

    #[test]
    fn sandwich_examples() {
        for (f, g) in [
            ("double_well", "euclid_norm(1)"),
            ("exmupper_f", "identity_1d"),
            ("double_well", "3"),
            ("x1^3 - 2*x1", "piecewise { x1 < 1 : x1 ; else : -x1 }"),
        ] {
            let r = check_sandwich(&problem(f, g)).unwrap();
            assert_eq!(r.verdict, Verdict::Holds, "{f} / {g}");
        }
    }
}
