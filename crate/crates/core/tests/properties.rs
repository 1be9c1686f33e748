use komparo::certify::{
    check_infdef_sufficient, check_level_bounded, check_supdef, Problem, Verdict, Witness,
};
use komparo::oracle::{brute_inf, brute_sup, suite_instances};
use komparo::{builtin, Envelope, EnvelopeKind, FuncExpr, SampleGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tables_match_brute_force(seed in any::<u64>()) {
        let inst = suite_instances(seed, 1).pop().unwrap();
        let env = Envelope::new(&inst.f, &inst.g, &inst.grid).unwrap();
        let sup = env.table(&inst.s_values, EnvelopeKind::SupEnv).unwrap();
        let inf = env.table(&inst.s_values, EnvelopeKind::InfEnv).unwrap();
        for (k, &s) in inst.s_values.iter().enumerate() {
            prop_assert!(sup.values[k].bit_eq(&brute_sup(&inst.f, &inst.g, &inst.grid, s).unwrap()));
            prop_assert!(inf.values[k].bit_eq(&brute_inf(&inst.f, &inst.g, &inst.grid, s).unwrap()));
        }
    }

    #[test]
    fn table_witnesses_attain_values(seed in any::<u64>()) {
        let inst = suite_instances(seed, 1).pop().unwrap();
        let env = Envelope::new(&inst.f, &inst.g, &inst.grid).unwrap();
        for kind in [EnvelopeKind::SupEnv, EnvelopeKind::InfEnv] {
            let t = env.table(&inst.s_values, kind).unwrap();
            for (k, &s) in inst.s_values.iter().enumerate() {
                if let Some(x) = t.witness_point(k) {
                    let (fx, gx) = (inst.f.eval(&x).unwrap(), inst.g.eval(&x).unwrap());
                    prop_assert_eq!(t.values[k].as_finite(), Some(fx));
                    let feasible = if kind.is_upper() { gx <= s } else { s <= gx };
                    prop_assert!(feasible);
                }
            }
        }
    }
}

fn line() -> SampleGrid {
    SampleGrid::line(-5.0, 5.0, 1001, true).unwrap()
}

// A failure witness, evaluated on its own, shows the violated inequality.
#[test]
fn failure_witnesses_reproduce() {
    let f = builtin("exmupper_f").unwrap();
    let g = builtin("identity_1d").unwrap();
    let p = Problem::new(&f, &g, &line()).unwrap();

    let r = check_supdef(&p, &[0.5, 1.0, 2.0], 1e-9);
    let Witness::Point(x) = r.witness else {
        panic!("{r:?}")
    };
    assert!(g.eval(&x).unwrap() <= 0.0 && f.eval(&x).unwrap() > 0.0);

    let r = check_infdef_sufficient(&p, &[0.5], 1e-9).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    let Witness::Point(x) = r.witness else {
        panic!("{r:?}")
    };
    assert!(f.eval(&x).unwrap().abs() > 1e-9);

    let grid = line();
    let samples = grid.sample(&g).unwrap();
    let r = check_level_bounded(&grid, &samples, &[1.0, 2.0, 3.0], &[]).unwrap();
    let Witness::Point(x) = r.witness else {
        panic!("{r:?}")
    };
    // The last annulus holds a smaller value than the one before.
    assert!(g.eval(&x).unwrap() < -2.0);
}

#[test]
fn hahn_tables_reject_negative_levels() {
    let f = FuncExpr::from_spec("double_well", 1).unwrap();
    let env = Envelope::hahn(&f, &line()).unwrap();
    assert!(env.table(&[-1.0, 0.0], EnvelopeKind::HahnUpper).is_err());
    let plain = Envelope::new(&f, &f, &line()).unwrap();
    assert!(plain.table(&[0.0], EnvelopeKind::HahnUpper).is_err());
}
