use ergopt::io::FunctionFile;
use ergopt::lockin::{build_perturbation, lockin_report, lockin_trial, PerturbationPlan, PlanOptions, Sampling};
use ergopt::maxplus::{max_mean_of, maximizing_support, normal_form, oracle_max};
use ergopt::rational::{int, pow2_neg, q, Q};
use ergopt::shift::{Alphabet, PeriodicOrbit, Word};
use ergopt::space::{ergodic_average, ASequence, CylinderFunction};
use ergopt::verify::{run_named, SuiteConfig, SUITES};
use proptest::prelude::*;

const WORKED: &str = r#"{"alphabet": 2, "depth": 2, "table": ["0/1", "0/1", "2/1", "0/1"],
                         "a_sequence": {"kind": "triangular_dyadic"}}"#;

fn orbit(w: &[u8]) -> PeriodicOrbit {
    PeriodicOrbit::from_word(Alphabet::new(2).unwrap(), &Word(w.to_vec())).unwrap()
}

fn small_plan() -> PerturbationPlan {
    let doc = FunctionFile::parse(WORKED).unwrap();
    let opts = PlanOptions { k: Some(2), ..Default::default() };
    build_perturbation(&doc.function().unwrap(), &doc.a_sequence, &q(1, 2), &opts).unwrap()
}

#[test]
fn worked_example_from_file_to_lockin() {
    let doc = FunctionFile::parse(WORKED).unwrap();
    let f = doc.function().unwrap();
    let a = &doc.a_sequence;
    assert_eq!(f.a_norm(a), int(6));

    let mm = max_mean_of(&f).unwrap();
    assert_eq!(mm.beta, int(1));
    assert!(mm.unique);
    assert_eq!(mm.critical_cycles, vec![orbit(&[0, 1])]);
    assert_eq!(oracle_max(&f, 5).unwrap().beta, mm.beta);

    let nf = normal_form(&f, a).unwrap();
    assert_eq!(nf.f_hat.table(), &[int(-1), int(0), int(0), int(-1)]);
    assert!(nf.certificate.all_passed());
    assert_eq!(maximizing_support(&nf).unwrap().orbits, vec![orbit(&[0, 1])]);

    let plan = small_plan();
    let rep = lockin_report(&plan, 4, 1, Sampling::Multiscale).unwrap();
    assert!(rep.all_locked);
    assert!(rep.results.iter().all(|r| r.orbits == vec![orbit(&[0, 1])]));
}

#[test]
fn plan_survives_json() {
    let plan = small_plan();
    let text = serde_json::to_string(&plan).unwrap();
    let back: PerturbationPlan = serde_json::from_str(&text).unwrap();
    assert_eq!(back, plan);
    back.check().unwrap();
}

#[test]
fn small_bump_locks_and_large_one_is_rejected() {
    let plan = small_plan();
    let a2 = Alphabet::new(2).unwrap();
    let h = CylinderFunction::new(a2, 1, vec![pow2_neg(9), int(0)]).unwrap();
    assert!(lockin_trial(&plan, &h).unwrap().locked);
    let big = CylinderFunction::new(a2, 1, vec![int(4), int(0)]).unwrap();
    assert!(lockin_trial(&plan, &big).is_err(), "outside the ball is rejected");
}

#[test]
fn every_suite_runs_short() {
    for name in SUITES {
        let rep = run_named(name, &SuiteConfig { seed: 1, instances: 15, ..Default::default() }).unwrap();
        assert!(rep.passed(), "{}", rep.summary());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The normal form is nonpositive and shifts every orbit average by β.
    #[test]
    fn normal_form_shifts_orbit_averages(
        table in proptest::collection::vec(-20i64..20, 8),
        word in proptest::collection::vec(0u8..2, 1..6),
    ) {
        let a2 = Alphabet::new(2).unwrap();
        let f = CylinderFunction::new(a2, 3, table.into_iter().map(|n| q(n, 4)).collect()).unwrap();
        let nf = normal_form(&f, &ASequence::Dyadic).unwrap();
        prop_assert!(nf.f_hat.max_value() <= Q::from_integer(0.into()));
        let w = Word(word);
        let root = Word(w.0[..w.primitive_root_len()].to_vec());
        let o = PeriodicOrbit::from_word(a2, &root).unwrap();
        prop_assert_eq!(
            ergodic_average(&nf.f_hat, &o).unwrap(),
            ergodic_average(&f, &o).unwrap() - &nf.beta
        );
    }
}
