mod common;

use common::*;
use nmrdpp::domain::State;
use nmrdpp::logic::{
    entails, evaluate_pltl, fltl_prefix_verdict, parse_fltl, parse_pltl, progress, regress, subformula_closure,
    Fltl, LiteralSet, Pltl, Verdict,
};
use proptest::prelude::*;

fn check_regression(formulas: &[Pltl], max_len: usize) -> usize {
    let d = three_props();
    let mut checked = 0;
    for_each_trace(3, max_len, |trace: &[State]| {
        if trace.len() < 2 {
            return;
        }
        let v = views(&d, trace);
        let (last, prefix) = v.split_last().unwrap();
        for phi in formulas {
            let direct = evaluate_pltl(phi, &v).unwrap();
            let via = evaluate_pltl(&regress(phi, last).unwrap(), prefix).unwrap();
            assert_eq!(direct, via, "{phi} on {trace:?}");
            checked += 1;
        }
    });
    checked
}

#[test]
fn regression_depth_one_all_traces_to_five() {
    assert!(check_regression(&all_pltl(1), 5) > 1_000_000);
}

#[test]
fn regression_depth_two_all_traces_to_three() {
    let pool = all_pltl(2);
    assert!(pool.len() > 20_000);
    check_regression(&pool, 3);
}

#[test]
fn regression_random_depth_three_all_traces_to_five() {
    let mut r = rng(7);
    let pool: Vec<Pltl> = (0..150).map(|_| random_pltl(&mut r, 3)).collect();
    check_regression(&pool, 5);
}

#[test]
fn progression_matches_prefix_semantics() {
    let d = three_props();
    let mut r = rng(11);
    let pool: Vec<Fltl> = (0..100).map(|_| random_fltl(&mut r, 3, false)).collect();
    for_each_trace(3, 5, |trace| {
        let v = views(&d, trace);
        for phi in &pool {
            let mut cur = phi.clone();
            for s in &v {
                let (next, rewarded) = progress(&cur, s).unwrap();
                assert!(!rewarded, "{phi} rewarded without `$`");
                cur = next;
            }
            let verdict = fltl_prefix_verdict(phi, &v).unwrap();
            assert_eq!(cur == Fltl::False, verdict == Verdict::Refuted, "{phi} on {trace:?}: {cur}");
        }
    });
}

#[test]
fn entailment_matches_trace_semantics() {
    let d = three_props();
    let mut r = rng(3);
    let mut pool = all_pltl(1);
    pool.extend((0..60).map(|_| random_pltl(&mut r, 3)));
    // labels range over simplified formulae, as in the translations
    let pool: Vec<Pltl> = pool.iter().map(Pltl::simplify).collect();
    for_each_trace(3, 4, |trace| {
        let v = views(&d, trace);
        for phi in &pool {
            let closure = subformula_closure([phi]);
            let psi = LiteralSet::from_trace(closure.members(), &v).unwrap();
            assert_eq!(entails(&psi, phi).unwrap(), evaluate_pltl(phi, &v).unwrap());
            // the label of a prefix decides every regression through a next state
            for s in 0..8 {
                let next = d.view(State(s));
                let mut longer = v.clone();
                longer.push(next);
                for m in closure.members() {
                    let reg = regress(m, &next).unwrap();
                    assert_eq!(
                        entails(&psi, &reg).unwrap(),
                        evaluate_pltl(m, &longer).unwrap(),
                        "{m} after {trace:?} then {s}"
                    );
                }
            }
        }
    });
}

#[test]
fn simplify_preserves_semantics() {
    let d = three_props();
    let mut r = rng(5);
    let pool: Vec<Pltl> = (0..300).map(|_| random_pltl(&mut r, 3)).collect();
    for_each_trace(3, 3, |trace| {
        let v = views(&d, trace);
        for phi in &pool {
            assert_eq!(
                evaluate_pltl(phi, &v).unwrap(),
                evaluate_pltl(&phi.simplify(), &v).unwrap(),
                "{phi}"
            );
        }
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pltl_print_parse_round_trip(seed in any::<u64>()) {
        let phi = random_pltl(&mut rng(seed), 4);
        prop_assert_eq!(parse_pltl(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn fltl_print_parse_round_trip(seed in any::<u64>(), dollar in any::<bool>()) {
        let phi = random_fltl(&mut rng(seed), 4, dollar);
        prop_assert_eq!(parse_fltl(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn simplify_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_pltl(&mut r, 4).simplify();
        prop_assert_eq!(p.simplify(), p);
        let f = random_fltl(&mut r, 4, true).simplify();
        prop_assert_eq!(f.simplify(), f);
    }
}
