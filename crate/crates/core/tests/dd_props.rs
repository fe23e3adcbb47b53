use std::collections::HashMap;

use nmrdpp::dd::{Dd, Manager, Op, Unary, VarOrder};
use proptest::prelude::*;

const N: usize = 4;

fn manager() -> Manager {
    Manager::new(VarOrder::new((0..N).map(|i| format!("x{i}")).collect()).unwrap())
}

fn bits(k: usize) -> Vec<bool> {
    (0..N).map(|i| k >> i & 1 == 1).collect()
}

/// Diagram whose value at assignment k is table[k].
fn from_table(m: &mut Manager, table: &[f64]) -> Dd {
    fn rec(m: &mut Manager, table: &[f64], var: usize, k: usize) -> Dd {
        if var == N {
            return m.constant(table[k]);
        }
        let lo = rec(m, table, var + 1, k);
        let hi = rec(m, table, var + 1, k | 1 << var);
        let x = m.var_at(var);
        m.ite(x, hi, lo)
    }
    rec(m, table, 0, 0)
}

fn table_of(m: &Manager, f: Dd) -> Vec<f64> {
    (0..1 << N).map(|k| m.evaluate(f, &bits(k)).unwrap()).collect()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop::sample::select(vec![-2.0, -0.5, 0.0, 0.0, 1.0, 1.0, 2.5]), 1 << N)
}

fn op_eval(op: Op, a: f64, b: f64) -> f64 {
    let t = |x: bool| if x { 1.0 } else { 0.0 };
    match op {
        Op::Plus => a + b,
        Op::Minus => a - b,
        Op::Times => a * b,
        Op::Max => a.max(b),
        Op::Min => a.min(b),
        Op::And => t(a != 0.0 && b != 0.0),
        Op::Or => t(a != 0.0 || b != 0.0),
        Op::Greater => t(a > b),
    }
}

const OPS: [Op; 8] = [Op::Plus, Op::Minus, Op::Times, Op::Max, Op::Min, Op::And, Op::Or, Op::Greater];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn apply_matches_pointwise(a in values(), b in values()) {
        let mut m = manager();
        let f = from_table(&mut m, &a);
        let g = from_table(&mut m, &b);
        for op in OPS {
            let h = m.apply(op, f, g);
            let expected: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| op_eval(op, x, y)).collect();
            prop_assert_eq!(table_of(&m, h), expected.clone(), "{:?}", op);
            prop_assert!(m.is_reduced(h));
            // canonical: building the same function directly gives the same node
            let direct = from_table(&mut m, &expected);
            prop_assert_eq!(direct, h);
        }
    }

    #[test]
    fn unary_matches_pointwise(a in values()) {
        let mut m = manager();
        let f = from_table(&mut m, &a);
        let abs = m.unary(Unary::Abs, f);
        prop_assert_eq!(table_of(&m, abs), a.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let neg = m.unary(Unary::Negate, f);
        prop_assert_eq!(table_of(&m, neg), a.iter().map(|x| -x + 0.0).collect::<Vec<_>>());
        let not = m.unary(Unary::Not, f);
        prop_assert_eq!(table_of(&m, not), a.iter().map(|&x| if x == 0.0 { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    }

    #[test]
    fn marginals_match_brute_force(a in values(), var in 0..N) {
        let mut m = manager();
        let f = from_table(&mut m, &a);
        let s = m.sum_over(f, &[var]);
        let x = m.max_over(f, &[var]);
        prop_assert!(!m.support(s).contains(&var));
        for k in 0..1usize << N {
            let (k0, k1) = (k & !(1 << var), k | 1 << var);
            prop_assert_eq!(m.evaluate(s, &bits(k)).unwrap(), a[k0] + a[k1]);
            prop_assert_eq!(m.evaluate(x, &bits(k)).unwrap(), a[k0].max(a[k1]));
        }
        let r1 = m.restrict(f, var, true);
        for k in 0..1usize << N {
            prop_assert_eq!(m.evaluate(r1, &bits(k)).unwrap(), a[k | 1 << var]);
        }
    }

    #[test]
    fn rename_swaps_variables(a in values(), i in 0..N, j in 0..N) {
        let mut m = manager();
        let f = from_table(&mut m, &a);
        let map: HashMap<usize, usize> = [(i, j), (j, i)].into_iter().collect();
        let g = m.rename(f, &map);
        for k in 0..1usize << N {
            let bi = k >> i & 1;
            let bj = k >> j & 1;
            let swapped = (k & !(1 << i) & !(1 << j)) | bi << j | bj << i;
            prop_assert_eq!(m.evaluate(g, &bits(k)).unwrap(), a[swapped]);
        }
        prop_assert!(m.is_reduced(g));
    }

    #[test]
    fn reductions_and_extremes(a in values()) {
        let mut m = manager();
        let f = from_table(&mut m, &a);
        let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(m.min_value(f), lo);
        prop_assert_eq!(m.max_value(f), hi);
        let mut leaves: Vec<f64> = a.iter().map(|x| x + 0.0).collect();
        leaves.sort_by(f64::total_cmp);
        leaves.dedup();
        let mut got = m.leaf_values(f);
        got.sort_by(f64::total_cmp);
        prop_assert_eq!(got, leaves);
        prop_assert!(m.node_count(f) <= (1 << (N + 1)) - 1);
    }
}

fn iff(m: &mut Manager, a: Dd, b: Dd) -> Dd {
    let both = m.apply(Op::And, a, b);
    let na = m.unary(Unary::Not, a);
    let nb = m.unary(Unary::Not, b);
    let neither = m.apply(Op::And, na, nb);
    m.apply(Op::Or, both, neither)
}

#[test]
fn reachability_matches_graph_search() {
    // state bits s0 s1 with primed copies; one relation flips s0 and keeps
    // s1, the other keeps s0 and sets s1 once s0 holds
    let mut m = Manager::new(VarOrder::new(["s0", "s0'", "s1", "s1'"].map(String::from).to_vec()).unwrap());
    let (s0, p0, s1, p1) = (m.var_at(0), m.var_at(1), m.var_at(2), m.var_at(3));
    let n_s0 = m.unary(Unary::Not, s0);
    let n_s1 = m.unary(Unary::Not, s1);
    let flip = iff(&mut m, p0, n_s0);
    let keep1 = iff(&mut m, p1, s1);
    let r1 = m.apply(Op::And, flip, keep1);
    let keep0 = iff(&mut m, p0, s0);
    let grow = m.apply(Op::Or, s0, s1);
    let set1 = iff(&mut m, p1, grow);
    let r2 = m.apply(Op::And, keep0, set1);
    let start = m.apply(Op::And, n_s0, n_s1);
    let reach = m.reachable(start, &[r1, r2], &[0, 2], &[1, 3]).unwrap();
    let mut seen = vec![(false, false)];
    let mut frontier = seen.clone();
    while let Some((a, b)) = frontier.pop() {
        for next in [(!a, b), (a, a || b)] {
            if !seen.contains(&next) {
                seen.push(next);
                frontier.push(next);
            }
        }
    }
    for (a, b) in [(false, false), (true, false), (true, true), (false, true)] {
        let want = if seen.contains(&(a, b)) { 1.0 } else { 0.0 };
        assert_eq!(m.evaluate(reach, &[a, false, b, false]).unwrap(), want);
    }
    assert!(!m.support(reach).contains(&1) && !m.support(reach).contains(&3));
}
