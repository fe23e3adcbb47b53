//! Hand-coded benchmark families and a seeded random-dynamics generator.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Action, Domain, ProbTree, State};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    SpuddLinear,
    SpuddExpon,
    OnOff,
    Complete,
    Random,
}

impl Family {
    pub const HAND_CODED: [Family; 4] = [
        Family::SpuddLinear,
        Family::SpuddExpon,
        Family::OnOff,
        Family::Complete,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::SpuddLinear => "spudd-linear",
            Family::SpuddExpon => "spudd-expon",
            Family::OnOff => "on-off",
            Family::Complete => "complete",
            Family::Random => "random",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Ok(match s {
            "spudd-linear" => Family::SpuddLinear,
            "spudd-expon" => Family::SpuddExpon,
            "on-off" => Family::OnOff,
            "complete" => Family::Complete,
            "random" => Family::Random,
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        })
    }
}

/// Generator parameters. `success` only affects ON/OFF; `structure`,
/// `uncertainty` and `seed` only affect random domains.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub discount: f64,
    pub success: f64,
    pub structure: f64,
    pub uncertainty: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            discount: 0.9,
            success: 0.5,
            structure: 0.5,
            uncertainty: 0.5,
            seed: 0,
        }
    }
}

fn leaf(p: f64) -> ProbTree {
    ProbTree::Leaf(p)
}

/// Tree that is `then` when all of `vars` hold and `otherwise` else.
fn all_of(vars: &[usize], then: f64, otherwise: f64) -> ProbTree {
    match vars.split_first() {
        None => leaf(then),
        Some((&v, rest)) => ProbTree::test(v, all_of(rest, then, otherwise), leaf(otherwise)),
    }
}

pub fn gen_builtin(family: Family, n: usize, params: &GenParams) -> Result<Domain> {
    if n == 0 {
        return Err(Error::Config("a domain needs at least one proposition".into()));
    }
    let props: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    let mut actions = Vec::new();
    match family {
        Family::SpuddLinear => {
            for i in 0..n {
                let effects = (0..n)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => leaf(0.0),
                        std::cmp::Ordering::Equal => leaf(1.0),
                        std::cmp::Ordering::Greater => ProbTree::persist(j),
                    })
                    .collect();
                actions.push(Action { name: format!("a{}", i + 1), effects });
            }
        }
        Family::SpuddExpon => {
            for i in 0..n {
                let lower: Vec<usize> = (0..i).collect();
                let effects = (0..n)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => leaf(0.0),
                        std::cmp::Ordering::Equal => all_of(&lower, 1.0, 0.0),
                        std::cmp::Ordering::Greater => ProbTree::persist(j),
                    })
                    .collect();
                actions.push(Action { name: format!("a{}", i + 1), effects });
            }
        }
        Family::OnOff => {
            let q = params.success;
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Config(format!("success probability {q} outside [0,1]")));
            }
            for i in 0..n {
                for on in [true, false] {
                    let effects = (0..n)
                        .map(|j| {
                            if j != i {
                                ProbTree::persist(j)
                            } else if on {
                                ProbTree::test(j, leaf(1.0), leaf(q))
                            } else {
                                ProbTree::test(j, leaf(1.0 - q), leaf(0.0))
                            }
                        })
                        .collect();
                    let verb = if on { "turn-on" } else { "turn-off" };
                    actions.push(Action { name: format!("{verb}-p{}", i + 1), effects });
                }
            }
        }
        Family::Complete => {
            for i in 0..n {
                let effects = (0..n)
                    .map(|j| {
                        if j == i {
                            leaf((i + 1) as f64 / (n + 1) as f64)
                        } else {
                            leaf(0.5)
                        }
                    })
                    .collect();
                actions.push(Action { name: format!("a{}", i + 1), effects });
            }
        }
        Family::Random => {
            for (name, x) in [("structure", params.structure), ("uncertainty", params.uncertainty)] {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Config(format!("{name} {x} outside [0,1]")));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            for i in 0..n {
                let effects = (0..n)
                    .map(|_| {
                        let eligible: Vec<usize> = (0..n).collect();
                        random_tree(&mut rng, eligible, params.structure, params.uncertainty)
                    })
                    .collect();
                actions.push(Action { name: format!("a{}", i + 1), effects });
            }
        }
    }
    Domain::new(props, actions, State(0), params.discount)
}

/// Splits on a random remaining variable with probability `structure`;
/// leaves are deterministic 0/1 with probability `1 - uncertainty`, otherwise
/// uniform on [0,1] rounded to three decimals.
fn random_tree(rng: &mut ChaCha8Rng, mut eligible: Vec<usize>, structure: f64, uncertainty: f64) -> ProbTree {
    if !eligible.is_empty() && rng.random_bool(structure) {
        let k = rng.random_range(0..eligible.len());
        let var = eligible.swap_remove(k);
        let then = random_tree(rng, eligible.clone(), structure, uncertainty);
        let otherwise = random_tree(rng, eligible, structure, uncertainty);
        return ProbTree::test(var, then, otherwise);
    }
    if rng.random_bool(uncertainty) {
        let p: f64 = rng.random();
        ProbTree::Leaf((p * 1000.0).round() / 1000.0)
    } else if rng.random_bool(0.5) {
        ProbTree::Leaf(1.0)
    } else {
        ProbTree::Leaf(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GenParams {
        GenParams::default()
    }

    #[test]
    fn spudd_linear_rule() {
        let d = gen_builtin(Family::SpuddLinear, 3, &params()).unwrap();
        // (T,F,T) under a2 -> (F,T,T)
        assert_eq!(d.successors(State(0b101), 1).unwrap(), vec![(State(0b110), 1.0)]);
    }

    #[test]
    fn spudd_expon_rule() {
        let d = gen_builtin(Family::SpuddExpon, 3, &params()).unwrap();
        assert_eq!(d.successors(State(0b011), 2).unwrap(), vec![(State(0b100), 1.0)]);
        assert_eq!(d.successors(State(0b001), 2).unwrap(), vec![(State(0b000), 1.0)]);
    }

    #[test]
    fn distributions_sum_to_one() {
        let mut domains = Vec::new();
        for f in Family::HAND_CODED {
            for n in 1..=6 {
                domains.push(gen_builtin(f, n, &params()).unwrap());
            }
        }
        for seed in 0..50 {
            let p = GenParams { seed, ..params() };
            domains.push(gen_builtin(Family::Random, 1 + (seed as usize % 6), &p).unwrap());
        }
        for d in &domains {
            for s in d.enumerate_states(20).unwrap() {
                for a in 0..d.actions.len() {
                    let total: f64 = d.successors(s, a).unwrap().iter().map(|x| x.1).sum();
                    assert!((total - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn every_state_reachable() {
        for f in Family::HAND_CODED {
            for n in 1..=8 {
                let d = gen_builtin(f, n, &params()).unwrap();
                assert_eq!(d.reachable_states().len(), 1 << n, "{f} n={n}");
            }
        }
    }

    #[test]
    fn random_is_deterministic_and_round_trips() {
        let p = GenParams { seed: 42, structure: 0.7, uncertainty: 0.3, ..params() };
        let a = gen_builtin(Family::Random, 5, &p).unwrap();
        let b = gen_builtin(Family::Random, 5, &p).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(Domain::parse(&a.to_text()).unwrap(), a);
        let c = gen_builtin(Family::Random, 5, &GenParams { seed: 43, ..p }).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn structure_controls_tree_size() {
        let count = |structure: f64| -> usize {
            (0..20)
                .map(|seed| {
                    let p = GenParams { seed, structure, ..params() };
                    let d = gen_builtin(Family::Random, 5, &p).unwrap();
                    d.actions.iter().flat_map(|a| &a.effects).map(|t| t.internal_nodes()).sum::<usize>()
                })
                .sum()
        };
        assert_eq!(count(0.0), 0);
        assert!(count(0.2) < count(0.6));
    }
}
