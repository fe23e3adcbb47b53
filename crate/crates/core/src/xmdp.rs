//! Explicit expanded MDPs.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::domain::State;
use crate::{Error, Result};

/// An explicit MDP over e-states. `trans[e][a]` is the distribution of
/// action `a` at e-state `e`; an empty distribution means the action is not
/// available there.
#[derive(Clone, Debug, PartialEq)]
pub struct Xmdp {
    pub action_names: Vec<String>,
    pub states: Vec<State>,
    pub labels: Vec<String>,
    pub rewards: Vec<f64>,
    pub trans: Vec<Vec<Vec<(usize, f64)>>>,
    /// E-states violating control knowledge. They have no transitions.
    pub dead: Vec<bool>,
    pub start: usize,
    /// Width used when printing states.
    pub width: usize,
}

/// 64-bit FNV-1a.
pub fn label_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl Xmdp {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().flatten().map(Vec::len).sum()
    }

    pub fn available(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.trans[e]
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_empty())
            .map(|(a, _)| a)
    }

    /// The successor of `e` under `a` whose state is `s`, if any.
    pub fn successor(&self, e: usize, a: usize, s: State) -> Option<usize> {
        self.trans[e][a]
            .iter()
            .map(|&(f, _)| f)
            .find(|&f| self.states[f] == s)
    }

    pub fn min_reward(&self) -> f64 {
        self.rewards.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_reward(&self) -> f64 {
        self.rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks shapes and that every available distribution sums to one.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.start >= n {
            return Err(Error::Eval("start e-state out of range".into()));
        }
        for (e, row) in self.trans.iter().enumerate() {
            if row.len() != self.num_actions() {
                return Err(Error::Eval(format!("e-state {e} has {} action rows", row.len())));
            }
            for (a, dist) in row.iter().enumerate() {
                if dist.is_empty() {
                    continue;
                }
                let sum: f64 = dist.iter().map(|&(_, p)| p).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Eval(format!("e-state {e} action {a} sums to {sum}")));
                }
                if dist.iter().any(|&(f, p)| f >= n || p <= 0.0) {
                    return Err(Error::Eval(format!("bad transition at e-state {e} action {a}")));
                }
            }
        }
        Ok(())
    }

    /// Removes the effect of control knowledge: an e-state is doomed when it
    /// is dead or every available action may lead to a doomed e-state.
    /// Actions with a doomed successor are withdrawn, and the result is
    /// restricted to e-states reachable from the start.
    pub fn prune_dead(&self) -> Result<Xmdp> {
        if !self.dead.iter().any(|&d| d) {
            return Ok(self.clone());
        }
        let n = self.len();
        let mut doomed = self.dead.clone();
        let mut trans = self.trans.clone();
        loop {
            let mut changed = false;
            for e in 0..n {
                if doomed[e] {
                    continue;
                }
                let had_actions = trans[e].iter().any(|d| !d.is_empty());
                for dist in trans[e].iter_mut() {
                    if dist.iter().any(|&(f, _)| doomed[f]) {
                        dist.clear();
                        changed = true;
                    }
                }
                if had_actions && trans[e].iter().all(Vec::is_empty) {
                    doomed[e] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if doomed[self.start] {
            return Err(Error::Infeasible(
                "control knowledge rules out every policy from the start".into(),
            ));
        }
        let pruned = Xmdp { trans, ..self.clone() };
        Ok(pruned.restrict_reachable())
    }

    /// Keeps only e-states reachable from the start, renumbered in BFS order.
    pub fn restrict_reachable(&self) -> Xmdp {
        let mut index = vec![usize::MAX; self.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.start]);
        index[self.start] = 0;
        while let Some(e) = queue.pop_front() {
            order.push(e);
            for dist in &self.trans[e] {
                for &(f, _) in dist {
                    if index[f] == usize::MAX {
                        index[f] = order.len() + queue.len();
                        queue.push_back(f);
                    }
                }
            }
        }
        Xmdp {
            action_names: self.action_names.clone(),
            states: order.iter().map(|&e| self.states[e]).collect(),
            labels: order.iter().map(|&e| self.labels[e].clone()).collect(),
            rewards: order.iter().map(|&e| self.rewards[e]).collect(),
            trans: order
                .iter()
                .map(|&e| {
                    self.trans[e]
                        .iter()
                        .map(|d| d.iter().map(|&(f, p)| (index[f], p)).collect())
                        .collect()
                })
                .collect(),
            dead: order.iter().map(|&e| self.dead[e]).collect(),
            start: 0,
            width: self.width,
        }
    }

    /// Text dump: a block of `id, state-bits, label-hash, reward` lines, then
    /// a block of `src, action, dst, prob` lines.
    pub fn dump(&self) -> String {
        let mut out = String::from("# e-states: id, state-bits, label-hash, reward\n");
        for e in 0..self.len() {
            let _ = writeln!(
                out,
                "{}, {}, {:016x}, {}",
                e,
                self.states[e].bits(self.width),
                label_hash(&self.labels[e]),
                self.rewards[e]
            );
        }
        out.push_str("# transitions: src, action, dst, prob\n");
        for (e, row) in self.trans.iter().enumerate() {
            for (a, dist) in row.iter().enumerate() {
                for &(f, p) in dist {
                    let _ = writeln!(out, "{}, {}, {}, {}", e, self.action_names[a], f, p);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(dead_tail: bool) -> Xmdp {
        // 0 -a-> 1, 0 -b-> 2; 1 and 2 loop.
        Xmdp {
            action_names: vec!["a".into(), "b".into()],
            states: vec![State(0), State(1), State(2)],
            labels: vec!["".into(); 3],
            rewards: vec![0.0, 1.0, 2.0],
            trans: vec![
                vec![vec![(1, 1.0)], vec![(2, 1.0)]],
                vec![vec![(1, 1.0)], vec![(1, 1.0)]],
                vec![vec![], vec![]],
            ],
            dead: vec![false, false, dead_tail],
            start: 0,
            width: 2,
        }
    }

    #[test]
    fn pruning_withdraws_actions() {
        let m = chain(true).prune_dead().unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.trans[0][1].is_empty());
        assert_eq!(m.trans[0][0], vec![(1, 1.0)]);
        m.validate().unwrap();
    }

    #[test]
    fn doomed_start_is_infeasible() {
        let mut m = chain(true);
        m.trans[0][0] = vec![(2, 1.0)];
        assert!(matches!(m.prune_dead(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn dump_format() {
        let mut m = chain(false);
        m.trans[2] = vec![vec![(2, 1.0)], vec![(2, 1.0)]];
        let text = m.dump();
        assert!(text.contains("0, 00, "));
        assert!(text.contains("0, a, 1, 1\n"));
        assert_eq!(label_hash(""), 0xcbf29ce484222325);
    }
}
