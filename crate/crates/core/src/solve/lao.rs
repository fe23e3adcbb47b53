use std::collections::{HashMap, HashSet};

use super::explicit::{backup, greedy, pi_loop, vi_sweeps, Model};
use super::SolverConfig;
use crate::domain::State;
use crate::translate::Generator;
use crate::{Error, Result};

/// Value update used on the expanded part of the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subroutine {
    Vi,
    Pi,
}

#[derive(Clone, Debug)]
pub struct LaoResult<K> {
    /// Value of the start e-state.
    pub value: f64,
    /// E-states whose successors were generated.
    pub expanded: usize,
    /// E-states generated, expanded or not.
    pub generated: usize,
    /// Expansion rounds.
    pub iterations: usize,
    /// Bellman sweeps (or policy improvements) over all rounds.
    pub sweeps: usize,
    pub converged: bool,
    /// Greedy action for every e-state of the final solution graph.
    pub policy: HashMap<K, usize>,
    /// State behind each e-state of the final solution graph.
    pub states: HashMap<K, State>,
    /// `(generation index, action, value)` over the final solution graph,
    /// sorted by index.
    pub table: Vec<(usize, Option<usize>, f64)>,
}

struct Graph<K> {
    keys: Vec<K>,
    index: HashMap<K, usize>,
    states: Vec<State>,
    reward: Vec<f64>,
    succ: Vec<Vec<Vec<(usize, f64)>>>,
    expanded: Vec<bool>,
    dead: Vec<bool>,
    h: Vec<f64>,
}

impl<K> Model for Graph<K> {
    fn len(&self) -> usize {
        self.keys.len()
    }

    fn reward(&self, e: usize) -> f64 {
        self.reward[e]
    }

    fn dists(&self, e: usize) -> &[Vec<(usize, f64)>] {
        &self.succ[e]
    }

    fn fixed(&self, e: usize) -> Option<f64> {
        if self.dead[e] {
            Some(f64::NEG_INFINITY)
        } else if !self.expanded[e] {
            Some(self.h[e])
        } else {
            None
        }
    }
}

impl<K: Clone + Eq + std::hash::Hash> Graph<K> {
    fn node(&mut self, k: K, h: &dyn Fn(&K) -> f64) -> usize {
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.keys.len();
        self.h.push(h(&k));
        self.index.insert(k.clone(), i);
        self.keys.push(k);
        self.states.push(State(0));
        self.reward.push(0.0);
        self.succ.push(Vec::new());
        self.expanded.push(false);
        self.dead.push(false);
        i
    }

    /// E-states reachable from the start under the greedy policy, and the
    /// unexpanded ones among them.
    fn solution_graph(&self, policy: &[Option<usize>]) -> (Vec<usize>, Vec<usize>) {
        let mut seen = HashSet::from([0usize]);
        let mut stack = vec![0usize];
        let mut nodes = Vec::new();
        let mut tips = Vec::new();
        while let Some(e) = stack.pop() {
            nodes.push(e);
            if !self.expanded[e] {
                tips.push(e);
                continue;
            }
            if let Some(a) = policy[e] {
                for &(f, _) in &self.succ[e][a] {
                    if seen.insert(f) {
                        stack.push(f);
                    }
                }
            }
        }
        tips.sort_unstable();
        (nodes, tips)
    }
}

/// LAO*: heuristic search over the e-states a generator produces. `h` must
/// bound the optimal value from above.
pub fn lao_star<G: Generator>(
    gen: &G,
    h: &dyn Fn(&G::Key) -> f64,
    cfg: &SolverConfig,
    sub: Subroutine,
    max_estates: usize,
) -> Result<LaoResult<G::Key>> {
    cfg.validate()?;
    let n_actions = gen.action_names().len();
    let mut g = Graph {
        keys: Vec::new(),
        index: HashMap::new(),
        states: Vec::new(),
        reward: Vec::new(),
        succ: Vec::new(),
        expanded: Vec::new(),
        dead: Vec::new(),
        h: Vec::new(),
    };
    g.node(gen.start()?, h);
    let mut v: Vec<f64> = g.h.clone();
    let mut policy: Vec<Option<usize>> = vec![None];
    let (beta, thr) = (cfg.discount, cfg.threshold());
    let mut iterations = 0;
    let mut sweeps = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let (_, tips) = g.solution_graph(&policy);
        if tips.is_empty() {
            converged = true;
            break;
        }
        iterations += 1;
        for t in tips {
            let x = gen.expand(&g.keys[t].clone())?;
            g.states[t] = x.state;
            g.reward[t] = x.reward;
            g.dead[t] = x.dead;
            g.expanded[t] = true;
            let mut rows = Vec::with_capacity(n_actions);
            for dist in x.succ {
                let row: Vec<(usize, f64)> = dist.into_iter().map(|(k, p)| (g.node(k, h), p)).collect();
                rows.push(row);
            }
            rows.resize(n_actions, Vec::new());
            g.succ[t] = rows;
            if g.len() > max_estates {
                return Err(Error::CapExceeded {
                    what: "e-state",
                    limit: max_estates,
                    count: g.len(),
                });
            }
        }
        v.resize(g.len(), 0.0);
        for e in 0..g.len() {
            if let Some(x) = g.fixed(e) {
                v[e] = x;
            }
        }
        policy.resize(g.len(), None);
        match sub {
            Subroutine::Vi => {
                let run = vi_sweeps(&g, &mut v, beta, thr, cfg.max_iters);
                sweeps += run.iterations;
            }
            Subroutine::Pi => {
                for e in 0..g.len() {
                    if policy[e].is_none() && g.fixed(e).is_none() {
                        policy[e] = backup(&g, &v, e, beta).1;
                    }
                }
                let run = pi_loop(&g, &mut v, &mut policy, beta, thr, cfg.max_iters);
                sweeps += run.iterations;
            }
        }
        policy = greedy(&g, &v, beta);
        if v[0] == f64::NEG_INFINITY {
            return Err(Error::Infeasible(
                "control knowledge rules out every policy from the start".into(),
            ));
        }
    }
    let (nodes, _) = g.solution_graph(&policy);
    let mut pol = HashMap::new();
    let mut states = HashMap::new();
    let mut table = Vec::with_capacity(nodes.len());
    for e in nodes {
        table.push((e, policy[e], v[e]));
        states.insert(g.keys[e].clone(), g.states[e]);
        if let Some(a) = policy[e] {
            pol.insert(g.keys[e].clone(), a);
        }
    }
    Ok(LaoResult {
        value: v[0],
        expanded: g.expanded.iter().filter(|&&x| x).count(),
        generated: g.len(),
        iterations,
        sweeps,
        converged,
        policy: pol,
        states,
        table: {
            table.sort_by_key(|r| r.0);
            table
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::{default_heuristic, value_iteration};
    use crate::translate::XmdpGen;
    use crate::xmdp::Xmdp;

    fn self_loop() -> Xmdp {
        Xmdp {
            action_names: vec!["a".into()],
            states: vec![State(0)],
            labels: vec![String::new()],
            rewards: vec![1.0],
            trans: vec![vec![vec![(0, 1.0)]]],
            dead: vec![false],
            start: 0,
            width: 1,
        }
    }

    #[test]
    fn single_state_matches_vi() {
        let m = self_loop();
        let cfg = SolverConfig::new(0.9, 1e-8).unwrap();
        let h0 = default_heuristic(1.0, 0.9);
        for sub in [Subroutine::Vi, Subroutine::Pi] {
            let r = lao_star(&XmdpGen(&m), &|_| h0, &cfg, sub, 100).unwrap();
            let vi = value_iteration(&m, &cfg).unwrap();
            assert!((r.value - vi.values[0]).abs() <= 2e-8);
            assert_eq!(r.expanded, 1);
            assert!(r.converged);
        }
    }

    #[test]
    fn skips_dominated_branch() {
        // From 0: `good` loops on a rewarded state; `bad` enters an
        // unrewarded chain that never needs expanding.
        let m = Xmdp {
            action_names: vec!["good".into(), "bad".into()],
            states: (0..5).map(State).collect(),
            labels: vec![String::new(); 5],
            rewards: vec![0.0, 1.0, 0.0, 0.0, 0.0],
            trans: vec![
                vec![vec![(1, 1.0)], vec![(2, 1.0)]],
                vec![vec![(1, 1.0)], vec![(1, 1.0)]],
                vec![vec![(3, 1.0)], vec![(3, 1.0)]],
                vec![vec![(4, 1.0)], vec![(4, 1.0)]],
                vec![vec![(4, 1.0)], vec![(4, 1.0)]],
            ],
            dead: vec![false; 5],
            start: 0,
            width: 3,
        };
        let cfg = SolverConfig::new(0.9, 1e-6).unwrap();
        let h = |&e: &usize| if e == 1 { 10.0 } else { 1.0 };
        let r = lao_star(&XmdpGen(&m), &h, &cfg, Subroutine::Vi, 100).unwrap();
        assert!((r.value - 9.0).abs() < 2e-6);
        assert!(r.expanded < 5, "expanded {}", r.expanded);
        assert_eq!(r.policy[&0], 0);
    }
}
