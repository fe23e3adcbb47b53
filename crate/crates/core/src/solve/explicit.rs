use super::{Solution, SolverConfig};
use crate::xmdp::Xmdp;
use crate::{Error, Result};

/// Largest system solved by direct elimination during policy evaluation.
const DIRECT_LIMIT: usize = 2000;

/// What the Bellman operator needs to know about an MDP.
pub(crate) trait Model {
    fn len(&self) -> usize;
    fn reward(&self, e: usize) -> f64;
    /// Per-action distributions; empty means unavailable.
    fn dists(&self, e: usize) -> &[Vec<(usize, f64)>];
    /// A value held constant by the caller.
    fn fixed(&self, _e: usize) -> Option<f64> {
        None
    }
}

impl Model for Xmdp {
    fn len(&self) -> usize {
        self.states.len()
    }

    fn reward(&self, e: usize) -> f64 {
        self.rewards[e]
    }

    fn dists(&self, e: usize) -> &[Vec<(usize, f64)>] {
        &self.trans[e]
    }
}

pub(crate) fn diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

pub(crate) fn q_value<M: Model + ?Sized>(m: &M, v: &[f64], e: usize, a: usize, beta: f64) -> f64 {
    let future: f64 = m.dists(e)[a].iter().map(|&(f, p)| p * v[f]).sum();
    m.reward(e) + beta * future
}

/// Best value and first maximizing action at `e`.
pub(crate) fn backup<M: Model + ?Sized>(m: &M, v: &[f64], e: usize, beta: f64) -> (f64, Option<usize>) {
    if let Some(x) = m.fixed(e) {
        return (x, None);
    }
    let dists = m.dists(e);
    if dists.iter().all(Vec::is_empty) {
        return (m.reward(e), None);
    }
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for (a, d) in dists.iter().enumerate() {
        if d.is_empty() {
            continue;
        }
        let q = q_value(m, v, e, a, beta);
        if q > best || arg.is_none() {
            best = q;
            arg = Some(a);
        }
    }
    (best, arg)
}

pub(crate) fn greedy<M: Model + ?Sized>(m: &M, v: &[f64], beta: f64) -> Vec<Option<usize>> {
    (0..m.len()).map(|e| backup(m, v, e, beta).1).collect()
}

pub(crate) struct Run {
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

/// Synchronous Bellman sweeps until the residual drops to `thr`.
pub(crate) fn vi_sweeps<M: Model + ?Sized>(m: &M, v: &mut Vec<f64>, beta: f64, thr: f64, max_iters: usize) -> Run {
    let mut residuals = Vec::new();
    for it in 1..=max_iters {
        let next: Vec<f64> = (0..m.len()).map(|e| backup(m, v, e, beta).0).collect();
        let r = v.iter().zip(&next).map(|(&a, &b)| diff(a, b)).fold(0.0, f64::max);
        *v = next;
        residuals.push(r);
        if r <= thr {
            return Run {
                iterations: it,
                converged: true,
                residuals,
            };
        }
    }
    Run {
        iterations: max_iters,
        converged: false,
        residuals,
    }
}

/// Solves (I − βP_π)V = R for the non-fixed e-states. Returns false when
/// the direct method does not apply.
fn solve_direct<M: Model + ?Sized>(m: &M, policy: &[Option<usize>], v: &mut [f64], beta: f64) -> bool {
    let free: Vec<usize> = (0..m.len()).filter(|&e| m.fixed(e).is_none()).collect();
    if free.len() > DIRECT_LIMIT {
        return false;
    }
    let mut pos = vec![usize::MAX; m.len()];
    for (i, &e) in free.iter().enumerate() {
        pos[e] = i;
    }
    let k = free.len();
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for (i, &e) in free.iter().enumerate() {
        a[i * k + i] = 1.0;
        b[i] = m.reward(e);
        if let Some(act) = policy[e] {
            for &(f, p) in &m.dists(e)[act] {
                match m.fixed(f) {
                    Some(x) => b[i] += beta * p * x,
                    None => a[i * k + pos[f]] -= beta * p,
                }
            }
        }
    }
    if b.iter().any(|x| !x.is_finite()) {
        return false;
    }
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs()))
            .expect("nonempty range");
        assert!(a[pivot * k + col].abs() > 1e-300, "singular evaluation system");
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
            }
            b.swap(pivot, col);
        }
        let d = a[col * k + col];
        for row in col + 1..k {
            let f = a[row * k + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..k {
                a[row * k + j] -= f * a[col * k + j];
            }
            b[row] -= f * b[col];
        }
    }
    for row in (0..k).rev() {
        let mut s = b[row];
        for j in row + 1..k {
            s -= a[row * k + j] * b[j];
        }
        b[row] = s / a[row * k + row];
    }
    for (i, &e) in free.iter().enumerate() {
        v[e] = b[i];
    }
    for e in 0..m.len() {
        if let Some(x) = m.fixed(e) {
            v[e] = x;
        }
    }
    true
}

/// Value of a fixed policy, exactly for small systems, otherwise by
/// iteration until the residual drops to `thr`.
pub(crate) fn evaluate<M: Model + ?Sized>(
    m: &M,
    policy: &[Option<usize>],
    v: &mut [f64],
    beta: f64,
    thr: f64,
    max_iters: usize,
) {
    if solve_direct(m, policy, v, beta) {
        return;
    }
    let step = |v: &[f64], e: usize| match (m.fixed(e), policy[e]) {
        (Some(x), _) => x,
        (None, Some(a)) => q_value(m, v, e, a, beta),
        (None, None) => m.reward(e),
    };
    for _ in 0..max_iters {
        let next: Vec<f64> = (0..m.len()).map(|e| step(v, e)).collect();
        let r = v.iter().zip(&next).map(|(&a, &b)| diff(a, b)).fold(0.0, f64::max);
        v.copy_from_slice(&next);
        if r <= thr {
            return;
        }
    }
}

/// Alternates policy evaluation and greedy improvement. Actions switch only
/// on a strict improvement.
pub(crate) fn pi_loop<M: Model + ?Sized>(
    m: &M,
    v: &mut Vec<f64>,
    policy: &mut [Option<usize>],
    beta: f64,
    thr: f64,
    max_iters: usize,
) -> Run {
    let mut residuals = Vec::new();
    for it in 1..=max_iters {
        evaluate(m, policy, v, beta, thr, max_iters);
        let mut changed = false;
        let mut residual: f64 = 0.0;
        for e in 0..m.len() {
            if m.fixed(e).is_some() {
                continue;
            }
            let (best, arg) = backup(m, v, e, beta);
            residual = residual.max(diff(best, v[e]));
            let current = match policy[e] {
                Some(a) => q_value(m, v, e, a, beta),
                None => f64::NEG_INFINITY,
            };
            let better = if current.is_finite() {
                best > current + 1e-12 * (1.0 + current.abs())
            } else {
                best > current
            };
            if arg.is_some() && (policy[e].is_none() || better) {
                if policy[e] != arg {
                    changed = true;
                }
                policy[e] = arg;
            }
        }
        residuals.push(residual);
        if !changed {
            return Run {
                iterations: it,
                converged: true,
                residuals,
            };
        }
    }
    Run {
        iterations: max_iters,
        converged: false,
        residuals,
    }
}

fn check(m: &Xmdp, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if m.is_empty() {
        return Err(Error::Config("empty MDP".into()));
    }
    m.validate()
}

/// Pessimistic start for value iteration.
fn initial_values(m: &Xmdp, cfg: &SolverConfig) -> Vec<f64> {
    vec![m.min_reward() / (1.0 - cfg.discount); m.len()]
}

pub fn value_iteration(m: &Xmdp, cfg: &SolverConfig) -> Result<Solution> {
    check(m, cfg)?;
    let mut v = initial_values(m, cfg);
    let run = vi_sweeps(m, &mut v, cfg.discount, cfg.threshold(), cfg.max_iters);
    let policy = greedy(m, &v, cfg.discount);
    Ok(Solution {
        values: v,
        policy,
        iterations: run.iterations,
        converged: run.converged,
        residuals: run.residuals,
    })
}

pub fn policy_iteration(m: &Xmdp, cfg: &SolverConfig) -> Result<Solution> {
    check(m, cfg)?;
    let mut v = initial_values(m, cfg);
    let mut policy: Vec<Option<usize>> = (0..m.len()).map(|e| m.available(e).next()).collect();
    let run = pi_loop(m, &mut v, &mut policy, cfg.discount, cfg.threshold(), cfg.max_iters);
    let policy = greedy(m, &v, cfg.discount);
    Ok(Solution {
        values: v,
        policy,
        iterations: run.iterations,
        converged: run.converged,
        residuals: run.residuals,
    })
}

/// Value of following `policy` forever.
pub fn evaluate_policy(m: &Xmdp, policy: &[Option<usize>], cfg: &SolverConfig) -> Result<Vec<f64>> {
    check(m, cfg)?;
    if policy.len() != m.len() {
        return Err(Error::Config("policy length differs from the MDP".into()));
    }
    let mut v = initial_values(m, cfg);
    evaluate(m, policy, &mut v, cfg.discount, cfg.threshold() * 1e-3, cfg.max_iters);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::State;

    fn mdp(rewards: Vec<f64>, trans: Vec<Vec<Vec<(usize, f64)>>>) -> Xmdp {
        let n = rewards.len();
        Xmdp {
            action_names: (0..trans[0].len()).map(|a| format!("a{a}")).collect(),
            states: (0..n as u64).map(State).collect(),
            labels: vec![String::new(); n],
            rewards,
            trans,
            dead: vec![false; n],
            start: 0,
            width: 4,
        }
    }

    #[test]
    fn geometric_series() {
        let m = mdp(vec![1.0], vec![vec![vec![(0, 1.0)]]]);
        let cfg = SolverConfig::new(0.9, 1e-10).unwrap();
        let vi = value_iteration(&m, &cfg).unwrap();
        assert!((vi.values[0] - 10.0).abs() <= 1e-9);
        let pi = policy_iteration(&m, &cfg).unwrap();
        assert!((pi.values[0] - 10.0).abs() <= 1e-9);
    }

    #[test]
    fn two_state_chain() {
        let m = mdp(vec![0.0, 1.0], vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]]]);
        let cfg = SolverConfig::new(0.5, 1e-10).unwrap();
        let vi = value_iteration(&m, &cfg).unwrap();
        assert!((vi.values[0] - 1.0).abs() <= 1e-9);
        assert!((vi.values[1] - 2.0).abs() <= 1e-9);
        let pi = policy_iteration(&m, &cfg).unwrap();
        assert!((pi.values[0] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn ties_go_to_the_first_action() {
        let m = mdp(vec![0.0, 1.0], vec![vec![vec![(1, 1.0)], vec![(1, 1.0)]], vec![vec![(1, 1.0)], vec![(1, 1.0)]]]);
        let cfg = SolverConfig::new(0.9, 1e-6).unwrap();
        assert_eq!(value_iteration(&m, &cfg).unwrap().policy, vec![Some(0), Some(0)]);
        assert_eq!(policy_iteration(&m, &cfg).unwrap().policy, vec![Some(0), Some(0)]);
    }

    #[test]
    fn rejects_bad_discount() {
        assert!(SolverConfig::new(1.0, 1e-6).is_err());
        assert!(SolverConfig::new(0.9, 0.0).is_err());
    }
}
