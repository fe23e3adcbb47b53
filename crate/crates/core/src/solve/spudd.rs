use std::collections::HashMap;

use super::SolverConfig;
use crate::dd::{Dd, Op, Unary};
use crate::translate::FactoredMdp;
use crate::Result;

#[derive(Clone, Debug)]
pub struct StructuredSolution {
    /// Value over current variables.
    pub value: Dd,
    /// Action index over current variables.
    pub policy: Dd,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

fn q_diagrams(fm: &mut FactoredMdp, v: Dd, beta: f64) -> Result<Vec<Dd>> {
    let to_next: HashMap<usize, usize> = fm.cur.iter().copied().zip(fm.next.iter().copied()).collect();
    let m = &mut fm.mgr;
    let vp = m.rename(v, &to_next);
    let beta_dd = m.constant(beta);
    let mut out = Vec::with_capacity(fm.actions.len());
    for a in &fm.actions {
        let mut acc = vp;
        let mut support = m.support(acc);
        support.reverse();
        for x in support {
            let j = fm.next.iter().position(|&y| y == x).expect("value reads next-step copies only");
            let p = a.cpts[j];
            let one = m.one();
            let not_p = m.apply(Op::Minus, one, p);
            let xv = m.var_at(x);
            let factor = m.ite(xv, p, not_p);
            let prod = m.apply(Op::Times, acc, factor);
            acc = m.sum_over(prod, &[x]);
            m.check_budget()?;
        }
        let disc = m.apply(Op::Times, beta_dd, acc);
        out.push(m.apply(Op::Plus, fm.reward, disc));
    }
    Ok(out)
}

/// Structured value iteration. When a reachability diagram is attached,
/// values outside it are pinned to zero and ignored by the residual.
pub fn spudd_solve(fm: &mut FactoredMdp, cfg: &SolverConfig) -> Result<StructuredSolution> {
    cfg.validate()?;
    let beta = cfg.discount;
    let mask = match fm.reach {
        Some(r) => r,
        None => fm.mgr.one(),
    };
    let min_r = fm.mgr.min_value(fm.reward);
    let v0 = fm.mgr.constant(min_r / (1.0 - beta));
    let mut v = fm.mgr.apply(Op::Times, v0, mask);
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let qs = q_diagrams(fm, v, beta)?;
        let m = &mut fm.mgr;
        let mut best = qs.first().copied().unwrap_or(fm.reward);
        for &q in qs.iter().skip(1) {
            best = m.apply(Op::Max, best, q);
        }
        let next = m.apply(Op::Times, best, mask);
        let delta = m.apply(Op::Minus, next, v);
        let delta = m.unary(Unary::Abs, delta);
        let r = m.max_value(delta);
        m.check_budget()?;
        residuals.push(r);
        v = next;
        if r <= cfg.threshold() {
            converged = true;
            break;
        }
    }
    let qs = q_diagrams(fm, v, beta)?;
    let m = &mut fm.mgr;
    let mut policy = m.zero();
    if let Some(&first) = qs.first() {
        let mut best = first;
        for (a, &q) in qs.iter().enumerate().skip(1) {
            let better = m.apply(Op::Greater, q, best);
            let idx = m.constant(a as f64);
            policy = m.ite(better, idx, policy);
            best = m.apply(Op::Max, best, q);
        }
    }
    Ok(StructuredSolution {
        value: v,
        policy,
        iterations,
        converged,
        residuals,
    })
}
