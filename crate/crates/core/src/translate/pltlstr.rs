use std::collections::HashMap;

use super::{Expansion, Generator};
use crate::dd::{Dd, Manager, Op, Unary, VarOrder};
use crate::domain::{Domain, ProbTree, State};
use crate::logic::{pure_temporal_subformulas, Dialect, Pltl, RewardSpec};
use crate::{Error, Result};

/// Per-variable dynamics of one action: `cpts[j]` is the probability that
/// variable `j` is true next, as a diagram over current variables.
#[derive(Clone, Debug)]
pub struct FactoredAction {
    pub name: String,
    pub cpts: Vec<Dd>,
}

/// A factored MDP: the domain's propositions followed by temporal
/// variables. Temporal variable `k` holds the current truth of
/// `prv temporal[k]`.
pub struct FactoredMdp {
    pub mgr: Manager,
    pub props: Vec<String>,
    pub temporal: Vec<Pltl>,
    /// Diagram position of variable `j` and of its next-step copy.
    pub cur: Vec<usize>,
    pub next: Vec<usize>,
    pub actions: Vec<FactoredAction>,
    pub reward: Dd,
    pub init: State,
    /// Characteristic function of the reachable assignments, when computed.
    pub reach: Option<Dd>,
    pub discount: f64,
}

impl FactoredMdp {
    /// Propositions plus temporal variables.
    pub fn num_vars(&self) -> usize {
        self.cur.len()
    }

    pub fn num_state_vars(&self) -> usize {
        self.props.len()
    }

    /// Full diagram assignment for a state and temporal bits; next-step
    /// copies are false.
    pub fn assignment(&self, s: State, t: u64) -> Vec<bool> {
        let n = self.props.len();
        let mut x = vec![false; self.mgr.num_vars()];
        for i in 0..n {
            x[self.cur[i]] = s.get(i);
        }
        for k in 0..self.temporal.len() {
            x[self.cur[n + k]] = (t >> k) & 1 == 1;
        }
        x
    }

    pub fn reward_at(&self, s: State, t: u64) -> Result<f64> {
        self.mgr.evaluate(self.reward, &self.assignment(s, t))
    }

    /// Whether an assignment is inside the reachability diagram (true when
    /// none is attached).
    pub fn is_reachable(&self, s: State, t: u64) -> Result<bool> {
        match self.reach {
            Some(r) => Ok(self.mgr.evaluate(r, &self.assignment(s, t))? != 0.0),
            None => Ok(true),
        }
    }

    /// Successor distribution read off the diagrams.
    pub fn successors(&self, s: State, t: u64, a: usize) -> Result<Vec<((State, u64), f64)>> {
        let x = self.assignment(s, t);
        let n = self.props.len();
        let cpts = &self.actions[a].cpts;
        let mut tnext = 0u64;
        for k in 0..self.temporal.len() {
            if self.mgr.evaluate(cpts[n + k], &x)? != 0.0 {
                tnext |= 1 << k;
            }
        }
        let mut dist = vec![(State(0), 1.0)];
        for (i, &cpt) in cpts.iter().enumerate().take(n) {
            let p = self.mgr.evaluate(cpt, &x)?;
            let mut out = Vec::with_capacity(dist.len() * 2);
            for &(u, q) in &dist {
                if p > 0.0 {
                    out.push((u.with(i, true), q * p));
                }
                if p < 1.0 {
                    out.push((u, q * (1.0 - p)));
                }
            }
            dist = out;
        }
        dist.sort_by_key(|(u, _)| *u);
        Ok(dist.into_iter().map(|(u, p)| ((u, tnext), p)).collect())
    }

    /// Nodes in all dynamics, reward and reachability diagrams together.
    pub fn node_count(&self) -> usize {
        let mut roots: Vec<Dd> = self.actions.iter().flat_map(|a| a.cpts.iter().copied()).collect();
        roots.push(self.reward);
        roots.extend(self.reach);
        self.mgr.shared_node_count(&roots)
    }

    /// Computes and attaches the reachable assignments from the start.
    pub fn attach_reachability(&mut self) -> Result<()> {
        let m = &mut self.mgr;
        let mut start = m.one();
        for j in 0..self.cur.len() {
            let on = j < self.props.len() && self.init.get(j);
            let v = m.var_at(self.cur[j]);
            let lit = if on { v } else { m.unary(Unary::Not, v) };
            start = m.apply(Op::And, start, lit);
        }
        let mut relations = Vec::with_capacity(self.actions.len());
        for a in &self.actions {
            let mut rel = m.one();
            for (j, &cpt) in a.cpts.iter().enumerate() {
                let may_be_true = m.unary(Unary::NonZero, cpt);
                let one = m.one();
                let complement = m.apply(Op::Minus, one, cpt);
                let may_be_false = m.unary(Unary::NonZero, complement);
                let x = m.var_at(self.next[j]);
                let step = m.ite(x, may_be_true, may_be_false);
                rel = m.apply(Op::And, rel, step);
                m.check_budget()?;
            }
            relations.push(rel);
        }
        let reach = m.reachable(start, &relations, &self.cur, &self.next)?;
        self.reach = Some(reach);
        Ok(())
    }
}

fn temporal_keys(entries: &[(Pltl, f64)]) -> Vec<Pltl> {
    let mut keys: Vec<Pltl> = Vec::new();
    for psi in pure_temporal_subformulas(entries.iter().map(|(f, _)| f)) {
        let key = match psi {
            Pltl::Prev(inner) => *inner,
            since => since,
        };
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys
}

fn tree_to_dd(m: &mut Manager, t: &ProbTree, cur: &[usize]) -> Dd {
    match t {
        ProbTree::Leaf(p) => m.constant(*p),
        ProbTree::Test { var, then, otherwise } => {
            let x = m.var_at(cur[*var]);
            let hi = tree_to_dd(m, then, cur);
            let lo = tree_to_dd(m, otherwise, cur);
            m.ite(x, hi, lo)
        }
    }
}

struct Compiler<'a> {
    props: &'a [String],
    keys: &'a [Pltl],
    cur: &'a [usize],
    memo: HashMap<Pltl, Dd>,
}

impl Compiler<'_> {
    /// Current truth of `f` over current propositions and temporal variables.
    fn current(&mut self, m: &mut Manager, f: &Pltl) -> Result<Dd> {
        if let Some(&d) = self.memo.get(f) {
            return Ok(d);
        }
        let n = self.props.len();
        let (keys, cur) = (self.keys, self.cur);
        let temporal_var = |m: &mut Manager, key: &Pltl| -> Result<Dd> {
            let k = keys
                .iter()
                .position(|x| x == key)
                .ok_or_else(|| Error::Eval(format!("no temporal variable for `{key}`")))?;
            Ok(m.var_at(cur[n + k]))
        };
        let d = match f {
            Pltl::True => m.one(),
            Pltl::False => m.zero(),
            Pltl::Atom(a) => {
                let i = self
                    .props
                    .iter()
                    .position(|p| p == a)
                    .ok_or_else(|| Error::UnboundAtom(a.clone()))?;
                m.var_at(self.cur[i])
            }
            Pltl::Not(a) => {
                let x = self.current(m, a)?;
                m.unary(Unary::Not, x)
            }
            Pltl::And(a, b) => {
                let x = self.current(m, a)?;
                let y = self.current(m, b)?;
                m.apply(Op::And, x, y)
            }
            Pltl::Or(a, b) => {
                let x = self.current(m, a)?;
                let y = self.current(m, b)?;
                m.apply(Op::Or, x, y)
            }
            Pltl::Prev(a) => temporal_var(m, a)?,
            Pltl::Since(a, b) => {
                let x = self.current(m, a)?;
                let y = self.current(m, b)?;
                let t = temporal_var(m, f)?;
                let keep = m.apply(Op::And, x, t);
                m.apply(Op::Or, y, keep)
            }
        };
        m.check_budget()?;
        self.memo.insert(f.clone(), d);
        Ok(d)
    }
}

/// Structured translation: adds one temporal variable per purely temporal
/// subformula and compiles dynamics and rewards into diagrams. With
/// `reachability`, also attaches the reachable assignments.
pub fn pltlstr_translate(
    d: &Domain,
    spec: &RewardSpec,
    max_nodes: usize,
    reachability: bool,
) -> Result<FactoredMdp> {
    if spec.dialect != Dialect::Pltl {
        return Err(Error::Config("PLTLSTR needs PLTL rewards".into()));
    }
    if !spec.control.is_empty() {
        return Err(Error::Config("PLTLSTR does not support control knowledge".into()));
    }
    spec.bind(&d.props)?;
    let entries: Vec<(Pltl, f64)> = spec
        .pltl_entries()
        .into_iter()
        .map(|(f, r)| (f.simplify(), r))
        .collect();
    let keys = temporal_keys(&entries);
    if keys.len() > 64 {
        return Err(Error::Config("at most 64 temporal variables are supported".into()));
    }
    let n = d.n();
    let mut names = Vec::new();
    for p in &d.props {
        names.push(p.clone());
        names.push(format!("{p}'"));
    }
    for k in 0..keys.len() {
        names.push(format!("prev:{k}"));
        names.push(format!("prev:{k}'"));
    }
    let total = n + keys.len();
    let cur: Vec<usize> = (0..total).map(|j| 2 * j).collect();
    let next: Vec<usize> = (0..total).map(|j| 2 * j + 1).collect();
    let mut mgr = Manager::new(VarOrder::new(names)?).with_node_limit(max_nodes);
    let mut c = Compiler {
        props: &d.props,
        keys: &keys,
        cur: &cur,
        memo: HashMap::new(),
    };
    let mut temporal_dynamics = Vec::with_capacity(keys.len());
    for key in &keys {
        temporal_dynamics.push(c.current(&mut mgr, key)?);
    }
    let mut reward = mgr.zero();
    for (f, r) in &entries {
        let x = c.current(&mut mgr, f)?;
        let rv = mgr.constant(*r);
        let term = mgr.apply(Op::Times, x, rv);
        reward = mgr.apply(Op::Plus, reward, term);
    }
    let mut actions = Vec::with_capacity(d.actions.len());
    for a in &d.actions {
        let mut cpts: Vec<Dd> = a.effects.iter().map(|t| tree_to_dd(&mut mgr, t, &cur)).collect();
        cpts.extend(temporal_dynamics.iter().copied());
        mgr.check_budget()?;
        actions.push(FactoredAction {
            name: a.name.clone(),
            cpts,
        });
    }
    let mut fm = FactoredMdp {
        mgr,
        props: d.props.clone(),
        temporal: keys,
        cur,
        next,
        actions,
        reward,
        init: d.init,
        reach: None,
        discount: d.discount,
    };
    if reachability {
        fm.attach_reachability()?;
    }
    Ok(fm)
}

/// Explicit expansion of a factored MDP from its start assignment.
pub struct StrGen<'a> {
    fm: &'a FactoredMdp,
}

impl<'a> StrGen<'a> {
    pub fn new(fm: &'a FactoredMdp) -> StrGen<'a> {
        StrGen { fm }
    }
}

impl Generator for StrGen<'_> {
    type Key = (State, u64);

    fn start(&self) -> Result<Self::Key> {
        Ok((self.fm.init, 0))
    }

    fn expand(&self, &(s, t): &Self::Key) -> Result<Expansion<Self::Key>> {
        let succ = (0..self.fm.actions.len())
            .map(|a| self.fm.successors(s, t, a))
            .collect::<Result<_>>()?;
        Ok(Expansion {
            state: s,
            reward: self.fm.reward_at(s, t)?,
            dead: false,
            succ,
        })
    }

    fn action_names(&self) -> Vec<String> {
        self.fm.actions.iter().map(|a| a.name.clone()).collect()
    }

    fn label(&self, &(_, t): &Self::Key) -> String {
        let on: Vec<String> = (0..self.fm.temporal.len())
            .filter(|k| (t >> k) & 1 == 1)
            .map(|k| format!("prv {}", self.fm.temporal[k]))
            .collect();
        format!("{{{}}}", on.join(", "))
    }

    fn width(&self) -> usize {
        self.fm.props.len()
    }
}
