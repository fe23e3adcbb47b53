//! Reduced ordered decision diagrams with real-valued terminals.
//!
//! A [`Manager`] owns a hash-consed node arena over a fixed [`VarOrder`].
//! Boolean functions are diagrams with terminals 0 and 1. Because nodes are
//! unique and reduced, two diagrams denote the same function exactly when
//! their [`Dd`] handles are equal.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::{Error, Result};

/// Handle to a node inside a [`Manager`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dd(u32);

impl Dd {
    pub fn id(self) -> u32 {
        self.0
    }
}

const TERMINAL: u32 = u32::MAX;

/// Variable names, root-most first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VarOrder {
    names: Vec<String>,
}

impl VarOrder {
    pub fn new(names: Vec<String>) -> Result<VarOrder> {
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::Config(format!("duplicate diagram variable `{n}`")));
            }
        }
        Ok(VarOrder { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Binary pointwise operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Plus,
    Minus,
    Times,
    Max,
    Min,
    /// Logical conjunction, reading nonzero as true.
    And,
    /// Logical disjunction, reading nonzero as true.
    Or,
    /// 1 where the left operand is strictly greater, else 0.
    Greater,
}

impl Op {
    fn eval(self, a: f64, b: f64) -> f64 {
        let t = |x: bool| if x { 1.0 } else { 0.0 };
        match self {
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

    fn commutative(self) -> bool {
        !matches!(self, Op::Minus | Op::Greater)
    }
}

/// Unary pointwise operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unary {
    Not,
    NonZero,
    Abs,
    Negate,
}

impl Unary {
    fn eval(self, a: f64) -> f64 {
        match self {
            Unary::Not => if a == 0.0 { 1.0 } else { 0.0 },
            Unary::NonZero => if a != 0.0 { 1.0 } else { 0.0 },
            Unary::Abs => a.abs(),
            Unary::Negate => -a,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    var: u32,
    lo: Dd,
    hi: Dd,
    value: f64,
}

pub struct Manager {
    order: VarOrder,
    nodes: Vec<Node>,
    unique: HashMap<(u32, Dd, Dd), Dd>,
    terminals: HashMap<u64, Dd>,
    apply_cache: HashMap<(Op, Dd, Dd), Dd>,
    unary_cache: HashMap<(Unary, Dd), Dd>,
    node_limit: usize,
}

impl Manager {
    pub fn new(order: VarOrder) -> Manager {
        Manager {
            order,
            nodes: Vec::new(),
            unique: HashMap::new(),
            terminals: HashMap::new(),
            apply_cache: HashMap::new(),
            unary_cache: HashMap::new(),
            node_limit: usize::MAX,
        }
    }

    pub fn with_node_limit(mut self, limit: usize) -> Manager {
        self.node_limit = limit;
        self
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    pub fn num_vars(&self) -> usize {
        self.order.len()
    }

    /// Nodes allocated so far, live or not.
    pub fn allocated(&self) -> usize {
        self.nodes.len()
    }

    /// Fails once the arena has grown past the node limit.
    pub fn check_budget(&self) -> Result<()> {
        if self.nodes.len() > self.node_limit {
            return Err(Error::CapExceeded {
                what: "diagram node",
                limit: self.node_limit,
                count: self.nodes.len(),
            });
        }
        Ok(())
    }

    /// Drops the operation caches. Nodes are kept.
    pub fn clear_cache(&mut self) {
        self.apply_cache.clear();
        self.unary_cache.clear();
    }

    pub fn constant(&mut self, v: f64) -> Dd {
        assert!(!v.is_nan(), "NaN terminal");
        let v = if v == 0.0 { 0.0 } else { v };
        if let Some(&d) = self.terminals.get(&v.to_bits()) {
            return d;
        }
        let d = Dd(self.nodes.len() as u32);
        self.nodes.push(Node {
            var: TERMINAL,
            lo: d,
            hi: d,
            value: v,
        });
        self.terminals.insert(v.to_bits(), d);
        d
    }

    pub fn zero(&mut self) -> Dd {
        self.constant(0.0)
    }

    pub fn one(&mut self) -> Dd {
        self.constant(1.0)
    }

    /// Indicator of a variable given by position in the order.
    pub fn var_at(&mut self, i: usize) -> Dd {
        assert!(i < self.order.len(), "variable index out of range");
        let lo = self.zero();
        let hi = self.one();
        self.mk(i as u32, lo, hi)
    }

    pub fn var(&mut self, name: &str) -> Result<Dd> {
        let i = self
            .order
            .index(name)
            .ok_or_else(|| Error::Config(format!("unknown diagram variable `{name}`")))?;
        Ok(self.var_at(i))
    }

    fn mk(&mut self, var: u32, lo: Dd, hi: Dd) -> Dd {
        if lo == hi {
            return lo;
        }
        if let Some(&d) = self.unique.get(&(var, lo, hi)) {
            return d;
        }
        let d = Dd(self.nodes.len() as u32);
        self.nodes.push(Node { var, lo, hi, value: 0.0 });
        self.unique.insert((var, lo, hi), d);
        d
    }

    pub fn is_terminal(&self, f: Dd) -> bool {
        self.nodes[f.0 as usize].var == TERMINAL
    }

    /// Terminal value, if `f` is a terminal.
    pub fn value(&self, f: Dd) -> Option<f64> {
        let n = &self.nodes[f.0 as usize];
        (n.var == TERMINAL).then_some(n.value)
    }

    /// Variable tested at the root, if any.
    pub fn top_var(&self, f: Dd) -> Option<usize> {
        let n = &self.nodes[f.0 as usize];
        (n.var != TERMINAL).then_some(n.var as usize)
    }

    /// Low (variable false) and high (variable true) children.
    pub fn children(&self, f: Dd) -> Option<(Dd, Dd)> {
        let n = &self.nodes[f.0 as usize];
        (n.var != TERMINAL).then_some((n.lo, n.hi))
    }

    fn level(&self, f: Dd) -> u32 {
        self.nodes[f.0 as usize].var
    }

    fn cofactors(&self, f: Dd, var: u32) -> (Dd, Dd) {
        let n = self.nodes[f.0 as usize];
        if n.var == var {
            (n.lo, n.hi)
        } else {
            (f, f)
        }
    }

    pub fn apply(&mut self, op: Op, f: Dd, g: Dd) -> Dd {
        let (f, g) = if op.commutative() && g < f { (g, f) } else { (f, g) };
        if let (Some(a), Some(b)) = (self.value(f), self.value(g)) {
            return self.constant(op.eval(a, b));
        }
        if let Some(d) = self.shortcut(op, f, g) {
            return d;
        }
        if let Some(&d) = self.apply_cache.get(&(op, f, g)) {
            return d;
        }
        let var = self.level(f).min(self.level(g));
        let (f0, f1) = self.cofactors(f, var);
        let (g0, g1) = self.cofactors(g, var);
        let lo = self.apply(op, f0, g0);
        let hi = self.apply(op, f1, g1);
        let d = self.mk(var, lo, hi);
        self.apply_cache.insert((op, f, g), d);
        d
    }

    fn shortcut(&mut self, op: Op, f: Dd, g: Dd) -> Option<Dd> {
        let fv = self.value(f);
        let gv = self.value(g);
        match op {
            Op::Times => {
                if fv == Some(0.0) || gv == Some(0.0) {
                    return Some(self.zero());
                }
                if fv == Some(1.0) {
                    return Some(g);
                }
                if gv == Some(1.0) {
                    return Some(f);
                }
            }
            Op::Plus => {
                if fv == Some(0.0) {
                    return Some(g);
                }
                if gv == Some(0.0) {
                    return Some(f);
                }
            }
            Op::Minus if gv == Some(0.0) => return Some(f),
            Op::Max | Op::Min if f == g => return Some(f),
            _ => {}
        }
        None
    }

    pub fn unary(&mut self, op: Unary, f: Dd) -> Dd {
        if let Some(a) = self.value(f) {
            return self.constant(op.eval(a));
        }
        if let Some(&d) = self.unary_cache.get(&(op, f)) {
            return d;
        }
        let n = self.nodes[f.0 as usize];
        let lo = self.unary(op, n.lo);
        let hi = self.unary(op, n.hi);
        let d = self.mk(n.var, lo, hi);
        self.unary_cache.insert((op, f), d);
        d
    }

    /// `cond ? then : otherwise` for a 0/1 condition.
    pub fn ite(&mut self, cond: Dd, then: Dd, otherwise: Dd) -> Dd {
        let a = self.apply(Op::Times, cond, then);
        let not = self.unary(Unary::Not, cond);
        let b = self.apply(Op::Times, not, otherwise);
        self.apply(Op::Plus, a, b)
    }

    /// Shannon cofactor of `f` with variable `var` fixed to `val`.
    pub fn restrict(&mut self, f: Dd, var: usize, val: bool) -> Dd {
        let mut memo = HashMap::new();
        self.restrict_rec(f, var as u32, val, &mut memo)
    }

    pub fn restrict_named(&mut self, f: Dd, name: &str, val: bool) -> Result<Dd> {
        let i = self
            .order
            .index(name)
            .ok_or_else(|| Error::Config(format!("unknown diagram variable `{name}`")))?;
        Ok(self.restrict(f, i, val))
    }

    fn restrict_rec(&mut self, f: Dd, var: u32, val: bool, memo: &mut HashMap<Dd, Dd>) -> Dd {
        let n = self.nodes[f.0 as usize];
        if n.var == TERMINAL || n.var > var {
            return f;
        }
        if n.var == var {
            return if val { n.hi } else { n.lo };
        }
        if let Some(&d) = memo.get(&f) {
            return d;
        }
        let lo = self.restrict_rec(n.lo, var, val, memo);
        let hi = self.restrict_rec(n.hi, var, val, memo);
        let d = self.mk(n.var, lo, hi);
        memo.insert(f, d);
        d
    }

    fn marginalize(&mut self, op: Op, f: Dd, vars: &[usize]) -> Dd {
        let mut vars = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut acc = f;
        for &v in vars.iter().rev() {
            let hi = self.restrict(acc, v, true);
            let lo = self.restrict(acc, v, false);
            acc = self.apply(op, hi, lo);
        }
        acc
    }

    /// Sums `f` over all assignments to `vars`.
    pub fn sum_over(&mut self, f: Dd, vars: &[usize]) -> Dd {
        self.marginalize(Op::Plus, f, vars)
    }

    /// Maximizes `f` over all assignments to `vars`.
    pub fn max_over(&mut self, f: Dd, vars: &[usize]) -> Dd {
        self.marginalize(Op::Max, f, vars)
    }

    /// Value of `f` under a total assignment indexed by variable position.
    pub fn evaluate(&self, f: Dd, assignment: &[bool]) -> Result<f64> {
        if assignment.len() != self.order.len() {
            return Err(Error::Eval(format!(
                "partial assignment: {} of {} variables",
                assignment.len(),
                self.order.len()
            )));
        }
        let mut cur = f;
        loop {
            let n = &self.nodes[cur.0 as usize];
            if n.var == TERMINAL {
                return Ok(n.value);
            }
            cur = if assignment[n.var as usize] { n.hi } else { n.lo };
        }
    }

    /// Renames variables by `map` (from position to position). The map need
    /// not preserve the order.
    pub fn rename(&mut self, f: Dd, map: &HashMap<usize, usize>) -> Dd {
        let mut memo = HashMap::new();
        self.rename_rec(f, map, &mut memo)
    }

    fn rename_rec(&mut self, f: Dd, map: &HashMap<usize, usize>, memo: &mut HashMap<Dd, Dd>) -> Dd {
        let n = self.nodes[f.0 as usize];
        if n.var == TERMINAL {
            return f;
        }
        if let Some(&d) = memo.get(&f) {
            return d;
        }
        let lo = self.rename_rec(n.lo, map, memo);
        let hi = self.rename_rec(n.hi, map, memo);
        let v = map.get(&(n.var as usize)).copied().unwrap_or(n.var as usize);
        let x = self.var_at(v);
        let d = self.ite(x, hi, lo);
        memo.insert(f, d);
        d
    }

    fn reachable_nodes(&self, roots: &[Dd]) -> Vec<Dd> {
        let mut seen = HashSet::new();
        let mut stack: Vec<Dd> = roots.to_vec();
        let mut out = Vec::new();
        while let Some(d) = stack.pop() {
            if !seen.insert(d) {
                continue;
            }
            out.push(d);
            let n = &self.nodes[d.0 as usize];
            if n.var != TERMINAL {
                stack.push(n.lo);
                stack.push(n.hi);
            }
        }
        out.sort();
        out
    }

    /// Nodes reachable from `f`, terminals included.
    pub fn node_count(&self, f: Dd) -> usize {
        self.reachable_nodes(&[f]).len()
    }

    /// Nodes reachable from any of `roots`, shared nodes counted once.
    pub fn shared_node_count(&self, roots: &[Dd]) -> usize {
        self.reachable_nodes(roots).len()
    }

    pub fn leaf_values(&self, f: Dd) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .reachable_nodes(&[f])
            .into_iter()
            .filter_map(|d| self.value(d))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn max_value(&self, f: Dd) -> f64 {
        self.leaf_values(f).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self, f: Dd) -> f64 {
        self.leaf_values(f).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Variables tested somewhere in `f`, in order.
    pub fn support(&self, f: Dd) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .reachable_nodes(&[f])
            .into_iter()
            .filter_map(|d| self.top_var(d))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Structural audit: every reachable internal node has distinct
    /// children, tests a variable above its children, and is the only node
    /// with its (variable, low, high) triple.
    pub fn is_reduced(&self, f: Dd) -> bool {
        let mut triples = HashSet::new();
        let mut values = HashSet::new();
        for d in self.reachable_nodes(&[f]) {
            let n = &self.nodes[d.0 as usize];
            if n.var == TERMINAL {
                if !values.insert(n.value.to_bits()) {
                    return false;
                }
                continue;
            }
            if n.lo == n.hi || !triples.insert((n.var, n.lo, n.hi)) {
                return false;
            }
            if self.level(n.lo) <= n.var || self.level(n.hi) <= n.var {
                return false;
            }
        }
        true
    }

    /// Least fixpoint of forward images: starting from `start` (a 0/1
    /// function over the `current` variables), repeatedly adds the image
    /// under every relation. Each relation is a 0/1 function over `current`
    /// and `next` variables; `next[i]` is the successor copy of `current[i]`.
    pub fn reachable(&mut self, start: Dd, relations: &[Dd], current: &[usize], next: &[usize]) -> Result<Dd> {
        let back: HashMap<usize, usize> = next.iter().copied().zip(current.iter().copied()).collect();
        let mut reached = start;
        loop {
            let mut grown = reached;
            for &rel in relations {
                let conj = self.apply(Op::And, reached, rel);
                let img_next = self.max_over(conj, current);
                let img = self.rename(img_next, &back);
                grown = self.apply(Op::Or, grown, img);
                self.check_budget()?;
            }
            if grown == reached {
                return Ok(reached);
            }
            reached = grown;
        }
    }

    /// Graphviz rendering of `f`.
    pub fn to_dot(&self, f: Dd) -> String {
        let mut out = String::from("digraph dd {\n");
        for d in self.reachable_nodes(&[f]) {
            let n = &self.nodes[d.0 as usize];
            if n.var == TERMINAL {
                let _ = writeln!(out, "  n{} [shape=box,label=\"{}\"];", d.0, n.value);
            } else {
                let _ = writeln!(out, "  n{} [label=\"{}\"];", d.0, self.order.name(n.var as usize));
                let _ = writeln!(out, "  n{} -> n{} [style=dashed];", d.0, n.lo.0);
                let _ = writeln!(out, "  n{} -> n{};", d.0, n.hi.0);
            }
        }
        out.push_str("}\n");
        out
    }
}
