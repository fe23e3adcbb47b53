use std::collections::HashMap;
use std::fmt;

use super::{normalize_chain, Valuation};
use crate::{Error, Result};

/// A past-time temporal logic formula.
///
/// Derived operators are expanded on construction: "sometime in the past"
/// is `true snc f`, "always in the past" is `~(true snc ~f)`, implication and
/// equivalence become negation/disjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pltl {
    True,
    False,
    Atom(String),
    Not(Box<Pltl>),
    And(Box<Pltl>, Box<Pltl>),
    Or(Box<Pltl>, Box<Pltl>),
    /// Held in the previous state; false when there is none.
    Prev(Box<Pltl>),
    /// `Since(a, b)`: `b` held at some point and `a` has held ever after.
    Since(Box<Pltl>, Box<Pltl>),
}

impl Pltl {
    pub fn atom(name: impl Into<String>) -> Pltl {
        Pltl::Atom(name.into())
    }

    pub fn not(f: Pltl) -> Pltl {
        Pltl::Not(Box::new(f))
    }

    pub fn and(a: Pltl, b: Pltl) -> Pltl {
        Pltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pltl, b: Pltl) -> Pltl {
        Pltl::Or(Box::new(a), Box::new(b))
    }

    pub fn prev(f: Pltl) -> Pltl {
        Pltl::Prev(Box::new(f))
    }

    pub fn since(a: Pltl, b: Pltl) -> Pltl {
        Pltl::Since(Box::new(a), Box::new(b))
    }

    /// `f` held at some point in the past (including now).
    pub fn once(f: Pltl) -> Pltl {
        Pltl::since(Pltl::True, f)
    }

    /// `f` held at every point so far.
    pub fn historically(f: Pltl) -> Pltl {
        Pltl::not(Pltl::once(Pltl::not(f)))
    }

    pub fn prev_n(k: usize, f: Pltl) -> Pltl {
        (0..k).fold(f, |acc, _| Pltl::prev(acc))
    }

    pub fn implies(a: Pltl, b: Pltl) -> Pltl {
        Pltl::or(Pltl::not(a), b)
    }

    pub fn iff(a: Pltl, b: Pltl) -> Pltl {
        Pltl::or(
            Pltl::and(a.clone(), b.clone()),
            Pltl::and(Pltl::not(a), Pltl::not(b)),
        )
    }

    /// Conjunction of a list; `true` when empty.
    pub fn all(items: impl IntoIterator<Item = Pltl>) -> Pltl {
        let mut items: Vec<Pltl> = items.into_iter().collect();
        match items.pop() {
            None => Pltl::True,
            Some(last) => items.into_iter().rev().fold(last, |acc, f| Pltl::and(f, acc)),
        }
    }

    /// Disjunction of a list; `false` when empty.
    pub fn any(items: impl IntoIterator<Item = Pltl>) -> Pltl {
        let mut items: Vec<Pltl> = items.into_iter().collect();
        match items.pop() {
            None => Pltl::False,
            Some(last) => items.into_iter().rev().fold(last, |acc, f| Pltl::or(f, acc)),
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Pltl::Prev(_) | Pltl::Since(..))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Pltl::True | Pltl::False)
    }

    pub fn children(&self) -> Vec<&Pltl> {
        match self {
            Pltl::True | Pltl::False | Pltl::Atom(_) => vec![],
            Pltl::Not(a) | Pltl::Prev(a) => vec![a],
            Pltl::And(a, b) | Pltl::Or(a, b) | Pltl::Since(a, b) => vec![a, b],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Atom names in order of first appearance.
    pub fn atoms(&self) -> Vec<String> {
        fn walk(f: &Pltl, out: &mut Vec<String>) {
            if let Pltl::Atom(a) = f {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            for c in f.children() {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Syntactic simplification: unit and annihilator laws, double negation,
    /// and idempotence. Conjunction and disjunction chains are flattened and
    /// their operands sorted, so the result is a canonical representative of
    /// the formula modulo associativity and commutativity.
    pub fn simplify(&self) -> Pltl {
        match self {
            Pltl::True | Pltl::False | Pltl::Atom(_) => self.clone(),
            Pltl::Not(a) => match a.simplify() {
                Pltl::True => Pltl::False,
                Pltl::False => Pltl::True,
                Pltl::Not(inner) => *inner,
                other => Pltl::not(other),
            },
            Pltl::And(..) => {
                let mut parts = Vec::new();
                self.collect_and(&mut parts);
                match normalize_chain(parts, |f| *f == Pltl::True, |f| *f == Pltl::False) {
                    None => Pltl::False,
                    Some(parts) => Pltl::all(parts),
                }
            }
            Pltl::Or(..) => {
                let mut parts = Vec::new();
                self.collect_or(&mut parts);
                match normalize_chain(parts, |f| *f == Pltl::False, |f| *f == Pltl::True) {
                    None => Pltl::True,
                    Some(parts) => Pltl::any(parts),
                }
            }
            Pltl::Prev(a) => Pltl::prev(a.simplify()),
            Pltl::Since(a, b) => Pltl::since(a.simplify(), b.simplify()),
        }
    }

    fn collect_and(&self, out: &mut Vec<Pltl>) {
        match self {
            Pltl::And(a, b) => {
                a.collect_and(out);
                b.collect_and(out);
            }
            other => match other.simplify() {
                s @ Pltl::And(..) => s.collect_and_simplified(out),
                s => out.push(s),
            },
        }
    }

    fn collect_and_simplified(self, out: &mut Vec<Pltl>) {
        match self {
            Pltl::And(a, b) => {
                a.collect_and_simplified(out);
                b.collect_and_simplified(out);
            }
            other => out.push(other),
        }
    }

    fn collect_or(&self, out: &mut Vec<Pltl>) {
        match self {
            Pltl::Or(a, b) => {
                a.collect_or(out);
                b.collect_or(out);
            }
            other => match other.simplify() {
                s @ Pltl::Or(..) => s.collect_or_simplified(out),
                s => out.push(s),
            },
        }
    }

    fn collect_or_simplified(self, out: &mut Vec<Pltl>) {
        match self {
            Pltl::Or(a, b) => {
                a.collect_or_simplified(out);
                b.collect_or_simplified(out);
            }
            other => out.push(other),
        }
    }

    /// Truth in a single state, for formulae without temporal operators.
    pub fn eval_propositional(&self, v: &dyn Valuation) -> Result<bool> {
        Ok(match self {
            Pltl::True => true,
            Pltl::False => false,
            Pltl::Atom(a) => v.value(a).ok_or_else(|| Error::UnboundAtom(a.clone()))?,
            Pltl::Not(a) => !a.eval_propositional(v)?,
            Pltl::And(a, b) => a.eval_propositional(v)? && b.eval_propositional(v)?,
            Pltl::Or(a, b) => a.eval_propositional(v)? || b.eval_propositional(v)?,
            Pltl::Prev(_) | Pltl::Since(..) => {
                return Err(Error::Eval(format!("temporal subformula `{self}` in state formula")))
            }
        })
    }
}

impl fmt::Display for Pltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pltl::True => write!(f, "true"),
            Pltl::False => write!(f, "false"),
            Pltl::Atom(a) => write!(f, "{a}"),
            Pltl::Not(a) => write!(f, "~{a}"),
            Pltl::And(a, b) => write!(f, "({a} & {b})"),
            Pltl::Or(a, b) => write!(f, "({a} | {b})"),
            Pltl::Prev(a) => write!(f, "prv {a}"),
            Pltl::Since(a, b) => write!(f, "({a} snc {b})"),
        }
    }
}

/// Truth of `phi` at the last index of a nonempty state sequence.
pub fn evaluate_pltl<V: Valuation>(phi: &Pltl, trace: &[V]) -> Result<bool> {
    if trace.is_empty() {
        return Err(Error::Eval("empty state sequence".into()));
    }
    eval_at(phi, trace, trace.len() - 1)
}

fn eval_at<V: Valuation>(phi: &Pltl, trace: &[V], i: usize) -> Result<bool> {
    Ok(match phi {
        Pltl::True => true,
        Pltl::False => false,
        Pltl::Atom(a) => trace[i]
            .value(a)
            .ok_or_else(|| Error::UnboundAtom(a.clone()))?,
        Pltl::Not(a) => !eval_at(a, trace, i)?,
        Pltl::And(a, b) => eval_at(a, trace, i)? && eval_at(b, trace, i)?,
        Pltl::Or(a, b) => eval_at(a, trace, i)? || eval_at(b, trace, i)?,
        Pltl::Prev(a) => i > 0 && eval_at(a, trace, i - 1)?,
        Pltl::Since(a, b) => {
            let mut j = i;
            loop {
                if eval_at(b, trace, j)? {
                    break true;
                }
                if j == 0 || !eval_at(a, trace, j)? {
                    break false;
                }
                j -= 1;
            }
        }
    })
}

/// The subformula closure of a set of formulae, in post-order of first
/// appearance.
#[derive(Clone, Debug, Default)]
pub struct Closure {
    members: Vec<Pltl>,
    index: HashMap<Pltl, usize>,
}

impl Closure {
    pub fn members(&self) -> &[Pltl] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, f: &Pltl) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn contains(&self, f: &Pltl) -> bool {
        self.index.contains_key(f)
    }

    fn insert(&mut self, f: &Pltl) {
        if self.index.contains_key(f) {
            return;
        }
        for c in f.children() {
            self.insert(c);
        }
        self.index.insert(f.clone(), self.members.len());
        self.members.push(f.clone());
    }
}

pub fn subformula_closure<'a>(phis: impl IntoIterator<Item = &'a Pltl>) -> Closure {
    let mut c = Closure::default();
    for f in phis {
        c.insert(f);
    }
    c
}

/// Closure members whose top operator is temporal.
pub fn pure_temporal_subformulas<'a>(phis: impl IntoIterator<Item = &'a Pltl>) -> Vec<Pltl> {
    subformula_closure(phis)
        .members
        .into_iter()
        .filter(Pltl::is_temporal)
        .collect()
}

/// What must have held on the prefix for `phi` to hold after moving to a
/// state with valuation `v`. The result is simplified.
pub fn regress(phi: &Pltl, v: &dyn Valuation) -> Result<Pltl> {
    Ok(regress_raw(phi, v)?.simplify())
}

fn regress_raw(phi: &Pltl, v: &dyn Valuation) -> Result<Pltl> {
    Ok(match phi {
        Pltl::True | Pltl::False => phi.clone(),
        Pltl::Atom(a) => {
            if v.value(a).ok_or_else(|| Error::UnboundAtom(a.clone()))? {
                Pltl::True
            } else {
                Pltl::False
            }
        }
        Pltl::Not(a) => Pltl::not(regress_raw(a, v)?),
        Pltl::And(a, b) => Pltl::and(regress_raw(a, v)?, regress_raw(b, v)?),
        Pltl::Or(a, b) => Pltl::or(regress_raw(a, v)?, regress_raw(b, v)?),
        Pltl::Prev(a) => (**a).clone(),
        Pltl::Since(a, b) => Pltl::or(
            regress_raw(b, v)?,
            Pltl::and(regress_raw(a, v)?, phi.clone()),
        ),
    })
}

/// A total truth assignment over a fixed list of formulae.
#[derive(Clone, Debug)]
pub struct LiteralSet {
    truth: HashMap<Pltl, bool>,
}

impl LiteralSet {
    pub fn new(members: &[Pltl], truth: &[bool]) -> LiteralSet {
        assert_eq!(members.len(), truth.len());
        LiteralSet {
            truth: members.iter().cloned().zip(truth.iter().copied()).collect(),
        }
    }

    /// The assignment that makes exactly the members true on `trace`.
    pub fn from_trace<V: Valuation>(members: &[Pltl], trace: &[V]) -> Result<LiteralSet> {
        let truth = members
            .iter()
            .map(|m| evaluate_pltl(m, trace))
            .collect::<Result<Vec<_>>>()?;
        Ok(LiteralSet::new(members, &truth))
    }

    pub fn get(&self, f: &Pltl) -> Option<bool> {
        self.truth.get(f).copied()
    }
}

/// Evaluates `phi` against a label: members of the label are read directly,
/// boolean connectives are computed.
pub fn entails(psi: &LiteralSet, phi: &Pltl) -> Result<bool> {
    if let Some(v) = psi.get(phi) {
        return Ok(v);
    }
    Ok(match phi {
        Pltl::True => true,
        Pltl::False => false,
        Pltl::Not(a) => !entails(psi, a)?,
        Pltl::And(a, b) => entails(psi, a)? && entails(psi, b)?,
        Pltl::Or(a, b) => entails(psi, a)? || entails(psi, b)?,
        Pltl::Atom(_) | Pltl::Prev(_) | Pltl::Since(..) => {
            return Err(Error::Eval(format!("`{phi}` is not assigned by the label")))
        }
    })
}
