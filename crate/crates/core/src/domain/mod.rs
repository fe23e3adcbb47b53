//! Factored NMRDP dynamics: propositions, per-action per-proposition
//! probability trees, initial state and discount.

mod families;
mod parse;

use std::collections::{HashMap, VecDeque};
use std::fmt;

pub use families::{gen_builtin, Family, GenParams};

use crate::logic::Valuation;
use crate::{Error, Result};

/// Default limit on propositions for explicit state enumeration.
pub const DEFAULT_EXPLICIT_CAP: usize = 20;

/// Total assignment to the propositions, bit `i` for proposition `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State(pub u64);

impl State {
    pub fn get(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize, v: bool) -> State {
        if v {
            State(self.0 | 1 << i)
        } else {
            State(self.0 & !(1 << i))
        }
    }

    /// Bits in proposition order, `1`/`0`.
    pub fn bits(self, width: usize) -> String {
        (0..width).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

/// Probability that a proposition is true after the action, as a decision
/// tree over the current state.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbTree {
    Leaf(f64),
    Test {
        var: usize,
        then: Box<ProbTree>,
        otherwise: Box<ProbTree>,
    },
}

impl ProbTree {
    pub fn test(var: usize, then: ProbTree, otherwise: ProbTree) -> ProbTree {
        ProbTree::Test {
            var,
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    }

    /// The tree that keeps proposition `var` unchanged.
    pub fn persist(var: usize) -> ProbTree {
        ProbTree::test(var, ProbTree::Leaf(1.0), ProbTree::Leaf(0.0))
    }

    pub fn prob(&self, s: State) -> f64 {
        match self {
            ProbTree::Leaf(p) => *p,
            ProbTree::Test {
                var,
                then,
                otherwise,
            } => {
                if s.get(*var) {
                    then.prob(s)
                } else {
                    otherwise.prob(s)
                }
            }
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            ProbTree::Leaf(_) => 0,
            ProbTree::Test {
                then, otherwise, ..
            } => 1 + then.internal_nodes() + otherwise.internal_nodes(),
        }
    }

    fn write(&self, props: &[String], out: &mut String) {
        match self {
            ProbTree::Leaf(p) => out.push_str(&format!("({p})")),
            ProbTree::Test {
                var,
                then,
                otherwise,
            } => {
                out.push_str(&format!("({} ", props[*var]));
                then.write(props, out);
                out.push(' ');
                otherwise.write(props, out);
                out.push(')');
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            ProbTree::Leaf(p) if !(0.0..=1.0).contains(p) => {
                Err(Error::Domain(format!("probability {p} outside [0,1]")))
            }
            ProbTree::Leaf(_) => Ok(()),
            ProbTree::Test {
                var,
                then,
                otherwise,
            } => {
                if *var >= n {
                    return Err(Error::Domain(format!("tree tests unknown proposition {var}")));
                }
                then.validate(n)?;
                otherwise.validate(n)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub name: String,
    /// One tree per proposition, in proposition order.
    pub effects: Vec<ProbTree>,
}

/// Factored dynamics of an NMRDP. Rewards and control are kept separately in
/// a [`crate::logic::RewardSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub props: Vec<String>,
    pub actions: Vec<Action>,
    pub init: State,
    pub discount: f64,
}

impl Domain {
    pub fn new(props: Vec<String>, actions: Vec<Action>, init: State, discount: f64) -> Result<Domain> {
        let d = Domain {
            props,
            actions,
            init,
            discount,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.props.len();
        if n > 64 {
            return Err(Error::Domain("at most 64 propositions are supported".into()));
        }
        let mut seen = HashMap::new();
        for (i, p) in self.props.iter().enumerate() {
            if seen.insert(p.as_str(), i).is_some() {
                return Err(Error::Domain(format!("duplicate proposition `{p}`")));
            }
        }
        let mut names = HashMap::new();
        for a in &self.actions {
            if names.insert(a.name.as_str(), ()).is_some() {
                return Err(Error::Domain(format!("duplicate action `{}`", a.name)));
            }
            if a.effects.len() != n {
                return Err(Error::Domain(format!("action `{}` needs {n} effect trees", a.name)));
            }
            for t in &a.effects {
                t.validate(n)?;
            }
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::Domain(format!(
                "discount must lie strictly between 0 and 1, got {}",
                self.discount
            )));
        }
        if n < 64 && self.init.0 >> n != 0 {
            return Err(Error::Domain("initial state sets undeclared bits".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.props.len()
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|p| p == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    /// Binds a state to proposition names for formula evaluation.
    pub fn view(&self, s: State) -> StateView<'_> {
        StateView { props: &self.props, state: s }
    }

    /// Next-state distribution under action `a`, omitting zero-probability
    /// states, in increasing state order.
    pub fn successors(&self, s: State, a: usize) -> Result<Vec<(State, f64)>> {
        let action = self
            .actions
            .get(a)
            .ok_or_else(|| Error::Config(format!("unknown action index {a}")))?;
        let mut dist: Vec<(State, f64)> = vec![(State(0), 1.0)];
        for (i, tree) in action.effects.iter().enumerate() {
            let p = tree.prob(s);
            let mut next = Vec::with_capacity(dist.len() * 2);
            for &(t, q) in &dist {
                if p > 0.0 {
                    next.push((t.with(i, true), q * p));
                }
                if p < 1.0 {
                    next.push((t, q * (1.0 - p)));
                }
            }
            dist = next;
        }
        dist.sort_by_key(|(t, _)| *t);
        Ok(dist)
    }

    /// Successor states reachable with nonzero probability under some action.
    pub fn any_successors(&self, s: State) -> Vec<State> {
        let mut out: Vec<State> = (0..self.actions.len())
            .flat_map(|a| self.successors(s, a).unwrap_or_default())
            .map(|(t, _)| t)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn enumerate_states(&self, cap: usize) -> Result<Vec<State>> {
        let n = self.n();
        if n > cap {
            return Err(Error::CapExceeded {
                what: "explicit proposition",
                limit: cap,
                count: n,
            });
        }
        Ok((0..1u64 << n).map(State).collect())
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable_states(&self) -> Vec<State> {
        let mut seen = std::collections::HashSet::new();
        let mut order = vec![];
        let mut queue = VecDeque::from([self.init]);
        seen.insert(self.init);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for t in self.any_successors(s) {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        order
    }

    pub fn parse(text: &str) -> Result<Domain> {
        parse::parse_domain(text)
    }

    /// Serializes in the domain file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("variables ({})\n", self.props.join(" "));
        for a in &self.actions {
            out.push_str(&format!("action {}\n", a.name));
            for (i, t) in a.effects.iter().enumerate() {
                out.push_str(&format!("  {} ", self.props[i]));
                t.write(&self.props, &mut out);
                out.push('\n');
            }
            out.push_str("endaction\n");
        }
        out.push_str(&format!("discount {}\n", self.discount));
        let init: Vec<&str> = (0..self.n())
            .filter(|&i| self.init.get(i))
            .map(|i| self.props[i].as_str())
            .collect();
        if !init.is_empty() {
            out.push_str(&format!("init ({})\n", init.join(" ")));
        }
        out
    }

    /// Copy of the domain with extra propositions that no action changes and
    /// that start false.
    pub fn with_inert_props(&self, names: &[&str]) -> Result<Domain> {
        let mut d = self.clone();
        for name in names {
            let i = d.props.len();
            d.props.push(name.to_string());
            for a in &mut d.actions {
                a.effects.push(ProbTree::persist(i));
            }
        }
        d.validate()?;
        Ok(d)
    }

    pub fn with_discount(mut self, discount: f64) -> Result<Domain> {
        self.discount = discount;
        self.validate()?;
        Ok(self)
    }
}

/// A state together with proposition names.
#[derive(Clone, Copy, Debug)]
pub struct StateView<'a> {
    props: &'a [String],
    state: State,
}

impl Valuation for StateView<'_> {
    fn value(&self, atom: &str) -> Option<bool> {
        self.props
            .iter()
            .position(|p| p == atom)
            .map(|i| self.state.get(i))
    }
}

impl fmt::Display for StateView<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on: Vec<&str> = (0..self.props.len())
            .filter(|&i| self.state.get(i))
            .map(|i| self.props[i].as_str())
            .collect();
        write!(f, "{{{}}}", on.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate() {
        let d = gen_builtin(Family::Complete, 1, &GenParams::default()).unwrap();
        assert_eq!(d.enumerate_states(DEFAULT_EXPLICIT_CAP).unwrap().len(), 2);
        let d = gen_builtin(Family::Complete, 3, &GenParams::default()).unwrap();
        assert_eq!(d.enumerate_states(DEFAULT_EXPLICIT_CAP).unwrap().len(), 8);
        let d = gen_builtin(Family::SpuddLinear, 21, &GenParams::default()).unwrap();
        assert!(matches!(
            d.enumerate_states(DEFAULT_EXPLICIT_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn complete_products() {
        let d = gen_builtin(Family::Complete, 2, &GenParams::default()).unwrap();
        let mut probs: Vec<f64> = d.successors(State(0), 0).unwrap().iter().map(|x| x.1).collect();
        probs.sort_by(f64::total_cmp);
        let expected = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0];
        for (p, e) in probs.iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn on_off_turn_on() {
        let params = GenParams {
            success: 0.8,
            ..GenParams::default()
        };
        let d = gen_builtin(Family::OnOff, 2, &params).unwrap();
        let on = d.action_index("turn-on-p1").unwrap();
        let dist = d.successors(State(0b10), on).unwrap();
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[0].0, State(0b10));
        assert!((dist[0].1 - 0.2).abs() < 1e-12);
        assert_eq!(dist[1].0, State(0b11));
        assert!((dist[1].1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn deterministic_action_single_successor() {
        let d = gen_builtin(Family::SpuddLinear, 3, &GenParams::default()).unwrap();
        let dist = d.successors(State(0b101), 1).unwrap();
        assert_eq!(dist, vec![(State(0b110), 1.0)]);
    }

    #[test]
    fn unknown_action() {
        let d = gen_builtin(Family::SpuddLinear, 2, &GenParams::default()).unwrap();
        assert!(d.successors(State(0), 7).is_err());
    }
}
