use super::{Expansion, Generator};
use crate::domain::{Domain, State};
use crate::logic::{entails, regress, subformula_closure, Closure, Dialect, LiteralSet, Pltl, RewardSpec};
use crate::{Error, Result};

/// How a closure member's truth at the new step follows from the new state,
/// already computed members, and the previous label.
#[derive(Clone, Copy, Debug)]
enum Step {
    True,
    False,
    Atom(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Prev(usize),
    Since(usize, usize),
}

/// E-states labelled with the truth of every subformula of the rewards.
pub struct PltlSimGen<'a> {
    d: &'a Domain,
    closure: Closure,
    steps: Vec<Step>,
    rewards: Vec<(usize, f64)>,
    control: Vec<usize>,
}

impl<'a> PltlSimGen<'a> {
    pub fn new(d: &'a Domain, spec: &RewardSpec) -> Result<PltlSimGen<'a>> {
        if spec.dialect != Dialect::Pltl {
            return Err(Error::Config("PLTLSIM needs PLTL rewards".into()));
        }
        spec.bind(&d.props)?;
        let entries: Vec<(Pltl, f64)> = spec
            .pltl_entries()
            .into_iter()
            .map(|(f, r)| (f.simplify(), r))
            .collect();
        let control: Vec<Pltl> = spec.pltl_control().iter().map(Pltl::simplify).collect();
        let closure = subformula_closure(entries.iter().map(|(f, _)| f).chain(&control));
        let idx = |f: &Pltl| closure.index_of(f).expect("closure member");
        let mut steps: Vec<Step> = Vec::with_capacity(closure.len());
        for (k, m) in closure.members().iter().enumerate() {
            let step = match m {
                Pltl::True => Step::True,
                Pltl::False => Step::False,
                Pltl::Atom(a) => Step::Atom(d.prop_index(a).ok_or_else(|| Error::UnboundAtom(a.clone()))?),
                Pltl::Not(a) => Step::Not(idx(a)),
                Pltl::And(a, b) => Step::And(idx(a), idx(b)),
                Pltl::Or(a, b) => Step::Or(idx(a), idx(b)),
                Pltl::Prev(a) => Step::Prev(idx(a)),
                Pltl::Since(a, b) => Step::Since(idx(a), idx(b)),
            };
            let uses_later = match step {
                Step::Not(i) | Step::Prev(i) => i >= k,
                Step::And(i, j) | Step::Or(i, j) | Step::Since(i, j) => i >= k || j >= k,
                _ => false,
            };
            debug_assert!(!uses_later, "closure is not in post-order");
            steps.push(step);
        }
        let rewards = entries.iter().map(|(f, r)| (idx(f), *r)).collect();
        let control = control.iter().map(idx).collect();
        Ok(PltlSimGen {
            d,
            closure,
            steps,
            rewards,
            control,
        })
    }

    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    /// Label after moving to `s`, given the previous label (none at the
    /// start of the sequence).
    pub fn step(&self, old: Option<&[bool]>, s: State) -> Vec<bool> {
        let mut new: Vec<bool> = Vec::with_capacity(self.steps.len());
        for (k, step) in self.steps.iter().enumerate() {
            let v = match *step {
                Step::True => true,
                Step::False => false,
                Step::Atom(p) => s.get(p),
                Step::Not(i) => !new[i],
                Step::And(i, j) => new[i] && new[j],
                Step::Or(i, j) => new[i] || new[j],
                Step::Prev(i) => old.is_some_and(|o| o[i]),
                Step::Since(i, j) => new[j] || (new[i] && old.is_some_and(|o| o[k])),
            };
            new.push(v);
        }
        new
    }

    /// The successor label computed literally as the members whose
    /// regression through `s` is entailed by `old`.
    pub fn step_by_regression(&self, old: &[bool], s: State) -> Result<Vec<bool>> {
        let psi = LiteralSet::new(self.closure.members(), old);
        let view = self.d.view(s);
        self.closure
            .members()
            .iter()
            .map(|m| entails(&psi, &regress(m, &view)?))
            .collect()
    }
}

impl Generator for PltlSimGen<'_> {
    type Key = (State, Vec<bool>);

    fn start(&self) -> Result<Self::Key> {
        Ok((self.d.init, self.step(None, self.d.init)))
    }

    fn expand(&self, (s, psi): &Self::Key) -> Result<Expansion<Self::Key>> {
        let reward = self.rewards.iter().filter(|(i, _)| psi[*i]).map(|(_, r)| r).sum();
        let dead = self.control.iter().any(|&i| !psi[i]);
        let mut succ = Vec::with_capacity(self.d.actions.len());
        if !dead {
            for a in 0..self.d.actions.len() {
                let dist = self.d.successors(*s, a)?;
                succ.push(
                    dist.into_iter()
                        .map(|(t, p)| ((t, self.step(Some(psi), t)), p))
                        .collect(),
                );
            }
        }
        Ok(Expansion {
            state: *s,
            reward,
            dead,
            succ,
        })
    }

    fn action_names(&self) -> Vec<String> {
        self.d.actions.iter().map(|a| a.name.clone()).collect()
    }

    fn label(&self, (_, psi): &Self::Key) -> String {
        let on: Vec<String> = self
            .closure
            .members()
            .iter()
            .zip(psi)
            .filter(|(_, &v)| v)
            .map(|(m, _)| m.to_string())
            .collect();
        format!("{{{}}}", on.join(", "))
    }

    fn width(&self) -> usize {
        self.d.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gen_builtin, Family, GenParams};
    use crate::logic::parse_pltl;
    use crate::translate::explore;

    fn flip() -> Domain {
        Domain::parse("variables (g)\naction flip\n g (g (0.0) (1.0))\nendaction\naction stay\n g (g (1.0) (0.0))\nendaction\ndiscount 0.9").unwrap()
    }

    #[test]
    fn constant_reward_is_isomorphic() {
        let d = gen_builtin(Family::Complete, 3, &GenParams::default()).unwrap();
        let spec = RewardSpec::pltl([(Pltl::True, 1.0)]);
        let m = explore(&PltlSimGen::new(&d, &spec).unwrap(), 1000).unwrap();
        assert_eq!(m.len(), 8);
        assert!(m.rewards.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn first_time_g_needs_one_bit() {
        let d = flip();
        let spec = RewardSpec::pltl([(parse_pltl("g & ~prv pdi g").unwrap(), 1.0)]);
        let m = explore(&PltlSimGen::new(&d, &spec).unwrap(), 1000).unwrap();
        for s in [State(0), State(1)] {
            assert!(m.states.iter().filter(|&&t| t == s).count() <= 2);
        }
    }

    #[test]
    fn two_step_history() {
        let d = flip();
        let spec = RewardSpec::pltl([(parse_pltl("prv^2 true").unwrap(), 1.0)]);
        let m = explore(&PltlSimGen::new(&d, &spec).unwrap(), 1000).unwrap();
        // stage 0, stage 1, stage >= 2 per state; stage 0 only at the start.
        assert_eq!(m.len(), 1 + 2 + 2);
    }

    #[test]
    fn step_matches_regression() {
        let d = gen_builtin(Family::SpuddLinear, 3, &GenParams::default()).unwrap();
        for text in ["p1 snc (p2 & ~prv p3)", "p3 & ~prv pdi p3", "prv^2 p1 | pbx p2"] {
            let spec = RewardSpec::pltl([(parse_pltl(text).unwrap(), 1.0)]);
            let g = PltlSimGen::new(&d, &spec).unwrap();
            let m = explore(&g, 10_000).unwrap();
            for e in 0..m.len() {
                let (s, psi) = (m.states[e], label_bits(&g, &m.labels[e]));
                for t in d.any_successors(s) {
                    assert_eq!(g.step(Some(&psi), t), g.step_by_regression(&psi, t).unwrap());
                }
            }
        }
    }

    fn label_bits(g: &PltlSimGen, label: &str) -> Vec<bool> {
        let inner = &label[1..label.len() - 1];
        let on: Vec<&str> = if inner.is_empty() { vec![] } else { inner.split(", ").collect() };
        g.closure()
            .members()
            .iter()
            .map(|m| on.contains(&m.to_string().as_str()))
            .collect()
    }
}
