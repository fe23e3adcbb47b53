use std::fmt;

use crate::domain::{Domain, State};
use crate::logic::{evaluate_pltl, progress, Dialect, Fltl, RewardSpec};
use crate::xmdp::Xmdp;
use crate::Result;

const TOL: f64 = 1e-9;

/// First violation found by [`check_equivalence`].
#[derive(Clone, Debug, PartialEq)]
pub struct EquivFailure {
    /// Which of the four conditions failed (1 to 4).
    pub item: u8,
    /// State sequence leading to the failure (empty for structural items).
    pub trace: Vec<State>,
    pub detail: String,
}

impl fmt::Display for EquivFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "item {}: {}", self.item, self.detail)?;
        if !self.trace.is_empty() {
            let t: Vec<String> = self.trace.iter().map(|s| format!("{:b}", s.0)).collect();
            write!(f, " along <{}>", t.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivReport {
    /// Trace prefixes whose rewards were compared.
    pub prefixes: usize,
    pub failure: Option<EquivFailure>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn fail(item: u8, trace: Vec<State>, detail: String) -> Result<EquivReport> {
    Ok(EquivReport {
        prefixes: 0,
        failure: Some(EquivFailure { item, trace, detail }),
    })
}

/// Checks that `m` is equivalent to `d` under `spec`: the start maps to the
/// initial state, every e-state offers the domain's actions, every domain
/// transition lifts to exactly one successor with the same probability, and
/// along every feasible sequence of at most `horizon` states the e-state
/// rewards equal the trace-semantics rewards. Control knowledge is ignored.
pub fn check_equivalence(d: &Domain, spec: &RewardSpec, m: &Xmdp, horizon: usize) -> Result<EquivReport> {
    spec.bind(&d.props)?;
    if m.states[m.start] != d.init {
        return fail(1, vec![], format!("start e-state maps to {:?}", m.states[m.start]));
    }
    if m.num_actions() != d.actions.len() {
        return fail(2, vec![], "action sets differ".into());
    }
    for e in 0..m.len() {
        let s = m.states[e];
        for a in 0..d.actions.len() {
            let dist = &m.trans[e][a];
            let expected = d.successors(s, a)?;
            if dist.is_empty() && !expected.is_empty() {
                return fail(2, vec![], format!("e-state {e} lacks action {}", d.actions[a].name));
            }
            let mut lifted: Vec<(State, f64)> = dist.iter().map(|&(f, p)| (m.states[f], p)).collect();
            lifted.sort_by_key(|(t, _)| *t);
            if lifted.windows(2).any(|w| w[0].0 == w[1].0) {
                return fail(3, vec![], format!("e-state {e} action {a} has two successors for one state"));
            }
            let same = lifted.len() == expected.len()
                && lifted
                    .iter()
                    .zip(&expected)
                    .all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= TOL);
            if !same {
                return fail(3, vec![], format!("e-state {e} action {a} distribution differs"));
            }
        }
    }
    let mut prefixes = 0;
    let slots: Vec<Fltl> = spec.fltl_entries().into_iter().map(|(f, _)| f).collect();
    let mut stack = vec![(vec![d.init], m.start, slots)];
    while let Some((trace, e, slots)) = stack.pop() {
        prefixes += 1;
        let s = *trace.last().expect("nonempty");
        let (expected, next_slots) = match spec.dialect {
            Dialect::Pltl => {
                let views: Vec<_> = trace.iter().map(|&t| d.view(t)).collect();
                let mut total = 0.0;
                for (f, r) in spec.pltl_entries() {
                    if evaluate_pltl(&f, &views)? {
                        total += r;
                    }
                }
                (total, slots)
            }
            Dialect::Fltl => {
                let mut total = 0.0;
                let mut next = Vec::with_capacity(slots.len());
                for (f, (_, r)) in slots.iter().zip(spec.fltl_entries()) {
                    let (g, rewarded) = progress(f, &d.view(s))?;
                    if rewarded {
                        total += r;
                    }
                    next.push(g);
                }
                (total, next)
            }
        };
        if (m.rewards[e] - expected).abs() > TOL {
            return Ok(EquivReport {
                prefixes,
                failure: Some(EquivFailure {
                    item: 4,
                    detail: format!("e-state {e} has reward {} but the sequence earns {expected}", m.rewards[e]),
                    trace,
                }),
            });
        }
        if trace.len() >= horizon {
            continue;
        }
        let mut lifted: Vec<(State, usize)> = Vec::new();
        for a in 0..d.actions.len() {
            for (t, _) in d.successors(s, a)? {
                let f = m.successor(e, a, t).expect("checked by item 3");
                if !lifted.contains(&(t, f)) {
                    lifted.push((t, f));
                }
            }
        }
        for (t, f) in lifted {
            let mut longer = trace.clone();
            longer.push(t);
            stack.push((longer, f, next_slots.clone()));
        }
    }
    Ok(EquivReport {
        prefixes,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gen_builtin, Family, GenParams};
    use crate::logic::parse_pltl;
    use crate::translate::{explore, PltlSimGen};

    #[test]
    fn markovian_identity_passes() {
        let d = gen_builtin(Family::OnOff, 2, &GenParams::default()).unwrap();
        let spec = RewardSpec::pltl([(parse_pltl("p1").unwrap(), 1.0)]);
        let m = explore(&PltlSimGen::new(&d, &spec).unwrap(), 1000).unwrap();
        assert_eq!(m.len(), 4);
        assert!(check_equivalence(&d, &spec, &m, 6).unwrap().passed());
    }

    #[test]
    fn flipped_reward_is_caught() {
        let d = gen_builtin(Family::SpuddLinear, 3, &GenParams::default()).unwrap();
        let spec = RewardSpec::pltl([(parse_pltl("p3 & ~prv pdi p3").unwrap(), 1.0)]);
        let mut m = explore(&PltlSimGen::new(&d, &spec).unwrap(), 1000).unwrap();
        assert!(check_equivalence(&d, &spec, &m, 6).unwrap().passed());
        let e = m.rewards.iter().position(|&r| r == 1.0).unwrap();
        m.rewards[e] = 0.0;
        let report = check_equivalence(&d, &spec, &m, 6).unwrap();
        let failure = report.failure.unwrap();
        assert_eq!(failure.item, 4);
        assert!(!failure.trace.is_empty());
    }
}
