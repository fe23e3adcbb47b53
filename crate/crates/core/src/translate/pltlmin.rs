use std::collections::{HashMap, HashSet};

use super::{Expansion, Generator};
use crate::domain::{Domain, State};
use crate::logic::{evaluate_pltl, regress, Dialect, Pltl, RewardSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reg {
    Const(bool),
    Id(u32),
}

/// Per-state sets of formulae worth tracking: the least solution of
/// l(s) = Φ ∪ { Reg(ψ, t) | ψ ∈ l(t), t a successor of s }.
#[derive(Clone, Debug)]
pub struct LabelMap {
    formulas: Vec<Pltl>,
    ids: HashMap<Pltl, u32>,
    labels: HashMap<State, Vec<u32>>,
    reg: HashMap<(State, u32), Reg>,
    /// Worklist items processed.
    pub steps: usize,
}

impl LabelMap {
    fn intern(&mut self, f: Pltl) -> u32 {
        if let Some(&i) = self.ids.get(&f) {
            return i;
        }
        let i = self.formulas.len() as u32;
        self.formulas.push(f.clone());
        self.ids.insert(f, i);
        i
    }

    /// Formulae tracked at `s`, in interning order.
    pub fn label(&self, s: State) -> Vec<&Pltl> {
        self.labels
            .get(&s)
            .map(|ids| ids.iter().map(|&i| &self.formulas[i as usize]).collect())
            .unwrap_or_default()
    }

    pub fn distinct_formulas(&self) -> usize {
        self.formulas.len()
    }

    fn ids_at(&self, s: State) -> &[u32] {
        self.labels.get(&s).map(Vec::as_slice).unwrap_or(&[])
    }

    fn position(&self, s: State, id: u32) -> Option<usize> {
        self.ids_at(s).binary_search(&id).ok()
    }
}

fn classify(f: Pltl) -> std::result::Result<bool, Pltl> {
    match f {
        Pltl::True => Ok(true),
        Pltl::False => Ok(false),
        other => Err(other),
    }
}

/// Computes the label map over all states of `d`. Constants are not stored;
/// regressions are kept in simplified form.
pub fn pltlmin_preprocess(d: &Domain, spec: &RewardSpec, explicit_cap: usize) -> Result<LabelMap> {
    if spec.dialect != Dialect::Pltl {
        return Err(Error::Config("PLTLMIN needs PLTL rewards".into()));
    }
    spec.bind(&d.props)?;
    let states = d.enumerate_states(explicit_cap)?;
    let mut pred: HashMap<State, Vec<State>> = HashMap::new();
    for &s in &states {
        for t in d.any_successors(s) {
            pred.entry(t).or_default().push(s);
        }
    }
    let mut l = LabelMap {
        formulas: Vec::new(),
        ids: HashMap::new(),
        labels: HashMap::new(),
        reg: HashMap::new(),
        steps: 0,
    };
    let mut base = Vec::new();
    let tracked = spec
        .pltl_entries()
        .into_iter()
        .map(|(f, _)| f)
        .chain(spec.pltl_control());
    for f in tracked {
        if let Err(f) = classify(f.simplify()) {
            let id = l.intern(f);
            if !base.contains(&id) {
                base.push(id);
            }
        }
    }
    let mut sets: HashMap<State, HashSet<u32>> = HashMap::new();
    let mut work = Vec::new();
    for &s in &states {
        sets.insert(s, base.iter().copied().collect());
        work.extend(base.iter().map(|&id| (s, id)));
    }
    while let Some((t, id)) = work.pop() {
        l.steps += 1;
        let r = regress(&l.formulas[id as usize], &d.view(t))?;
        let r = match classify(r) {
            Ok(b) => Reg::Const(b),
            Err(f) => Reg::Id(l.intern(f)),
        };
        l.reg.insert((t, id), r);
        if let Reg::Id(rid) = r {
            for &s in pred.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                if sets.get_mut(&s).expect("enumerated state").insert(rid) {
                    work.push((s, rid));
                }
            }
        }
    }
    for (s, set) in sets {
        let mut v: Vec<u32> = set.into_iter().collect();
        v.sort_unstable();
        l.labels.insert(s, v);
    }
    Ok(l)
}

/// E-states labelled with the truth of the formulae in l(s).
pub struct PltlMinGen<'a> {
    d: &'a Domain,
    l: &'a LabelMap,
    rewards: Vec<(Reg, f64)>,
    control: Vec<Reg>,
}

impl<'a> PltlMinGen<'a> {
    pub fn new(d: &'a Domain, spec: &RewardSpec, l: &'a LabelMap) -> Result<PltlMinGen<'a>> {
        spec.bind(&d.props)?;
        let lookup = |f: Pltl| -> Result<Reg> {
            match classify(f.simplify()) {
                Ok(b) => Ok(Reg::Const(b)),
                Err(f) => l
                    .ids
                    .get(&f)
                    .map(|&i| Reg::Id(i))
                    .ok_or_else(|| Error::Config(format!("`{f}` is missing from the label map"))),
            }
        };
        let rewards = spec
            .pltl_entries()
            .into_iter()
            .map(|(f, r)| Ok((lookup(f)?, r)))
            .collect::<Result<_>>()?;
        let control = spec.pltl_control().into_iter().map(lookup).collect::<Result<_>>()?;
        Ok(PltlMinGen {
            d,
            l,
            rewards,
            control,
        })
    }

    fn truth(&self, s: State, psi: &[bool], r: Reg) -> Result<bool> {
        match r {
            Reg::Const(b) => Ok(b),
            Reg::Id(i) => self
                .l
                .position(s, i)
                .map(|p| psi[p])
                .ok_or_else(|| Error::Eval("label map is not closed under regression".into())),
        }
    }
}

impl Generator for PltlMinGen<'_> {
    type Key = (State, Vec<bool>);

    fn start(&self) -> Result<Self::Key> {
        let s = self.d.init;
        let trace = [self.d.view(s)];
        let psi = self
            .l
            .ids_at(s)
            .iter()
            .map(|&i| evaluate_pltl(&self.l.formulas[i as usize], &trace))
            .collect::<Result<_>>()?;
        Ok((s, psi))
    }

    fn expand(&self, (s, psi): &Self::Key) -> Result<Expansion<Self::Key>> {
        let mut reward = 0.0;
        for &(r, v) in &self.rewards {
            if self.truth(*s, psi, r)? {
                reward += v;
            }
        }
        let mut dead = false;
        for &c in &self.control {
            dead |= !self.truth(*s, psi, c)?;
        }
        let mut succ = Vec::with_capacity(self.d.actions.len());
        if !dead {
            for a in 0..self.d.actions.len() {
                let mut out = Vec::new();
                for (t, p) in self.d.successors(*s, a)? {
                    let next = self
                        .l
                        .ids_at(t)
                        .iter()
                        .map(|&id| {
                            let r = self.l.reg.get(&(t, id)).copied().ok_or_else(|| {
                                Error::Eval("missing regression in label map".into())
                            })?;
                            self.truth(*s, psi, r)
                        })
                        .collect::<Result<Vec<bool>>>()?;
                    out.push(((t, next), p));
                }
                succ.push(out);
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

    fn label(&self, (s, psi): &Self::Key) -> String {
        let on: Vec<String> = self
            .l
            .label(*s)
            .into_iter()
            .zip(psi)
            .filter(|(_, &v)| v)
            .map(|(f, _)| f.to_string())
            .collect();
        format!("{{{}}}", on.join(", "))
    }

    fn width(&self) -> usize {
        self.d.n()
    }
}
