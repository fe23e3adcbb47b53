use super::{Expansion, Generator};
use crate::domain::{Domain, State};
use crate::logic::{progress, Dialect, Fltl, RewardSpec};
use crate::{Error, Result};

/// On-line translation by progression. An e-state pairs a state with what
/// remains of each reward formula (one slot per entry) followed by what
/// remains of each control formula. Its reward is what progressing through
/// its own state collects.
pub struct FltlGen<'a> {
    d: &'a Domain,
    initial: Vec<Fltl>,
    values: Vec<f64>,
}

impl<'a> FltlGen<'a> {
    pub fn new(d: &'a Domain, spec: &RewardSpec) -> Result<FltlGen<'a>> {
        if spec.dialect != Dialect::Fltl {
            return Err(Error::Config("the FLTL translation needs FLTL rewards".into()));
        }
        spec.bind(&d.props)?;
        let entries = spec.fltl_entries();
        let values = entries.iter().map(|(_, r)| *r).collect();
        let initial = entries
            .iter()
            .map(|(f, _)| f.simplify())
            .chain(spec.fltl_control().iter().map(Fltl::simplify))
            .collect();
        Ok(FltlGen { d, initial, values })
    }

    /// Reward collected at `s`, the progressed slots, and whether control is
    /// violated.
    pub fn step(&self, s: State, slots: &[Fltl]) -> Result<(f64, Vec<Fltl>, bool)> {
        let view = self.d.view(s);
        let mut reward = 0.0;
        let mut dead = false;
        let mut next = Vec::with_capacity(slots.len());
        for (i, f) in slots.iter().enumerate() {
            let (g, rewarded) = progress(f, &view)?;
            match self.values.get(i) {
                Some(r) if rewarded => reward += r,
                None if g == Fltl::False => dead = true,
                _ => {}
            }
            next.push(g);
        }
        Ok((reward, next, dead))
    }
}

impl Generator for FltlGen<'_> {
    type Key = (State, Vec<Fltl>);

    fn start(&self) -> Result<Self::Key> {
        Ok((self.d.init, self.initial.clone()))
    }

    fn expand(&self, (s, slots): &Self::Key) -> Result<Expansion<Self::Key>> {
        let (reward, next, dead) = self.step(*s, slots)?;
        let mut succ = Vec::with_capacity(self.d.actions.len());
        if !dead {
            for a in 0..self.d.actions.len() {
                succ.push(
                    self.d
                        .successors(*s, a)?
                        .into_iter()
                        .map(|(t, p)| ((t, next.clone()), p))
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

    fn label(&self, (_, slots): &Self::Key) -> String {
        let parts: Vec<String> = slots.iter().map(Fltl::to_string).collect();
        format!("[{}]", parts.join(" ; "))
    }

    fn width(&self) -> usize {
        self.d.n()
    }
}
