use std::fmt;

use super::{normalize_chain, Valuation};
use crate::{Error, Result};

/// A future-time formula in negation normal form, extended with the reward
/// constant `$`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fltl {
    True,
    False,
    /// Atom with polarity (`false` means negated).
    Lit(String, bool),
    Dollar,
    And(Box<Fltl>, Box<Fltl>),
    Or(Box<Fltl>, Box<Fltl>),
    Next(Box<Fltl>),
    /// `a` holds until `b` does, if ever.
    WeakUntil(Box<Fltl>, Box<Fltl>),
}

impl Fltl {
    pub fn lit(name: impl Into<String>, positive: bool) -> Fltl {
        Fltl::Lit(name.into(), positive)
    }

    pub fn and(a: Fltl, b: Fltl) -> Fltl {
        Fltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Fltl, b: Fltl) -> Fltl {
        Fltl::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Fltl) -> Fltl {
        Fltl::Next(Box::new(f))
    }

    pub fn next_n(k: usize, f: Fltl) -> Fltl {
        (0..k).fold(f, |acc, _| Fltl::next(acc))
    }

    pub fn weak_until(a: Fltl, b: Fltl) -> Fltl {
        Fltl::WeakUntil(Box::new(a), Box::new(b))
    }

    pub fn always(f: Fltl) -> Fltl {
        Fltl::weak_until(f, Fltl::False)
    }

    pub fn all(items: impl IntoIterator<Item = Fltl>) -> Fltl {
        let mut items: Vec<Fltl> = items.into_iter().collect();
        match items.pop() {
            None => Fltl::True,
            Some(last) => items.into_iter().rev().fold(last, |acc, f| Fltl::and(f, acc)),
        }
    }

    pub fn any(items: impl IntoIterator<Item = Fltl>) -> Fltl {
        let mut items: Vec<Fltl> = items.into_iter().collect();
        match items.pop() {
            None => Fltl::False,
            Some(last) => items.into_iter().rev().fold(last, |acc, f| Fltl::or(f, acc)),
        }
    }

    pub fn children(&self) -> Vec<&Fltl> {
        match self {
            Fltl::True | Fltl::False | Fltl::Lit(..) | Fltl::Dollar => vec![],
            Fltl::Next(a) => vec![a],
            Fltl::And(a, b) | Fltl::Or(a, b) | Fltl::WeakUntil(a, b) => vec![a, b],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn has_dollar(&self) -> bool {
        matches!(self, Fltl::Dollar) || self.children().iter().any(|c| c.has_dollar())
    }

    pub fn atoms(&self) -> Vec<String> {
        fn walk(f: &Fltl, out: &mut Vec<String>) {
            if let Fltl::Lit(a, _) = f {
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

    /// Same rewrites as [`super::Pltl::simplify`]; negation only occurs on
    /// literals so there is no double-negation case. Also `next` of a
    /// constant is that constant, and weak until with a `true` side or a
    /// `false` left side collapses.
    pub fn simplify(&self) -> Fltl {
        match self {
            Fltl::True | Fltl::False | Fltl::Lit(..) | Fltl::Dollar => self.clone(),
            Fltl::And(..) => {
                let mut parts = Vec::new();
                self.collect(true, &mut parts);
                match normalize_chain(parts, |f| *f == Fltl::True, |f| *f == Fltl::False) {
                    None => Fltl::False,
                    Some(parts) => Fltl::all(parts),
                }
            }
            Fltl::Or(..) => {
                let mut parts = Vec::new();
                self.collect(false, &mut parts);
                match normalize_chain(parts, |f| *f == Fltl::False, |f| *f == Fltl::True) {
                    None => Fltl::True,
                    Some(parts) => Fltl::any(parts),
                }
            }
            Fltl::Next(a) => match a.simplify() {
                c @ (Fltl::True | Fltl::False) => c,
                a => Fltl::next(a),
            },
            Fltl::WeakUntil(a, b) => match (a.simplify(), b.simplify()) {
                (_, Fltl::True) | (Fltl::True, _) => Fltl::True,
                (Fltl::False, b) => b,
                (a, b) => Fltl::weak_until(a, b),
            },
        }
    }

    fn collect(&self, conj: bool, out: &mut Vec<Fltl>) {
        match (self, conj) {
            (Fltl::And(a, b), true) | (Fltl::Or(a, b), false) => {
                a.collect(conj, out);
                b.collect(conj, out);
            }
            _ => {
                let s = self.simplify();
                match (&s, conj) {
                    (Fltl::And(..), true) | (Fltl::Or(..), false) => s.collect(conj, out),
                    _ => out.push(s),
                }
            }
        }
    }
}

impl fmt::Display for Fltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fltl::True => write!(f, "true"),
            Fltl::False => write!(f, "false"),
            Fltl::Lit(a, true) => write!(f, "{a}"),
            Fltl::Lit(a, false) => write!(f, "~{a}"),
            Fltl::Dollar => write!(f, "$"),
            Fltl::And(a, b) => write!(f, "({a} & {b})"),
            Fltl::Or(a, b) => write!(f, "({a} | {b})"),
            Fltl::Next(a) => write!(f, "next {a}"),
            Fltl::WeakUntil(a, b) => write!(f, "({a} wun {b})"),
        }
    }
}

fn progress_with(phi: &Fltl, v: &dyn Valuation, dollar: bool) -> Result<Fltl> {
    Ok(match phi {
        Fltl::True | Fltl::False => phi.clone(),
        Fltl::Lit(a, pol) => {
            let val = v.value(a).ok_or_else(|| Error::UnboundAtom(a.clone()))?;
            if val == *pol {
                Fltl::True
            } else {
                Fltl::False
            }
        }
        Fltl::Dollar => {
            if dollar {
                Fltl::True
            } else {
                Fltl::False
            }
        }
        Fltl::And(a, b) => Fltl::and(progress_with(a, v, dollar)?, progress_with(b, v, dollar)?),
        Fltl::Or(a, b) => Fltl::or(progress_with(a, v, dollar)?, progress_with(b, v, dollar)?),
        Fltl::Next(a) => (**a).clone(),
        Fltl::WeakUntil(a, b) => Fltl::or(
            progress_with(b, v, dollar)?,
            Fltl::and(progress_with(a, v, dollar)?, phi.clone()),
        ),
    })
}

/// Progresses `phi` through the current state. Returns what must hold from
/// the next state on, and whether reward is collected now.
///
/// `$` is first read as false. Reward is collected only when that reading
/// refutes the formula and reading `$` as true does not.
pub fn progress(phi: &Fltl, v: &dyn Valuation) -> Result<(Fltl, bool)> {
    let unrewarded = progress_with(phi, v, false)?.simplify();
    if unrewarded == Fltl::False && phi.has_dollar() {
        let rewarded = progress_with(phi, v, true)?.simplify();
        if rewarded != Fltl::False {
            return Ok((rewarded, true));
        }
    }
    Ok((unrewarded, false))
}

/// Reward collected at each stage of `trace` under a set of weighted
/// formulae.
pub fn reward_trace<V: Valuation>(spec: &[(Fltl, f64)], trace: &[V]) -> Result<Vec<f64>> {
    let mut current: Vec<Fltl> = spec.iter().map(|(f, _)| f.clone()).collect();
    let mut out = Vec::with_capacity(trace.len());
    for state in trace {
        let mut total = 0.0;
        for (slot, (_, r)) in current.iter_mut().zip(spec) {
            let (next, rewarded) = progress(slot, state)?;
            if rewarded {
                total += r;
            }
            *slot = next;
        }
        out.push(total);
    }
    Ok(out)
}

/// Three-valued verdict of a `$`-free formula on a finite prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Refuted,
    Open,
}

impl Verdict {
    fn and(self, o: Verdict) -> Verdict {
        use Verdict::*;
        match (self, o) {
            (Refuted, _) | (_, Refuted) => Refuted,
            (Satisfied, Satisfied) => Satisfied,
            _ => Open,
        }
    }

    fn or(self, o: Verdict) -> Verdict {
        use Verdict::*;
        match (self, o) {
            (Satisfied, _) | (_, Satisfied) => Satisfied,
            (Refuted, Refuted) => Refuted,
            _ => Open,
        }
    }
}

/// Direct finite-prefix semantics of `$`-free formulae: literals past the
/// end of the prefix are `Open`, constants keep their value, and weak until
/// holds unless refuted inside the prefix.
pub fn fltl_prefix_verdict<V: Valuation>(phi: &Fltl, trace: &[V]) -> Result<Verdict> {
    verdict_at(phi, trace, 0)
}

fn verdict_at<V: Valuation>(phi: &Fltl, trace: &[V], i: usize) -> Result<Verdict> {
    Ok(match phi {
        Fltl::True => Verdict::Satisfied,
        Fltl::False => Verdict::Refuted,
        Fltl::Dollar => return Err(Error::Eval("`$` has no prefix semantics".into())),
        Fltl::Lit(..) if i >= trace.len() => Verdict::Open,
        Fltl::Lit(a, pol) => {
            let val = trace[i]
                .value(a)
                .ok_or_else(|| Error::UnboundAtom(a.clone()))?;
            if val == *pol {
                Verdict::Satisfied
            } else {
                Verdict::Refuted
            }
        }
        Fltl::And(a, b) => verdict_at(a, trace, i)?.and(verdict_at(b, trace, i)?),
        Fltl::Or(a, b) => verdict_at(a, trace, i)?.or(verdict_at(b, trace, i)?),
        Fltl::Next(a) => verdict_at(a, trace, i + 1)?,
        // Past the prefix every position looks alike, so the greatest
        // fixpoint of b | (a & X) is b | a.
        Fltl::WeakUntil(a, b) if i >= trace.len() => verdict_at(b, trace, i)?.or(verdict_at(a, trace, i)?),
        Fltl::WeakUntil(a, b) => {
            let later = verdict_at(phi, trace, i + 1)?;
            verdict_at(b, trace, i)?.or(verdict_at(a, trace, i)?.and(later))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn g(b: bool) -> HashMap<String, bool> {
        [("g".to_string(), b)].into_iter().collect()
    }

    fn first_time_g() -> Fltl {
        Fltl::weak_until(
            Fltl::lit("g", false),
            Fltl::and(Fltl::lit("g", true), Fltl::Dollar),
        )
    }

    #[test]
    fn progression_examples() {
        let psi = Fltl::lit("g", true);
        assert_eq!(progress(&Fltl::next(psi.clone()), &g(true)).unwrap(), (psi, false));

        let f = first_time_g();
        assert_eq!(progress(&f, &g(false)).unwrap(), (f.clone(), false));
        assert_eq!(progress(&f, &g(true)).unwrap(), (Fltl::True, true));
    }

    #[test]
    fn dollar_free_refutation_is_not_reward() {
        let f = Fltl::always(Fltl::lit("g", true));
        assert_eq!(progress(&f, &g(false)).unwrap(), (Fltl::False, false));
    }

    #[test]
    fn reward_trace_examples() {
        let always_dollar = Fltl::always(Fltl::Dollar);
        let t = [g(false), g(true), g(false)];
        assert_eq!(reward_trace(&[(always_dollar, 1.0)], &t).unwrap(), vec![1.0, 1.0, 1.0]);

        let t = [g(false), g(true), g(true)];
        assert_eq!(
            reward_trace(&[(first_time_g(), 5.0)], &t).unwrap(),
            vec![0.0, 5.0, 0.0]
        );

        let t = [g(true), g(true), g(true)];
        let nn = Fltl::next_n(2, Fltl::Dollar);
        assert_eq!(reward_trace(&[(nn, 2.0)], &t).unwrap(), vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn prefix_verdicts() {
        let f = Fltl::always(Fltl::lit("g", true));
        assert_eq!(fltl_prefix_verdict(&f, &[g(true), g(true)]).unwrap(), Verdict::Open);
        assert_eq!(fltl_prefix_verdict(&f, &[g(true), g(false)]).unwrap(), Verdict::Refuted);
        let n = Fltl::next(Fltl::lit("g", true));
        assert_eq!(fltl_prefix_verdict(&n, &[g(false), g(true)]).unwrap(), Verdict::Satisfied);
    }
}
