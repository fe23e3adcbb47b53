//! Temporal logics for reward specification.
//!
//! Two dialects are supported: past-time PLTL ([`Pltl`]), whose formulae
//! denote sets of finite state sequences and are compiled by regression, and
//! the future-time `$`-logic ([`Fltl`]), whose formulae are recipes for
//! distributing reward and are compiled by progression.

mod fltl;
mod parse;
mod pltl;
mod spec;

use std::collections::HashMap;

pub use fltl::{fltl_prefix_verdict, progress, reward_trace, Fltl, Verdict};
pub use parse::{parse_fltl, parse_formula, parse_pltl};
pub use pltl::{
    entails, evaluate_pltl, pure_temporal_subformulas, regress, subformula_closure, Closure,
    LiteralSet, Pltl,
};
pub use spec::{Dialect, Formula, RewardEntry, RewardSpec};

/// Truth assignment to atoms, looked up by name.
pub trait Valuation {
    fn value(&self, atom: &str) -> Option<bool>;
}

impl Valuation for HashMap<String, bool> {
    fn value(&self, atom: &str) -> Option<bool> {
        self.get(atom).copied()
    }
}

impl<F: Fn(&str) -> Option<bool>> Valuation for F {
    fn value(&self, atom: &str) -> Option<bool> {
        self(atom)
    }
}

/// Flattens an associative chain, drops the unit, short-circuits on the
/// annihilator, sorts and deduplicates. Returns `None` when the annihilator
/// was hit and the empty vector when only units remained.
fn normalize_chain<T: Ord>(
    items: Vec<T>,
    is_unit: impl Fn(&T) -> bool,
    is_zero: impl Fn(&T) -> bool,
) -> Option<Vec<T>> {
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        if is_zero(&item) {
            return None;
        }
        if !is_unit(&item) {
            out.push(item);
        }
    }
    out.sort();
    out.dedup();
    Some(out)
}
