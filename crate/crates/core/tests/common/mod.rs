//! Shared helpers for the integration tests.
#![allow(dead_code)]

use nmrdpp::domain::{gen_builtin, Domain, Family, GenParams, State, StateView};
use nmrdpp::logic::{Fltl, Pltl};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 3] = ["p1", "p2", "p3"];

/// Any domain over p1..p3 serves as a source of state views.
pub fn three_props() -> Domain {
    gen_builtin(Family::Complete, 3, &GenParams::default()).unwrap()
}

pub fn views<'a>(d: &'a Domain, states: &[State]) -> Vec<StateView<'a>> {
    states.iter().map(|&s| d.view(s)).collect()
}

/// Calls `f` on every sequence of 1..=max_len states over `width` bits.
pub fn for_each_trace(width: usize, max_len: usize, mut f: impl FnMut(&[State])) {
    fn rec(width: usize, max_len: usize, cur: &mut Vec<State>, f: &mut dyn FnMut(&[State])) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max_len {
            return;
        }
        for s in 0..1u64 << width {
            cur.push(State(s));
            rec(width, max_len, cur, f);
            cur.pop();
        }
    }
    rec(width, max_len, &mut Vec::new(), &mut f);
}

fn pltl_leaves() -> Vec<Pltl> {
    let mut out = vec![Pltl::True, Pltl::False];
    out.extend(ATOMS.iter().map(|a| Pltl::atom(*a)));
    out
}

/// Every PLTL formula over p1..p3 of depth at most `depth` (0, 1 or 2).
pub fn all_pltl(depth: usize) -> Vec<Pltl> {
    let mut level = pltl_leaves();
    for _ in 0..depth {
        let mut next = level.clone();
        for a in &level {
            next.push(Pltl::not(a.clone()));
            next.push(Pltl::prev(a.clone()));
            for b in &level {
                next.push(Pltl::and(a.clone(), b.clone()));
                next.push(Pltl::or(a.clone(), b.clone()));
                next.push(Pltl::since(a.clone(), b.clone()));
            }
        }
        next.sort();
        next.dedup();
        level = next;
    }
    level
}

pub fn random_pltl<R: Rng>(rng: &mut R, depth: usize) -> Pltl {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..5) {
            0 => Pltl::True,
            1 => Pltl::False,
            i => Pltl::atom(ATOMS[i - 2]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 => Pltl::not(random_pltl(rng, d)),
        1 => Pltl::prev(random_pltl(rng, d)),
        2 => Pltl::and(random_pltl(rng, d), random_pltl(rng, d)),
        3 => Pltl::or(random_pltl(rng, d), random_pltl(rng, d)),
        _ => Pltl::since(random_pltl(rng, d), random_pltl(rng, d)),
    }
}

/// A `$`-free formula when `dollar` is false.
pub fn random_fltl<R: Rng>(rng: &mut R, depth: usize, dollar: bool) -> Fltl {
    if depth == 0 || rng.random_bool(0.2) {
        let k = if dollar { 6 } else { 5 };
        return match rng.random_range(0..k) {
            0 => Fltl::True,
            1 => Fltl::False,
            5 => Fltl::Dollar,
            i => Fltl::lit(ATOMS[i - 2], rng.random_bool(0.5)),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 => Fltl::next(random_fltl(rng, d, dollar)),
        1 => Fltl::and(random_fltl(rng, d, dollar), random_fltl(rng, d, dollar)),
        2 => Fltl::or(random_fltl(rng, d, dollar), random_fltl(rng, d, dollar)),
        3 => Fltl::always(random_fltl(rng, d, dollar)),
        _ => Fltl::weak_until(random_fltl(rng, d, dollar), random_fltl(rng, d, dollar)),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
