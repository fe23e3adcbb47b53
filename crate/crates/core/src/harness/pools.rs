//! Named reward specifications over propositions `p1..pn`.
//!
//! Formulae mention `p1`, `p2` and `pN` (the last proposition); with fewer
//! propositions these collapse onto each other.

use crate::logic::{parse_fltl, parse_pltl, RewardSpec};
use crate::Result;

fn names(n: usize) -> (String, String, String) {
    let n = n.max(1);
    ("p1".into(), format!("p{}", n.min(2)), format!("p{n}"))
}

fn fill(text: &str, n: usize) -> String {
    let (p1, p2, pn) = names(n);
    text.replace("P1", &p1).replace("P2", &p2).replace("PN", &pn)
}

fn pltl(n: usize, entries: &[(&str, f64)]) -> Result<RewardSpec> {
    let mut out = Vec::new();
    for (text, r) in entries {
        out.push((parse_pltl(&fill(text, n))?, *r));
    }
    Ok(RewardSpec::pltl(out))
}

fn fltl(n: usize, entries: &[(&str, f64)]) -> Result<RewardSpec> {
    let mut out = Vec::new();
    for (text, r) in entries {
        out.push((parse_fltl(&fill(text, n))?, *r));
    }
    Ok(RewardSpec::fltl(out))
}

/// Conjunction of every proposition.
pub fn all_props(n: usize) -> String {
    (1..=n).map(|i| format!("p{i}")).collect::<Vec<_>>().join(" & ")
}

const PLTL_POOL: [(&str, &[(&str, f64)]); 12] = [
    ("const", &[("true", 1.0)]),
    ("markov", &[("P1", 1.0)]),
    ("first-time", &[("P1 & ~prv pdi P1", 5.0)]),
    ("prev", &[("prv P1", 2.0)]),
    ("prev2-true", &[("prv^2 true", 1.0)]),
    ("since", &[("P1 snc P2", 1.0)]),
    ("never", &[("P1 & pbx ~P2", 3.0)]),
    ("guard", &[("PN & prv^2 P1", 4.0)]),
    ("multi-prev", &[("prv P1", 1.0), ("prv P2", 1.0)]),
    ("rise", &[("P1 & prv ~P1", 2.0), ("~P2", 0.5)]),
    ("either-prev", &[("prv P1 | prv^2 P2", 1.0)]),
    ("start-neg", &[("~prv true", 10.0), ("P2", -1.0)]),
];

const FLTL_POOL: [(&str, &[(&str, f64)]); 12] = [
    ("always", &[("alw $", 1.0)]),
    ("markov", &[("alw (P1 -> $)", 1.0)]),
    ("first-time", &[("~P1 wun (P1 & $)", 5.0)]),
    ("after", &[("alw (P1 -> next $)", 2.0)]),
    ("from-two", &[("next next alw $", 1.0)]),
    ("start", &[("$", 10.0)]),
    ("guard", &[("alw (P1 -> next^2 (PN -> $))", 4.0)]),
    ("at-two", &[("next^2 $", 2.0)]),
    ("multi-after", &[("alw (P1 -> next $)", 1.0), ("alw (P2 -> next $)", 1.0)]),
    ("until", &[("P1 wun (P2 & $)", 3.0)]),
    ("guard-neg", &[("alw (P1 -> next (~P2 -> $))", 1.0)]),
    ("late-neg", &[("alw ((P1 & P2) -> next^3 $)", 2.0), ("alw (~P1 -> $)", -1.0)]),
];

const MIN_POOL: [(&str, &str); 8] = [
    ("first-time", "P1 & ~prv pdi P1"),
    ("prev", "prv P1"),
    ("prev2-true", "prv^2 true"),
    ("since", "P1 snc P2"),
    ("never", "P1 & pbx ~P2"),
    ("guard", "PN & prv^2 P1"),
    ("either-prev", "prv P1 | prv^2 P2"),
    ("once-pair", "pdi (P1 & prv P2)"),
];

/// Twelve PLTL specs, single and multiple rewards.
pub fn pltl_pool(n: usize) -> Result<Vec<(String, RewardSpec)>> {
    PLTL_POOL.iter().map(|(id, e)| Ok((id.to_string(), pltl(n, e)?))).collect()
}

/// Twelve `$`-logic specs.
pub fn fltl_pool(n: usize) -> Result<Vec<(String, RewardSpec)>> {
    FLTL_POOL.iter().map(|(id, e)| Ok((id.to_string(), fltl(n, e)?))).collect()
}

/// Eight single-reward PLTL specs.
pub fn minimality_pool(n: usize) -> Result<Vec<(String, RewardSpec)>> {
    MIN_POOL.iter().map(|(id, f)| Ok((id.to_string(), pltl(n, &[(f, 1.0)])?))).collect()
}

/// Reward the first state where every proposition holds.
pub fn first_time_all(n: usize) -> Result<(RewardSpec, RewardSpec)> {
    let all = all_props(n);
    Ok((
        RewardSpec::pltl([(parse_pltl(&format!("({all}) & ~prv pdi ({all})"))?, 1.0)]),
        RewardSpec::fltl([(parse_fltl(&format!("~({all}) wun (({all}) & $)"))?, 1.0)]),
    ))
}

/// Reward the state `n` steps after every proposition held.
pub fn all_n_ago(n: usize) -> Result<(RewardSpec, RewardSpec)> {
    let all = all_props(n);
    Ok((
        RewardSpec::pltl([(parse_pltl(&format!("prv^{n} ({all})"))?, 1.0)]),
        RewardSpec::fltl([(parse_fltl(&format!("alw (({all}) -> next^{n} $)"))?, 1.0)]),
    ))
}

/// Reward stage n−1 when p1..pn held at stages 0..n−1 in order.
pub fn in_sequence(n: usize) -> Result<(RewardSpec, RewardSpec)> {
    let mut past = "~prv true".to_string();
    for i in 1..=n {
        past = if i == 1 {
            format!("p1 & {past}")
        } else {
            format!("p{i} & prv ({past})")
        };
    }
    let mut future = format!("p{n} & $");
    for i in (1..n).rev() {
        future = format!("p{i} & next ({future})");
    }
    Ok((
        RewardSpec::pltl([(parse_pltl(&past)?, 1.0)]),
        RewardSpec::fltl([(parse_fltl(&future)?, 1.0)]),
    ))
}

/// Reward whenever some pᵢ₊₁ follows pᵢ.
pub fn consecutive(n: usize) -> Result<(RewardSpec, RewardSpec)> {
    if n == 1 {
        return Ok((
            RewardSpec::pltl([(parse_pltl("p1 & prv p1")?, 1.0)]),
            RewardSpec::fltl([(parse_fltl("alw (p1 -> next (p1 -> $))")?, 1.0)]),
        ));
    }
    let past: Vec<String> = (1..n).map(|i| format!("(p{} & prv p{i})", i + 1)).collect();
    let future: Vec<String> = (1..n).map(|i| format!("(p{i} -> next (p{} -> $))", i + 1)).collect();
    Ok((
        RewardSpec::pltl([(parse_pltl(&past.join(" | "))?, 1.0)]),
        RewardSpec::fltl([(parse_fltl(&format!("alw ({})", future.join(" & ")))?, 1.0)]),
    ))
}

/// `{⊖pᵢ : 1}` for every proposition, and the `$`-logic analogue.
pub fn multi_prev(n: usize) -> Result<(RewardSpec, RewardSpec)> {
    let mut p = Vec::new();
    let mut f = Vec::new();
    for i in 1..=n {
        p.push((parse_pltl(&format!("prv p{i}"))?, 1.0));
        f.push((parse_fltl(&format!("alw (p{i} -> next $)"))?, 1.0));
    }
    Ok((RewardSpec::pltl(p), RewardSpec::fltl(f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_parse_for_small_n() {
        for n in 1..=4 {
            assert_eq!(pltl_pool(n).unwrap().len(), 12);
            assert_eq!(fltl_pool(n).unwrap().len(), 12);
            assert_eq!(minimality_pool(n).unwrap().len(), 8);
            for f in [first_time_all, all_n_ago, in_sequence, consecutive, multi_prev] {
                f(n).unwrap();
            }
        }
    }

    #[test]
    fn multiple_rewards_have_distinct_names() {
        let (p, f) = multi_prev(3).unwrap();
        assert_eq!(p.entries.len(), 3);
        assert_eq!(f.entries.len(), 3);
    }
}
