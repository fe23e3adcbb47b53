use std::collections::HashSet;
use std::fmt;

use super::parse::{parse_fltl_at, parse_pltl_at};
use super::{Fltl, Pltl};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dialect {
    Pltl,
    Fltl,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::Pltl => write!(f, "pltl"),
            Dialect::Fltl => write!(f, "fltl"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Pltl(Pltl),
    Fltl(Fltl),
}

impl Formula {
    pub fn dialect(&self) -> Dialect {
        match self {
            Formula::Pltl(_) => Dialect::Pltl,
            Formula::Fltl(_) => Dialect::Fltl,
        }
    }

    pub fn atoms(&self) -> Vec<String> {
        match self {
            Formula::Pltl(f) => f.atoms(),
            Formula::Fltl(f) => f.atoms(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Pltl(x) => x.fmt(f),
            Formula::Fltl(x) => x.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewardEntry {
    pub name: String,
    pub formula: Formula,
    pub value: f64,
}

/// Weighted reward formulae plus control formulae, all in one dialect.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardSpec {
    pub dialect: Dialect,
    pub entries: Vec<RewardEntry>,
    pub control: Vec<Formula>,
}

impl RewardSpec {
    pub fn new(dialect: Dialect) -> RewardSpec {
        RewardSpec {
            dialect,
            entries: Vec::new(),
            control: Vec::new(),
        }
    }

    /// Builds a PLTL spec from `(formula, value)` pairs named `r0, r1, ...`.
    pub fn pltl(entries: impl IntoIterator<Item = (Pltl, f64)>) -> RewardSpec {
        let mut spec = RewardSpec::new(Dialect::Pltl);
        for (i, (f, v)) in entries.into_iter().enumerate() {
            spec.entries.push(RewardEntry {
                name: format!("r{i}"),
                formula: Formula::Pltl(f),
                value: v,
            });
        }
        spec
    }

    pub fn fltl(entries: impl IntoIterator<Item = (Fltl, f64)>) -> RewardSpec {
        let mut spec = RewardSpec::new(Dialect::Fltl);
        for (i, (f, v)) in entries.into_iter().enumerate() {
            spec.entries.push(RewardEntry {
                name: format!("r{i}"),
                formula: Formula::Fltl(f),
                value: v,
            });
        }
        spec
    }

    pub fn with_control(mut self, control: Formula) -> Result<RewardSpec> {
        if control.dialect() != self.dialect {
            return Err(Error::Config("control formula dialect differs from rewards".into()));
        }
        self.control.push(control);
        Ok(self)
    }

    pub fn pltl_entries(&self) -> Vec<(Pltl, f64)> {
        self.entries
            .iter()
            .filter_map(|e| match &e.formula {
                Formula::Pltl(f) => Some((f.clone(), e.value)),
                Formula::Fltl(_) => None,
            })
            .collect()
    }

    pub fn fltl_entries(&self) -> Vec<(Fltl, f64)> {
        self.entries
            .iter()
            .filter_map(|e| match &e.formula {
                Formula::Fltl(f) => Some((f.clone(), e.value)),
                Formula::Pltl(_) => None,
            })
            .collect()
    }

    pub fn pltl_control(&self) -> Vec<Pltl> {
        self.control
            .iter()
            .filter_map(|f| match f {
                Formula::Pltl(f) => Some(f.clone()),
                Formula::Fltl(_) => None,
            })
            .collect()
    }

    pub fn fltl_control(&self) -> Vec<Fltl> {
        self.control
            .iter()
            .filter_map(|f| match f {
                Formula::Fltl(f) => Some(f.clone()),
                Formula::Pltl(_) => None,
            })
            .collect()
    }

    /// Sum of the positive reward values; bounds the reward of any stage.
    pub fn max_stage_reward(&self) -> f64 {
        self.entries.iter().map(|e| e.value.max(0.0)).sum()
    }

    pub fn min_stage_reward(&self) -> f64 {
        self.entries.iter().map(|e| e.value.min(0.0)).sum()
    }

    /// Every atom mentioned by rewards or control.
    pub fn atoms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for f in self.entries.iter().map(|e| &e.formula).chain(&self.control) {
            for a in f.atoms() {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }

    /// Checks every atom against a proposition list.
    pub fn bind(&self, props: &[String]) -> Result<()> {
        for a in self.atoms() {
            if !props.contains(&a) {
                return Err(Error::UnboundAtom(a));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<RewardSpec> {
        let mut spec: Option<RewardSpec> = None;
        let mut names = HashSet::new();
        for (ln, raw_line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = match raw_line.find('%') {
                Some(i) => &raw_line[..i],
                None => raw_line,
            };
            let trimmed = line.trim_start();
            if trimmed.trim().is_empty() {
                continue;
            }
            let indent = line.len() - trimmed.len();
            let mut words = trimmed.split_whitespace();
            let keyword = words.next().unwrap_or("");
            match keyword {
                "dialect" => {
                    if spec.is_some() {
                        return Err(Error::parse(line_no, indent + 1, "dialect declared twice"));
                    }
                    let d = match words.next() {
                        Some("pltl") => Dialect::Pltl,
                        Some("fltl") => Dialect::Fltl,
                        other => {
                            return Err(Error::parse(
                                line_no,
                                indent + 1,
                                format!("unknown dialect {other:?}"),
                            ))
                        }
                    };
                    spec = Some(RewardSpec::new(d));
                }
                "reward" | "control" => {
                    let Some(s) = spec.as_mut() else {
                        return Err(Error::parse(line_no, indent + 1, "missing `dialect` header"));
                    };
                    let colon = trimmed.find(':').ok_or_else(|| {
                        Error::parse(line_no, indent + 1, "expected `:` before the formula")
                    })?;
                    let head: Vec<&str> = trimmed[..colon].split_whitespace().collect();
                    let body = &trimmed[colon + 1..];
                    let origin = (line_no, indent + colon + 2);
                    let formula = match s.dialect {
                        Dialect::Pltl => Formula::Pltl(parse_pltl_at(body, origin)?),
                        Dialect::Fltl => Formula::Fltl(parse_fltl_at(body, origin)?),
                    };
                    if keyword == "control" {
                        if head.len() != 1 {
                            return Err(Error::parse(line_no, indent + 1, "expected `control : FORMULA`"));
                        }
                        s.control.push(formula);
                        continue;
                    }
                    if head.len() != 3 {
                        return Err(Error::parse(
                            line_no,
                            indent + 1,
                            "expected `reward NAME VALUE : FORMULA`",
                        ));
                    }
                    let name = head[1].to_string();
                    let value: f64 = head[2].parse().map_err(|_| {
                        Error::parse(line_no, indent + 1, format!("bad reward value `{}`", head[2]))
                    })?;
                    if !value.is_finite() {
                        return Err(Error::parse(line_no, indent + 1, "reward value must be finite"));
                    }
                    if !names.insert(name.clone()) {
                        return Err(Error::parse(
                            line_no,
                            indent + 1,
                            format!("duplicate reward name `{name}`"),
                        ));
                    }
                    s.entries.push(RewardEntry { name, formula, value });
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        indent + 1,
                        format!("unknown directive `{other}`"),
                    ))
                }
            }
        }
        spec.ok_or_else(|| Error::parse(1, 1, "missing `dialect` header"))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dialect {}\n", self.dialect);
        for e in &self.entries {
            out.push_str(&format!("reward {} {} : {}\n", e.name, e.value, e.formula));
        }
        for c in &self.control {
            out.push_str(&format!("control : {c}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reward_file() {
        let text = "% first time g\ndialect pltl\nreward first 5 : g & ~prv pdi g\ncontrol : ~p\n";
        let spec = RewardSpec::parse(text).unwrap();
        assert_eq!(spec.dialect, Dialect::Pltl);
        assert_eq!(spec.entries.len(), 1);
        assert_eq!(spec.entries[0].value, 5.0);
        assert_eq!(spec.control.len(), 1);
        assert_eq!(RewardSpec::parse(&spec.to_text()).unwrap(), spec);
    }

    #[test]
    fn reward_file_errors() {
        assert!(RewardSpec::parse("reward a 1 : p").is_err());
        assert!(RewardSpec::parse("dialect pltl\nreward a 1 : p\nreward a 2 : q").is_err());
        match RewardSpec::parse("dialect pltl\nreward a 1 : p snc").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
        assert!(RewardSpec::parse("dialect fltl\nreward a 1 : prv p").is_err());
        assert!(RewardSpec::parse("dialect pltl\nreward a inf : p").is_err());
    }
}
