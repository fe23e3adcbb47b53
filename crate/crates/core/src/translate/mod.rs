//! Translations from non-Markovian rewards to equivalent MDPs.
//!
//! The explicit translations are on-line [`Generator`]s: given an e-state
//! they produce its reward and successor e-states. [`explore`] turns any
//! generator into an [`Xmdp`]; the heuristic-search solver consumes the
//! generator directly.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::domain::State;
use crate::xmdp::Xmdp;
use crate::{Error, Result};

mod bisim;
mod equiv;
mod fltl;
mod pltlmin;
mod pltlsim;
mod pltlstr;

pub use bisim::{bisimulation_blocks, bisimulation_quotient_size};
pub use equiv::{check_equivalence, EquivFailure, EquivReport};
pub use fltl::FltlGen;
pub use pltlmin::{pltlmin_preprocess, LabelMap, PltlMinGen};
pub use pltlsim::PltlSimGen;
pub use pltlstr::{pltlstr_translate, FactoredAction, FactoredMdp, StrGen};

/// Default e-state budget.
pub const DEFAULT_MAX_ESTATES: usize = 2_000_000;
/// Default diagram node budget.
pub const DEFAULT_MAX_NODES: usize = 10_000_000;

/// What a generator knows about one e-state.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion<K> {
    pub state: State,
    pub reward: f64,
    /// Control knowledge is violated here; no successors are produced.
    pub dead: bool,
    /// Per action, successor e-states with probabilities.
    pub succ: Vec<Vec<(K, f64)>>,
}

/// On-line e-state generator.
pub trait Generator {
    type Key: Clone + Eq + Hash;

    fn start(&self) -> Result<Self::Key>;
    fn expand(&self, key: &Self::Key) -> Result<Expansion<Self::Key>>;
    fn action_names(&self) -> Vec<String>;
    /// Human-readable label, also hashed in dumps.
    fn label(&self, key: &Self::Key) -> String;
    /// Number of propositions, for printing states.
    fn width(&self) -> usize;
}

/// Breadth-first expansion of every e-state reachable from the start.
pub fn explore<G: Generator>(gen: &G, max_estates: usize) -> Result<Xmdp> {
    let start = gen.start()?;
    let mut index: HashMap<G::Key, usize> = HashMap::new();
    let mut keys = vec![start.clone()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    let n_actions = gen.action_names().len();
    let mut states = Vec::new();
    let mut rewards = Vec::new();
    let mut dead = Vec::new();
    let mut trans: Vec<Vec<Vec<(usize, f64)>>> = Vec::new();
    while let Some(e) = queue.pop_front() {
        let x = gen.expand(&keys[e])?;
        let mut row = Vec::with_capacity(n_actions);
        for dist in x.succ {
            let mut out = Vec::with_capacity(dist.len());
            for (k, p) in dist {
                let next = match index.get(&k) {
                    Some(&f) => f,
                    None => {
                        let f = keys.len();
                        if f >= max_estates {
                            return Err(Error::CapExceeded {
                                what: "e-state",
                                limit: max_estates,
                                count: f + 1,
                            });
                        }
                        index.insert(k.clone(), f);
                        keys.push(k);
                        queue.push_back(f);
                        f
                    }
                };
                out.push((next, p));
            }
            row.push(out);
        }
        row.resize(n_actions, Vec::new());
        states.push(x.state);
        rewards.push(x.reward);
        dead.push(x.dead);
        trans.push(row);
    }
    Ok(Xmdp {
        action_names: gen.action_names(),
        labels: keys.iter().map(|k| gen.label(k)).collect(),
        states,
        rewards,
        trans,
        dead,
        start: 0,
        width: gen.width(),
    })
}

/// Adapter exposing an explicit MDP as a generator.
pub struct XmdpGen<'a>(pub &'a Xmdp);

impl Generator for XmdpGen<'_> {
    type Key = usize;

    fn start(&self) -> Result<usize> {
        Ok(self.0.start)
    }

    fn expand(&self, &e: &usize) -> Result<Expansion<usize>> {
        Ok(Expansion {
            state: self.0.states[e],
            reward: self.0.rewards[e],
            dead: self.0.dead[e],
            succ: self.0.trans[e].clone(),
        })
    }

    fn action_names(&self) -> Vec<String> {
        self.0.action_names.clone()
    }

    fn label(&self, &e: &usize) -> String {
        self.0.labels[e].clone()
    }

    fn width(&self) -> usize {
        self.0.width
    }
}

/// Explicit translation methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    PltlSim,
    PltlMin,
    PltlStr,
    PltlStrA,
    Fltl,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::PltlSim,
        Method::PltlMin,
        Method::PltlStr,
        Method::PltlStrA,
        Method::Fltl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::PltlSim => "pltlsim",
            Method::PltlMin => "pltlmin",
            Method::PltlStr => "pltlstr",
            Method::PltlStrA => "pltlstr-a",
            Method::Fltl => "fltl",
        }
    }

    pub fn dialect(self) -> crate::logic::Dialect {
        match self {
            Method::Fltl => crate::logic::Dialect::Fltl,
            _ => crate::logic::Dialect::Pltl,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Expands a domain under a spec with one of the explicit methods.
pub fn expand(
    method: Method,
    d: &crate::domain::Domain,
    spec: &crate::logic::RewardSpec,
    caps: &Caps,
) -> Result<Xmdp> {
    if spec.dialect != method.dialect() {
        return Err(Error::Config(format!(
            "method {method} needs {} rewards, got {}",
            method.dialect(),
            spec.dialect
        )));
    }
    match method {
        Method::PltlSim => explore(&PltlSimGen::new(d, spec)?, caps.max_estates),
        Method::PltlMin => {
            let l = pltlmin_preprocess(d, spec, caps.explicit_props)?;
            explore(&PltlMinGen::new(d, spec, &l)?, caps.max_estates)
        }
        Method::Fltl => explore(&FltlGen::new(d, spec)?, caps.max_estates),
        Method::PltlStr | Method::PltlStrA => {
            let fm = pltlstr_translate(d, spec, caps.max_nodes, method == Method::PltlStrA)?;
            explore(&StrGen::new(&fm), caps.max_estates)
        }
    }
}

/// Resource limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_estates: usize,
    pub max_nodes: usize,
    pub explicit_props: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            max_estates: DEFAULT_MAX_ESTATES,
            max_nodes: DEFAULT_MAX_NODES,
            explicit_props: crate::domain::DEFAULT_EXPLICIT_CAP,
        }
    }
}

impl Caps {
    /// Parses overrides such as `estates=1000,nodes=50000,props=12`.
    pub fn with_overrides(mut self, text: &str) -> Result<Caps> {
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad cap `{part}`")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad cap value in `{part}`")))?;
            match k.trim() {
                "estates" => self.max_estates = v,
                "nodes" => self.max_nodes = v,
                "props" => self.explicit_props = v,
                other => return Err(Error::Config(format!("unknown cap `{other}`"))),
            }
        }
        Ok(self)
    }

    /// Defaults overridden by the `NMRDPP_CAPS` environment variable.
    pub fn from_env() -> Result<Caps> {
        match std::env::var("NMRDPP_CAPS") {
            Ok(text) => Caps::default().with_overrides(&text),
            Err(_) => Ok(Caps::default()),
        }
    }
}
