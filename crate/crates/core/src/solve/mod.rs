//! MDP solvers: value iteration, policy iteration, LAO* and structured
//! value iteration over decision diagrams.
//!
//! All solvers maximize expected discounted reward and stop once the
//! Bellman residual is at most ε(1−β)/β, which bounds the error of the
//! returned values by ε. Ties between actions go to the earlier action.

use std::fmt::Write as _;

use crate::xmdp::Xmdp;
use crate::{Error, Result};

mod explicit;
mod lao;
mod spudd;

pub use explicit::{evaluate_policy, policy_iteration, value_iteration};
pub use lao::{lao_star, LaoResult, Subroutine};
pub use spudd::{spudd_solve, StructuredSolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub discount: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl SolverConfig {
    pub fn new(discount: f64, epsilon: f64) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            discount,
            epsilon,
            max_iters: 100_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::Config(format!(
                "discount must lie strictly between 0 and 1, got {}",
                self.discount
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        Ok(())
    }

    /// Residual at which iteration stops.
    pub fn threshold(&self) -> f64 {
        self.epsilon * (1.0 - self.discount) / self.discount
    }
}

/// Values and greedy policy over the e-states of an explicit MDP.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    /// `None` where no action is available.
    pub policy: Vec<Option<usize>>,
    pub iterations: usize,
    pub converged: bool,
    /// Bellman residual after each sweep (value iteration) or each
    /// evaluation (policy iteration).
    pub residuals: Vec<f64>,
}

impl Solution {
    /// Lines `e-state-id, action, value`.
    pub fn dump(&self, m: &Xmdp) -> String {
        let mut out = String::new();
        for (e, v) in self.values.iter().enumerate() {
            let a = self.policy[e].map_or("-", |a| m.action_names[a].as_str());
            let _ = writeln!(out, "{e}, {a}, {v}");
        }
        out
    }
}

/// Admissible constant heuristic: no e-state can earn more than the sum of
/// the positive reward values at every stage.
pub fn default_heuristic(max_stage_reward: f64, discount: f64) -> f64 {
    max_stage_reward / (1.0 - discount)
}

/// Explicit-solver choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Vi,
    Pi,
    LaoVi,
    LaoPi,
    Spudd,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Vi,
        SolverKind::Pi,
        SolverKind::LaoVi,
        SolverKind::LaoPi,
        SolverKind::Spudd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Vi => "vi",
            SolverKind::Pi => "pi",
            SolverKind::LaoVi => "lao-vi",
            SolverKind::LaoPi => "lao-pi",
            SolverKind::Spudd => "spudd",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SolverKind> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}`")))
    }
}
