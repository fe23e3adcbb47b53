//! Planning toolkit for decision processes with non-Markovian rewards.
//!
//! Rewards are written as temporal-logic formulae (past-time PLTL or the
//! future-time `$`-logic) and compiled into an equivalent Markovian process,
//! either explicitly (e-states labelled with formula information) or
//! structurally (temporal variables on top of a decision-diagram model).
//! The resulting MDP is then solved with value iteration, policy iteration,
//! LAO* or structured value iteration over decision diagrams.
//!
//! Module map:
//! - [`logic`]: formula ASTs, parsing, regression, progression, trace semantics.
//! - [`dd`]: reduced ordered decision diagrams with real terminals.
//! - [`domain`]: factored dynamics, the domain file format, benchmark families.
//! - [`xmdp`]: explicit expanded MDPs.
//! - [`translate`]: the four translations and the equivalence checker.
//! - [`solve`]: explicit, heuristic-search and structured solvers.
//! - [`harness`]: the phase pipeline, statistics, experiment suites.

pub mod dd;
pub mod domain;
mod error;
pub mod harness;
pub mod logic;
pub mod solve;
pub mod translate;
pub mod xmdp;

pub use error::{Error, Result};
