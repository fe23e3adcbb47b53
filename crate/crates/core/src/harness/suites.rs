//! Experiment suites. Each cell is an independent [`run_cell`].

use std::fmt;
use std::str::FromStr;

use super::pools::{all_n_ago, all_props, consecutive, first_time_all, in_sequence, multi_prev};
use super::{run_cell, RunConfig, RunStats};
use crate::domain::{gen_builtin, Domain, Family, GenParams};
use crate::logic::{parse_fltl, parse_pltl, RewardSpec};
use crate::solve::{SolverConfig, SolverKind};
use crate::translate::{Caps, Method};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Table1,
    MultiReward,
    Syntax,
    Guards,
    Dynamics,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Table1, Suite::MultiReward, Suite::Syntax, Suite::Guards, Suite::Dynamics];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Table1 => "table1",
            Suite::MultiReward => "multi-reward",
            Suite::Syntax => "syntax",
            Suite::Guards => "guards",
            Suite::Dynamics => "dynamics",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Largest n for explicit methods.
    pub max_n_explicit: usize,
    /// Largest n for the structured method.
    pub max_n_structured: usize,
    /// Proposition count of the dynamics suite.
    pub dynamics_n: usize,
    /// Competing reward values swept by the dynamics suite.
    pub dynamics_r: Vec<f64>,
    pub epsilon: f64,
    pub caps: Caps,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_n_explicit: 8,
            max_n_structured: 12,
            dynamics_n: 4,
            dynamics_r: (0..=16).map(|i| i as f64 * 0.25).collect(),
            epsilon: 1e-6,
            caps: Caps::default(),
        }
    }
}

/// Which half of the guard `g ∧ ⊖ᵏc` can never hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GuardCell {
    Reachable,
    TriggerUnreachable,
    GoalUnreachable,
}

impl GuardCell {
    pub const ALL: [GuardCell; 3] = [GuardCell::Reachable, GuardCell::TriggerUnreachable, GuardCell::GoalUnreachable];

    pub fn name(self) -> &'static str {
        match self {
            GuardCell::Reachable => "both-reachable",
            GuardCell::TriggerUnreachable => "c-unreachable",
            GuardCell::GoalUnreachable => "g-unreachable",
        }
    }
}

/// Guard reward on `base`: `g ∧ ⊖ᵏc` and `□(c → ○ᵏ(g → $))`. An unreachable
/// trigger or goal is a fresh proposition that starts false and that no
/// action touches; otherwise c = p1 and g = the last proposition.
pub fn guard_specs(base: &Domain, k: usize, cell: GuardCell) -> Result<(Domain, RewardSpec, RewardSpec)> {
    let last = base.props.last().cloned().unwrap_or_default();
    let first = base.props.first().cloned().unwrap_or_default();
    let (d, c, g) = match cell {
        GuardCell::Reachable => (base.clone(), first, last),
        GuardCell::TriggerUnreachable => (base.with_inert_props(&["c"])?, "c".to_string(), last),
        GuardCell::GoalUnreachable => (base.with_inert_props(&["g"])?, first, "g".to_string()),
    };
    let p = RewardSpec::pltl([(parse_pltl(&format!("{g} & prv^{k} {c}"))?, 1.0)]);
    let f = RewardSpec::fltl([(parse_fltl(&format!("alw ({c} -> next^{k} ({g} -> $))"))?, 1.0)]);
    Ok((d, p, f))
}

/// Guard reward with a competing reward `r`: on ¬g for PLTL, on ¬c for the
/// `$`-logic. Trigger c = p1, goal g = pn.
pub fn dynamics_specs(n: usize, k: usize, r: f64) -> Result<(RewardSpec, RewardSpec)> {
    let (c, g) = ("p1".to_string(), format!("p{n}"));
    let p = RewardSpec::pltl([
        (parse_pltl(&format!("{g} & prv^{k} {c}"))?, 1.0),
        (parse_pltl(&format!("~{g}"))?, r),
    ]);
    let f = RewardSpec::fltl([
        (parse_fltl(&format!("alw ({c} -> next^{k} ({g} -> $))"))?, 1.0),
        (parse_fltl(&format!("alw (~{c} -> $)"))?, r),
    ]);
    Ok((p, f))
}

struct Cell {
    method: Method,
    solver: SolverKind,
    domain: Domain,
    spec: RewardSpec,
    family: String,
    n: usize,
    spec_id: String,
    expand: bool,
}

fn execute(cell: Cell, opts: &SuiteOptions) -> RunStats {
    let solver_cfg = match SolverConfig::new(cell.domain.discount, opts.epsilon) {
        Ok(c) => c,
        Err(_) => SolverConfig {
            discount: cell.domain.discount,
            epsilon: opts.epsilon,
            max_iters: 100_000,
        },
    };
    let cfg = RunConfig {
        method: cell.method,
        solver: cell.solver,
        n: cell.n,
        domain: cell.domain,
        spec: cell.spec,
        solver_cfg,
        caps: opts.caps,
        expand: cell.expand,
        seed: 0,
        family: cell.family,
        spec_id: cell.spec_id,
    };
    run_cell(&cfg)
}

/// Explicit methods with value iteration, plus the structured method with
/// structured value iteration while n allows it.
fn method_matrix(
    cells: &mut Vec<Cell>,
    d: &Domain,
    family: Family,
    n: usize,
    id: &str,
    specs: &(RewardSpec, RewardSpec),
    opts: &SuiteOptions,
) {
    let mut push = |method, solver, spec: &RewardSpec, expand| {
        cells.push(Cell {
            method,
            solver,
            domain: d.clone(),
            spec: spec.clone(),
            family: family.to_string(),
            n,
            spec_id: id.to_string(),
            expand,
        })
    };
    if n <= opts.max_n_explicit {
        push(Method::PltlSim, SolverKind::Vi, &specs.0, true);
        push(Method::PltlMin, SolverKind::Vi, &specs.0, true);
        push(Method::Fltl, SolverKind::Vi, &specs.1, true);
    }
    if n <= opts.max_n_structured {
        push(Method::PltlStrA, SolverKind::Spudd, &specs.0, n <= opts.max_n_explicit);
    }
}

fn builtin(family: Family, n: usize) -> Result<Domain> {
    gen_builtin(family, n, &GenParams::default())
}

fn plan(suite: Suite, opts: &SuiteOptions) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    let top = opts.max_n_explicit.max(opts.max_n_structured);
    match suite {
        Suite::Table1 => {
            let rows: [(&str, fn(usize) -> Result<(RewardSpec, RewardSpec)>); 4] = [
                ("first-time-all", first_time_all),
                ("in-sequence", in_sequence),
                ("consecutive", consecutive),
                ("all-n-ago", all_n_ago),
            ];
            for n in 1..=top {
                let d = builtin(Family::Complete, n)?;
                for (id, f) in rows {
                    method_matrix(&mut cells, &d, Family::Complete, n, id, &f(n)?, opts);
                }
            }
        }
        Suite::MultiReward => {
            for family in Family::HAND_CODED {
                for n in 1..=top {
                    let d = builtin(family, n)?;
                    method_matrix(&mut cells, &d, family, n, "multi-prev", &multi_prev(n)?, opts);
                }
            }
        }
        Suite::Syntax => {
            for family in [Family::SpuddLinear, Family::Complete] {
                for n in 1..=top {
                    let d = builtin(family, n)?;
                    let all = all_props(n);
                    let forms = [
                        ("pdi-form", format!("({all}) & ~prv pdi ({all})"), format!("~({all}) wun (({all}) & $)")),
                        (
                            "snc-form",
                            format!("({all}) & ~prv (true snc ({all}))"),
                            format!("(({all}) & $) | (~({all}) & next (~({all}) wun (({all}) & $)))"),
                        ),
                        ("pbx-form", format!("({all}) & ~prv ~pbx ~({all})"), String::new()),
                    ];
                    for (id, p, f) in forms {
                        let p = RewardSpec::pltl([(parse_pltl(&p)?, 1.0)]);
                        if n <= opts.max_n_explicit {
                            for m in [Method::PltlSim, Method::PltlMin] {
                                cells.push(Cell {
                                    method: m,
                                    solver: SolverKind::Vi,
                                    domain: d.clone(),
                                    spec: p.clone(),
                                    family: family.to_string(),
                                    n,
                                    spec_id: id.into(),
                                    expand: true,
                                });
                            }
                            if !f.is_empty() {
                                cells.push(Cell {
                                    method: Method::Fltl,
                                    solver: SolverKind::Vi,
                                    domain: d.clone(),
                                    spec: RewardSpec::fltl([(parse_fltl(&f)?, 1.0)]),
                                    family: family.to_string(),
                                    n,
                                    spec_id: id.into(),
                                    expand: true,
                                });
                            }
                        }
                        if n <= opts.max_n_structured {
                            cells.push(Cell {
                                method: Method::PltlStrA,
                                solver: SolverKind::Spudd,
                                domain: d.clone(),
                                spec: p,
                                family: family.to_string(),
                                n,
                                spec_id: id.into(),
                                expand: false,
                            });
                        }
                    }
                }
            }
        }
        Suite::Guards => {
            for n in 1..=top {
                let base = builtin(Family::SpuddLinear, n)?;
                for cell in GuardCell::ALL {
                    let (d, p, f) = guard_specs(&base, n, cell)?;
                    let id = cell.name();
                    method_matrix(&mut cells, &d, Family::SpuddLinear, n, id, &(p, f.clone()), opts);
                    if n <= opts.max_n_explicit {
                        cells.push(Cell {
                            method: Method::Fltl,
                            solver: SolverKind::LaoVi,
                            domain: d,
                            spec: f,
                            family: Family::SpuddLinear.to_string(),
                            n,
                            spec_id: id.into(),
                            expand: false,
                        });
                    }
                }
            }
        }
        Suite::Dynamics => {
            let n = opts.dynamics_n;
            let d = builtin(Family::OnOff, n)?;
            let k = n;
            for &r in &opts.dynamics_r {
                let (p, f) = dynamics_specs(n, k, r)?;
                let id = format!("guard-k{k}-r{r}");
                cells.push(Cell {
                    method: Method::Fltl,
                    solver: SolverKind::LaoVi,
                    domain: d.clone(),
                    spec: f,
                    family: Family::OnOff.to_string(),
                    n,
                    spec_id: id.clone(),
                    expand: false,
                });
                cells.push(Cell {
                    method: Method::PltlStrA,
                    solver: SolverKind::Spudd,
                    domain: d.clone(),
                    spec: p,
                    family: Family::OnOff.to_string(),
                    n,
                    spec_id: id,
                    expand: false,
                });
            }
        }
    }
    Ok(cells)
}

/// Runs every cell of a suite on a pool of worker threads. Rows come back
/// in plan order.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Vec<RunStats>> {
    let cells = plan(suite, opts)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<RunStats>>> = cells.iter().map(|_| std::sync::Mutex::new(None)).collect();
    let cells: Vec<std::sync::Mutex<Option<Cell>>> = cells.into_iter().map(|c| std::sync::Mutex::new(Some(c))).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let cell = cells[i].lock().expect("cell lock").take().expect("each cell runs once");
                let row = execute(cell, opts);
                *slots[i].lock().expect("slot lock") = Some(row);
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every cell ran"))
        .collect())
}
