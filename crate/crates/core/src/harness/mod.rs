//! The preprocess / expand / solve pipeline, run statistics, control
//! knowledge, policy simulation and the experiment suites.

use std::fmt;
use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, State};
use crate::logic::{Formula, RewardSpec};
use crate::solve::{
    default_heuristic, lao_star, policy_iteration, spudd_solve, value_iteration, SolverConfig, SolverKind,
    Subroutine,
};
use crate::translate::{
    explore, pltlmin_preprocess, pltlstr_translate, Caps, FltlGen, Generator, Method, PltlMinGen, PltlSimGen,
    StrGen, XmdpGen,
};
use crate::xmdp::Xmdp;
use crate::{Error, Result};

pub mod pools;
mod suites;

pub use suites::{dynamics_specs, guard_specs, run_suite, GuardCell, Suite, SuiteOptions};

/// One pipeline run. Inputs are already loaded; the command-line driver
/// reads the files.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub method: Method,
    pub solver: SolverKind,
    pub domain: Domain,
    pub spec: RewardSpec,
    pub solver_cfg: SolverConfig,
    pub caps: Caps,
    /// Expand fully before solving even where the solver does not need it.
    pub expand: bool,
    pub seed: u64,
    pub family: String,
    pub n: usize,
    pub spec_id: String,
}

impl RunConfig {
    /// Discount from the domain, ε = 1e-6, default caps.
    pub fn new(method: Method, solver: SolverKind, domain: Domain, spec: RewardSpec) -> Result<RunConfig> {
        let solver_cfg = SolverConfig::new(domain.discount, 1e-6)?;
        let n = domain.n();
        Ok(RunConfig {
            method,
            solver,
            domain,
            spec,
            solver_cfg,
            caps: Caps::default(),
            expand: false,
            seed: 0,
            family: "custom".into(),
            n,
            spec_id: "custom".into(),
        })
    }
}

/// Structured solving needs the structured translations and vice versa;
/// the explicit solvers need an explicit translation.
pub fn check_compatible(method: Method, solver: SolverKind) -> Result<()> {
    let structured = matches!(method, Method::PltlStr | Method::PltlStrA);
    if structured != (solver == SolverKind::Spudd) {
        return Err(Error::Config(format!("method {method} cannot be solved with {solver}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    NotConverged,
    Cap,
    Infeasible,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::NotConverged => "not-converged",
            Status::Cap => "cap",
            Status::Infeasible => "infeasible",
            Status::Error => "error",
        })
    }
}

impl Status {
    fn of(e: &Error) -> Status {
        match e {
            Error::CapExceeded { .. } => Status::Cap,
            Error::Infeasible(_) => Status::Infeasible,
            _ => Status::Error,
        }
    }
}

/// CSV column set.
pub const CSV_COLUMNS: [&str; 14] = [
    "method", "solver", "family", "n", "spec-id", "states", "estates", "nodes", "t_pre_ms", "t_exp_ms",
    "t_solve_ms", "iters", "v_s0", "status",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub method: Method,
    pub solver: SolverKind,
    pub family: String,
    pub n: usize,
    pub spec_id: String,
    /// Reachable domain states, when small enough to enumerate.
    pub states: Option<usize>,
    /// E-states expanded (full expansion, or those LAO* expanded).
    pub estates: Option<usize>,
    /// Diagram nodes allocated by the structured path.
    pub nodes: Option<usize>,
    pub t_pre_ms: f64,
    pub t_exp_ms: f64,
    pub t_solve_ms: f64,
    pub iters: usize,
    pub v_s0: Option<f64>,
    pub status: Status,
}

impl RunStats {
    fn blank(cfg: &RunConfig) -> RunStats {
        RunStats {
            method: cfg.method,
            solver: cfg.solver,
            family: cfg.family.clone(),
            n: cfg.n,
            spec_id: cfg.spec_id.clone(),
            states: None,
            estates: None,
            nodes: None,
            t_pre_ms: 0.0,
            t_exp_ms: 0.0,
            t_solve_ms: 0.0,
            iters: 0,
            v_s0: None,
            status: Status::Ok,
        }
    }

    pub fn record(&self) -> Vec<String> {
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.method.to_string(),
            self.solver.to_string(),
            self.family.clone(),
            self.n.to_string(),
            self.spec_id.clone(),
            opt(self.states),
            opt(self.estates),
            opt(self.nodes),
            format!("{:.3}", self.t_pre_ms),
            format!("{:.3}", self.t_exp_ms),
            format!("{:.3}", self.t_solve_ms),
            self.iters.to_string(),
            self.v_s0.map(|v| format!("{v:.9}")).unwrap_or_default(),
            self.status.to_string(),
        ]
    }

    /// The row without wall-clock fields.
    pub fn timeless(&self) -> RunStats {
        RunStats {
            t_pre_ms: 0.0,
            t_exp_ms: 0.0,
            t_solve_ms: 0.0,
            ..self.clone()
        }
    }

    fn key(&self) -> (String, usize, String, &'static str, &'static str) {
        (self.family.clone(), self.n, self.spec_id.clone(), self.method.name(), self.solver.name())
    }
}

/// Writes rows sorted by (family, n, spec-id, method, solver).
pub fn write_csv<W: Write>(rows: &[RunStats], out: W) -> Result<()> {
    let mut sorted: Vec<&RunStats> = rows.iter().collect();
    sorted.sort_by_key(|r| r.key());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in sorted {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub stats: RunStats,
    /// `e-state-id, action, value` lines, or a DOT diagram for the
    /// structured policy.
    pub policy: String,
    /// Structured value diagram in DOT.
    pub value_dot: Option<String>,
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Adds control formulae to a spec. They must be in the spec's dialect.
pub fn apply_control(spec: &RewardSpec, control: &[Formula]) -> Result<RewardSpec> {
    let mut out = spec.clone();
    for c in control {
        out = out.with_control(c.clone())?;
    }
    Ok(out)
}

/// Runs preprocessing, optional expansion and solving.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let mut stats = RunStats::blank(cfg);
    let (policy, value_dot) = run_phases(cfg, &mut stats)?;
    Ok(RunOutput {
        stats,
        policy,
        value_dot,
    })
}

/// Like [`run`], but failures become the row's status and the statistics
/// gathered so far are kept.
pub fn run_cell(cfg: &RunConfig) -> RunStats {
    let mut stats = RunStats::blank(cfg);
    if let Err(e) = run_phases(cfg, &mut stats) {
        stats.status = Status::of(&e);
    }
    stats
}

fn run_phases(cfg: &RunConfig, stats: &mut RunStats) -> Result<(String, Option<String>)> {
    check_compatible(cfg.method, cfg.solver)?;
    if cfg.spec.dialect != cfg.method.dialect() {
        return Err(Error::Config(format!(
            "method {} needs {} rewards, got {}",
            cfg.method,
            cfg.method.dialect(),
            cfg.spec.dialect
        )));
    }
    cfg.solver_cfg.validate()?;
    let d = &cfg.domain;
    cfg.spec.bind(&d.props)?;
    if d.n() <= cfg.caps.explicit_props {
        stats.states = Some(d.reachable_states().len());
    }
    match cfg.method {
        Method::PltlStr | Method::PltlStrA => {
            let t = Instant::now();
            let mut fm = pltlstr_translate(d, &cfg.spec, cfg.caps.max_nodes, cfg.method == Method::PltlStrA)?;
            stats.t_pre_ms = millis(t);
            stats.nodes = Some(fm.mgr.allocated());
            if cfg.expand {
                let t = Instant::now();
                let m = explore(&StrGen::new(&fm), cfg.caps.max_estates)?;
                stats.t_exp_ms = millis(t);
                stats.estates = Some(m.len());
            }
            let t = Instant::now();
            let sol = spudd_solve(&mut fm, &cfg.solver_cfg);
            stats.t_solve_ms = millis(t);
            stats.nodes = Some(fm.mgr.allocated());
            let sol = sol?;
            stats.iters = sol.iterations;
            let x = fm.assignment(fm.init, 0);
            stats.v_s0 = Some(fm.mgr.evaluate(sol.value, &x)?);
            if !sol.converged {
                stats.status = Status::NotConverged;
            }
            Ok((fm.mgr.to_dot(sol.policy), Some(fm.mgr.to_dot(sol.value))))
        }
        Method::PltlSim => {
            let t = Instant::now();
            let gen = PltlSimGen::new(d, &cfg.spec)?;
            stats.t_pre_ms = millis(t);
            solve_generator(&gen, cfg, stats).map(|p| (p, None))
        }
        Method::PltlMin => {
            let t = Instant::now();
            let l = pltlmin_preprocess(d, &cfg.spec, cfg.caps.explicit_props)?;
            let gen = PltlMinGen::new(d, &cfg.spec, &l)?;
            stats.t_pre_ms = millis(t);
            solve_generator(&gen, cfg, stats).map(|p| (p, None))
        }
        // No preprocessing: the generator only stores the formulae.
        Method::Fltl => {
            let gen = FltlGen::new(d, &cfg.spec)?;
            solve_generator(&gen, cfg, stats).map(|p| (p, None))
        }
    }
}

fn solve_generator<G: Generator>(gen: &G, cfg: &RunConfig, stats: &mut RunStats) -> Result<String> {
    let lao = match cfg.solver {
        SolverKind::LaoVi => Some(Subroutine::Vi),
        SolverKind::LaoPi => Some(Subroutine::Pi),
        _ => None,
    };
    let h0 = default_heuristic(cfg.spec.max_stage_reward(), cfg.solver_cfg.discount);
    if let (Some(sub), false) = (lao, cfg.expand) {
        let t = Instant::now();
        let r = lao_star(gen, &|_| h0, &cfg.solver_cfg, sub, cfg.caps.max_estates);
        stats.t_solve_ms = millis(t);
        let r = r?;
        stats.estates = Some(r.expanded);
        stats.iters = r.sweeps;
        stats.v_s0 = Some(r.value);
        if !r.converged {
            stats.status = Status::NotConverged;
        }
        return Ok(lao_dump(&r.table, &gen.action_names()));
    }
    let t = Instant::now();
    let full = explore(gen, cfg.caps.max_estates)?;
    let m = if full.dead.iter().any(|&x| x) { full.prune_dead()? } else { full };
    stats.t_exp_ms = millis(t);
    stats.estates = Some(m.len());
    let t = Instant::now();
    if let Some(sub) = lao {
        let r = lao_star(&XmdpGen(&m), &|_| h0, &cfg.solver_cfg, sub, cfg.caps.max_estates);
        stats.t_solve_ms = millis(t);
        let r = r?;
        stats.iters = r.sweeps;
        stats.v_s0 = Some(r.value);
        if !r.converged {
            stats.status = Status::NotConverged;
        }
        return Ok(lao_dump(&r.table, &m.action_names));
    }
    let sol = match cfg.solver {
        SolverKind::Pi => policy_iteration(&m, &cfg.solver_cfg)?,
        _ => value_iteration(&m, &cfg.solver_cfg)?,
    };
    stats.t_solve_ms = millis(t);
    stats.iters = sol.iterations;
    stats.v_s0 = Some(sol.values[m.start]);
    if !sol.converged {
        stats.status = Status::NotConverged;
    }
    Ok(sol.dump(&m))
}

fn lao_dump(table: &[(usize, Option<usize>, f64)], names: &[String]) -> String {
    let mut out = String::new();
    for &(e, a, v) in table {
        let a = a.map_or("-", |a| names[a].as_str());
        let _ = writeln!(out, "{e}, {a}, {v}");
    }
    out
}

/// One sampled execution of a policy.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub trace: Vec<State>,
    pub estates: Vec<usize>,
    /// Σ βᵗ R(eₜ) over the visited e-states.
    pub reward: f64,
}

/// Follows `policy` for `steps` transitions from the start e-state. Stops
/// early at e-states without an action.
pub fn simulate_policy<R: Rng>(
    m: &Xmdp,
    policy: &[Option<usize>],
    discount: f64,
    steps: usize,
    rng: &mut R,
) -> Rollout {
    let mut e = m.start;
    let mut out = Rollout {
        trace: vec![m.states[e]],
        estates: vec![e],
        reward: m.rewards[e],
    };
    let mut weight = 1.0;
    for _ in 0..steps {
        let Some(a) = policy[e] else { break };
        let dist = &m.trans[e][a];
        let mut u: f64 = rng.random();
        let mut next = dist.last().expect("policy uses available actions").0;
        for &(f, p) in dist {
            if u < p {
                next = f;
                break;
            }
            u -= p;
        }
        e = next;
        weight *= discount;
        out.trace.push(m.states[e]);
        out.estates.push(e);
        out.reward += weight * m.rewards[e];
    }
    out
}

/// Mean realized reward over seeded rollouts and its standard error.
pub fn mean_return(
    m: &Xmdp,
    policy: &[Option<usize>],
    discount: f64,
    steps: usize,
    rollouts: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..rollouts)
        .map(|_| simulate_policy(m, policy, discount, steps, &mut rng).reward)
        .collect();
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    (mean, (var / k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gen_builtin, Family, GenParams};
    use crate::logic::parse_fltl;

    #[test]
    fn compatibility_rules() {
        assert!(check_compatible(Method::PltlStr, SolverKind::Vi).is_err());
        assert!(check_compatible(Method::PltlMin, SolverKind::Spudd).is_err());
        assert!(check_compatible(Method::PltlStrA, SolverKind::Spudd).is_ok());
        assert!(check_compatible(Method::Fltl, SolverKind::LaoPi).is_ok());
    }

    #[test]
    fn fltl_has_no_preprocessing() {
        let d = gen_builtin(Family::SpuddLinear, 4, &GenParams::default()).unwrap();
        let spec = RewardSpec::fltl([(parse_fltl("~p4 wun (p4 & $)").unwrap(), 1.0)]);
        let cfg = RunConfig::new(Method::Fltl, SolverKind::LaoVi, d, spec).unwrap();
        let out = run(&cfg).unwrap();
        assert_eq!(out.stats.t_pre_ms, 0.0);
        assert_eq!(out.stats.t_exp_ms, 0.0);
        assert_eq!(out.stats.status, Status::Ok);
    }

    #[test]
    fn steps_zero_is_start_reward() {
        let m = Xmdp {
            action_names: vec!["a".into()],
            states: vec![State(0)],
            labels: vec![String::new()],
            rewards: vec![3.0],
            trans: vec![vec![vec![(0, 1.0)]]],
            dead: vec![false],
            start: 0,
            width: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = simulate_policy(&m, &[Some(0)], 0.9, 0, &mut rng);
        assert_eq!(r.reward, 3.0);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn csv_header_is_fixed() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), CSV_COLUMNS.join(","));
    }
}
