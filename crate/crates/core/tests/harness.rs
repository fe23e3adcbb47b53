use nmrdpp::domain::{gen_builtin, Domain, Family, GenParams};
use nmrdpp::harness::pools::{fltl_pool, pltl_pool};
use nmrdpp::harness::{
    apply_control, mean_return, run, run_cell, simulate_policy, write_csv, RunConfig, Status, CSV_COLUMNS,
};
use nmrdpp::logic::RewardSpec;
use nmrdpp::solve::{value_iteration, SolverConfig, SolverKind};
use nmrdpp::translate::{expand, Caps, Method};
use nmrdpp::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `set-p` makes p true for good; `wait` leaves p alone and flips q with
/// even odds.
const LURE: &str = "variables (p q)
action set-p
  p (1)
  q (q (1) (0.5))
endaction
action wait
  p (p (1) (0))
  q (q (1) (0.5))
endaction
discount 0.9
";

const LURE_REWARDS: &str = "dialect fltl
reward big 5 : alw (p -> $)
reward small 1 : alw (q -> $)
";

fn lure() -> (Domain, RewardSpec) {
    (Domain::parse(LURE).unwrap(), RewardSpec::parse(LURE_REWARDS).unwrap())
}

fn controlled(spec: &RewardSpec, text: &str) -> RewardSpec {
    let c = RewardSpec::parse(text).unwrap();
    apply_control(spec, &c.control).unwrap()
}

fn on_off(n: usize) -> Domain {
    gen_builtin(Family::OnOff, n, &GenParams::default()).unwrap()
}

fn spec(pool: &[(String, RewardSpec)], id: &str) -> RewardSpec {
    pool.iter().find(|x| x.0 == id).unwrap().1.clone()
}

#[test]
fn phase_timings_follow_the_method() {
    let d = on_off(3);
    let f = spec(&fltl_pool(3).unwrap(), "first-time");
    let out = run(&RunConfig::new(Method::Fltl, SolverKind::Vi, d.clone(), f).unwrap()).unwrap();
    assert_eq!(out.stats.t_pre_ms, 0.0);
    assert!(out.stats.t_exp_ms > 0.0);

    let p = spec(&pltl_pool(3).unwrap(), "first-time");
    let out = run(&RunConfig::new(Method::PltlMin, SolverKind::Vi, d.clone(), p.clone()).unwrap()).unwrap();
    assert!(out.stats.t_pre_ms > 0.0);
    let m = expand(Method::PltlMin, &d, &p, &Caps::default()).unwrap();
    assert_eq!(out.stats.estates, Some(m.len()));
    assert_eq!(out.stats.states, Some(d.reachable_states().len()));
    assert_eq!(out.stats.status, Status::Ok);
}

#[test]
fn structured_method_needs_structured_solver() {
    let d = on_off(2);
    let p = spec(&pltl_pool(2).unwrap(), "prev");
    let err = RunConfig::new(Method::PltlStr, SolverKind::Vi, d.clone(), p.clone())
        .and_then(|c| run(&c))
        .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert_eq!(err.exit_code(), 2);
    let err = RunConfig::new(Method::PltlSim, SolverKind::Spudd, d, p).and_then(|c| run(&c)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn dialect_mismatch_is_a_config_error() {
    let d = on_off(2);
    let p = spec(&pltl_pool(2).unwrap(), "prev");
    let err = RunConfig::new(Method::Fltl, SolverKind::Vi, d, p).and_then(|c| run(&c)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn trivial_control_changes_nothing() {
    let (d, s) = lure();
    let c = controlled(&s, "dialect fltl\ncontrol : true\n");
    for solver in [SolverKind::Vi, SolverKind::LaoVi] {
        let a = run(&RunConfig::new(Method::Fltl, solver, d.clone(), s.clone()).unwrap()).unwrap();
        let b = run(&RunConfig::new(Method::Fltl, solver, d.clone(), c.clone()).unwrap()).unwrap();
        assert_eq!(a.stats.v_s0, b.stats.v_s0);
        assert_eq!(a.policy, b.policy);
    }
}

#[test]
fn control_keeps_the_policy_away_from_p() {
    let (d, s) = lure();
    let caps = Caps::default();
    let cfg = SolverConfig::new(0.9, 1e-6).unwrap();
    // unconstrained, setting p pays
    let free = expand(Method::Fltl, &d, &s, &caps).unwrap();
    let free_sol = value_iteration(&free, &cfg).unwrap();
    assert_eq!(free_sol.policy[free.start], Some(0));

    let c = controlled(&s, "dialect fltl\ncontrol : alw ~p\n");
    let m = expand(Method::Fltl, &d, &c, &caps).unwrap().prune_dead().unwrap();
    let sol = value_iteration(&m, &cfg).unwrap();
    assert!(sol.values[m.start] < free_sol.values[free.start]);
    let p = d.prop_index("p").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let r = simulate_policy(&m, &sol.policy, 0.9, 30, &mut rng);
        assert_eq!(r.trace.len(), 31);
        assert!(r.trace.iter().all(|s| !s.get(p)));
    }
    for solver in [SolverKind::Vi, SolverKind::Pi, SolverKind::LaoVi] {
        let out = run(&RunConfig::new(Method::Fltl, solver, d.clone(), c.clone()).unwrap()).unwrap();
        assert!((out.stats.v_s0.unwrap() - sol.values[m.start]).abs() <= 2e-6, "{solver}");
        assert!(!out.policy.contains("set-p"), "{solver}");
    }
}

#[test]
fn pltl_control_is_enforced_too() {
    let (d, _) = lure();
    let s = RewardSpec::parse("dialect pltl\nreward big 5 : p\nreward small 1 : q\ncontrol : ~p\n").unwrap();
    for method in [Method::PltlSim, Method::PltlMin] {
        for solver in [SolverKind::Vi, SolverKind::LaoVi] {
            let out = run(&RunConfig::new(method, solver, d.clone(), s.clone()).unwrap()).unwrap();
            assert!(!out.policy.contains("set-p"), "{method} {solver}");
        }
    }
}

#[test]
fn control_forbidding_the_start_is_infeasible() {
    let (d, s) = lure();
    let c = controlled(&s, "dialect fltl\ncontrol : q\n");
    for solver in [SolverKind::Vi, SolverKind::LaoVi] {
        let cfg = RunConfig::new(Method::Fltl, solver, d.clone(), c.clone()).unwrap();
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{solver}: {err}");
        assert_eq!(err.exit_code(), 5);
        assert_eq!(run_cell(&cfg).status, Status::Infeasible);
    }
}

#[test]
fn cap_exhaustion_is_reported() {
    let d = on_off(4);
    let f = spec(&fltl_pool(4).unwrap(), "first-time");
    let mut cfg = RunConfig::new(Method::Fltl, SolverKind::Vi, d, f).unwrap();
    cfg.caps.max_estates = 3;
    let err = run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert_eq!(run_cell(&cfg).status, Status::Cap);
}

#[test]
fn simulated_returns_match_values() {
    let d = on_off(3);
    let cfg = SolverConfig::new(0.9, 1e-6).unwrap();
    let steps = 250;
    for (id, s) in fltl_pool(3).unwrap() {
        let m = expand(Method::Fltl, &d, &s, &Caps::default()).unwrap();
        let sol = value_iteration(&m, &cfg).unwrap();
        let v = sol.values[m.start];
        let tail = 0.9f64.powi(steps as i32 + 1) * m.max_reward().abs().max(m.min_reward().abs()) / 0.1;
        let (mean, se) = mean_return(&m, &sol.policy, 0.9, steps, 10_000, 42);
        assert!((mean - v).abs() <= 3.0 * se + tail + 2e-6, "{id}: {mean} ± {se} vs {v}");
    }
}

#[test]
fn deterministic_domain_returns_the_value_exactly() {
    let d = Domain::parse(
        "variables (a b)\naction flip\n  a (a (0) (1))\n  b (a (1) (b (1) (0)))\nendaction\naction hold\n  a (a (1) (0))\n  b (b (1) (0))\nendaction\ndiscount 0.8\n",
    )
    .unwrap();
    let s = RewardSpec::parse("dialect fltl\nreward r 3 : alw (b -> $)\nreward s 1 : a & next (~a -> $)\n").unwrap();
    let m = expand(Method::Fltl, &d, &s, &Caps::default()).unwrap();
    let sol = value_iteration(&m, &SolverConfig::new(0.8, 1e-9).unwrap()).unwrap();
    let steps = 200;
    let tail = 0.8f64.powi(steps as i32 + 1) * 4.0 / 0.2;
    let (mean, se) = mean_return(&m, &sol.policy, 0.8, steps, 10, 3);
    assert!(se <= 1e-12);
    assert!((mean - sol.values[m.start]).abs() <= tail + 2e-9);
}

#[test]
fn identical_configs_give_identical_results() {
    let params = GenParams {
        seed: 9,
        ..GenParams::default()
    };
    let d = gen_builtin(Family::Random, 4, &params).unwrap();
    let p = spec(&pltl_pool(4).unwrap(), "since");
    let f = spec(&fltl_pool(4).unwrap(), "until");
    let cells = [
        (Method::PltlSim, SolverKind::Vi, &p),
        (Method::PltlMin, SolverKind::Pi, &p),
        (Method::PltlStrA, SolverKind::Spudd, &p),
        (Method::Fltl, SolverKind::LaoVi, &f),
        (Method::Fltl, SolverKind::LaoPi, &f),
    ];
    for (method, solver, s) in cells {
        let mut cfg = RunConfig::new(method, solver, d.clone(), s.clone()).unwrap();
        cfg.seed = 9;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.stats.timeless(), b.stats.timeless(), "{method} {solver}");
        assert_eq!(a.policy, b.policy);
        assert_eq!(a.value_dot, b.value_dot);
    }
}

#[test]
fn csv_has_the_fixed_schema() {
    let d = on_off(2);
    let mut rows = Vec::new();
    for (id, s) in pltl_pool(2).unwrap().into_iter().take(3) {
        for (method, solver) in [(Method::PltlMin, SolverKind::Vi), (Method::PltlStr, SolverKind::Spudd)] {
            let mut cfg = RunConfig::new(method, solver, d.clone(), s.clone()).unwrap();
            cfg.spec_id = format!("{id}, \"quoted\"");
            cfg.family = "on-off".into();
            cfg.n = 2;
            rows.push(run_cell(&cfg));
        }
    }
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    let recs: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), rows.len());
    let mut keys = Vec::new();
    for rec in &recs {
        assert_eq!(rec.len(), 14);
        assert!(rec[4].ends_with(", \"quoted\""));
        assert_eq!(&rec[13], "ok");
        for col in [8, 9, 10, 12] {
            rec[col].parse::<f64>().unwrap();
        }
        keys.push((rec[4].to_string(), rec[0].to_string(), rec[1].to_string()));
    }
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}
