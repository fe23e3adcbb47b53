use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nmrdpp::domain::{gen_builtin, Domain, Family, GenParams};
use nmrdpp::harness::{self, RunConfig, Suite, SuiteOptions};
use nmrdpp::logic::{evaluate_pltl, fltl_prefix_verdict, parse_formula, reward_trace, Dialect, Formula, RewardSpec};
use nmrdpp::solve::{SolverConfig, SolverKind};
use nmrdpp::translate::{self, check_equivalence, Caps, Method};
use nmrdpp::{Error, Result};

#[derive(Parser)]
#[command(name = "nmrdpp", version, about = "Plan with non-Markovian rewards")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    rewards: PathBuf,
    /// File of `control : FORMULA` lines under a `dialect` header.
    #[arg(long)]
    control: Option<PathBuf>,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    max_estates: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Preprocess, optionally expand, then solve.
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        solver: SolverKind,
        /// Overrides the domain's discount.
        #[arg(long)]
        discount: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long)]
        expand: bool,
        /// CSV statistics; stdout when absent.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Structured value diagram (DOT).
        #[arg(long)]
        value: Option<PathBuf>,
    },
    /// Write the expanded MDP.
    Expand {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a benchmark domain.
    GenDomain {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        structure: f64,
        #[arg(long, default_value_t = 0.5)]
        uncertainty: f64,
        #[arg(long, default_value_t = 0.5)]
        success: f64,
        #[arg(long, default_value_t = 0.9)]
        discount: f64,
    },
    /// Check that the expansion is equivalent to the domain and rewards.
    Check {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 6)]
        horizon: usize,
    },
    /// Run an experiment suite and write NAME.csv into DIR.
    Suite {
        #[arg(long)]
        name: Suite,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        max_n_structured: Option<usize>,
    },
    /// Evaluate a formula on a trace file: one state per line listing the
    /// true propositions, `-` for none, `#` comments.
    Oracle {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value = "pltl")]
        dialect: String,
        #[arg(long)]
        trace: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn caps(max_estates: Option<usize>) -> Result<Caps> {
    let mut c = Caps::from_env()?;
    if let Some(m) = max_estates {
        c.max_estates = m;
    }
    Ok(c)
}

fn load(inputs: &Inputs) -> Result<(Domain, RewardSpec)> {
    let d = Domain::parse(&read(&inputs.domain)?)?;
    let mut spec = RewardSpec::parse(&read(&inputs.rewards)?)?;
    if let Some(path) = &inputs.control {
        let c = RewardSpec::parse(&read(path)?)?;
        spec = harness::apply_control(&spec, &c.control)?;
    }
    Ok((d, spec))
}

fn parse_trace(text: &str, atoms: &[String]) -> Vec<HashMap<String, bool>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut v: HashMap<String, bool> = atoms.iter().map(|a| (a.clone(), false)).collect();
        for tok in line.split_whitespace().filter(|t| *t != "-") {
            v.insert(tok.to_string(), true);
        }
        out.push(v);
    }
    out
}

fn exec(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Solve {
            inputs,
            solver,
            discount,
            epsilon,
            expand,
            stats,
            policy,
            value,
        } => {
            let (d, spec) = load(&inputs)?;
            let mut cfg = RunConfig::new(inputs.method, solver, d, spec)?;
            cfg.solver_cfg = SolverConfig::new(discount.unwrap_or(cfg.domain.discount), epsilon)?;
            cfg.caps = caps(inputs.max_estates)?;
            cfg.expand = expand;
            cfg.spec_id = inputs.rewards.display().to_string();
            cfg.family = inputs.domain.display().to_string();
            let out = harness::run(&cfg)?;
            let mut buf = Vec::new();
            harness::write_csv(std::slice::from_ref(&out.stats), &mut buf)?;
            let csv = String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?;
            match stats {
                Some(p) => write(&p, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(p) = policy {
                write(&p, &out.policy)?;
            }
            if let (Some(p), Some(v)) = (value, &out.value_dot) {
                write(&p, v)?;
            }
            Ok(0)
        }
        Cmd::Expand { inputs, out } => {
            let (d, spec) = load(&inputs)?;
            let m = translate::expand(inputs.method, &d, &spec, &caps(inputs.max_estates)?)?;
            match out {
                Some(p) => write(&p, &m.dump())?,
                None => print!("{}", m.dump()),
            }
            eprintln!("{} e-states, {} transitions", m.len(), m.num_transitions());
            Ok(0)
        }
        Cmd::GenDomain {
            family,
            n,
            seed,
            structure,
            uncertainty,
            success,
            discount,
        } => {
            let params = GenParams {
                discount,
                success,
                structure,
                uncertainty,
                seed,
            };
            print!("{}", gen_builtin(family, n, &params)?.to_text());
            Ok(0)
        }
        Cmd::Check { inputs, horizon } => {
            let (d, spec) = load(&inputs)?;
            let m = translate::expand(inputs.method, &d, &spec, &caps(inputs.max_estates)?)?;
            let report = check_equivalence(&d, &spec, &m, horizon)?;
            match report.failure {
                None => {
                    println!("equivalent: {} e-states, {} prefixes checked", m.len(), report.prefixes);
                    Ok(0)
                }
                Some(f) => {
                    println!("not equivalent: {f}");
                    Ok(1)
                }
            }
        }
        Cmd::Suite {
            name,
            out,
            max_n,
            max_n_structured,
        } => {
            let mut opts = SuiteOptions {
                caps: Caps::from_env()?,
                ..SuiteOptions::default()
            };
            if let Some(n) = max_n {
                opts.max_n_explicit = n;
            }
            if let Some(n) = max_n_structured {
                opts.max_n_structured = n;
            }
            let rows = harness::run_suite(name, &opts)?;
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{name}.csv"));
            let file = fs::File::create(&path)?;
            harness::write_csv(&rows, file)?;
            println!("{} rows written to {}", rows.len(), path.display());
            Ok(0)
        }
        Cmd::Oracle {
            formula,
            dialect,
            trace,
        } => {
            let dialect = match dialect.as_str() {
                "pltl" => Dialect::Pltl,
                "fltl" => Dialect::Fltl,
                other => return Err(Error::Config(format!("unknown dialect `{other}`"))),
            };
            let f = parse_formula(&formula, dialect)?;
            let states = parse_trace(&read(&trace)?, &f.atoms());
            if states.is_empty() {
                return Err(Error::Config("empty trace".into()));
            }
            match f {
                Formula::Pltl(p) => {
                    for i in 0..states.len() {
                        println!("{i}, {}", evaluate_pltl(&p, &states[..=i])?);
                    }
                }
                Formula::Fltl(g) => {
                    let rewards = reward_trace(&[(g.clone(), 1.0)], &states)?;
                    for (i, r) in rewards.iter().enumerate() {
                        println!("{i}, {r}");
                    }
                    // only defined for formulae without `$`
                    if let Ok(v) = fltl_prefix_verdict(&g, &states) {
                        println!("verdict, {v:?}");
                    }
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
