use std::fmt::Write as _;
use std::path::Path;

use preempt::scenario::SimulationBlock;
use preempt::simulator::WORKERS_ENV;
use preempt::{
    analyze as analyze_scenario, estimate_moments, parse_scenario, to_json, Error, MomentReport,
    ScenarioFile, SimulationEstimate,
};

pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Largest |z| accepted by `validate`.
const Z_LIMIT: f64 = 5.0;

/// Default sample count for `validate` when the file has no simulation block.
const VALIDATE_N: u64 = 1_000_000;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::UnsupportedForDeterministic(_) => EXIT_INPUT,
            Error::AtomCollision(_)
            | Error::NeverCompletes
            | Error::UndefinedMoment(_)
            | Error::AttemptCapExceeded { .. } => EXIT_DEGENERATE,
            Error::QuadratureFailure(_) | Error::InconsistentMoments(_) => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| input_error(format!("{}:{e}", path.display())))
}

fn workers() -> Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(Some(w)),
            _ => Err(input_error(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

fn header(out: &mut String, file: &ScenarioFile) {
    let _ = writeln!(out, "scenario: {}", file.name);
    let _ = writeln!(out, "uptime:   {}", file.uptime);
    let _ = writeln!(out, "downtime: {}", file.downtime);
    let _ = writeln!(out, "proc:     {}", file.proc);
}

fn render_report(file: &ScenarioFile, r: &MomentReport) -> String {
    let mut out = String::new();
    header(&mut out, file);
    let _ = writeln!(out);
    let _ = writeln!(out, "q      = {}", r.q);
    let _ = writeln!(out, "a      = {}", opt(r.cm.a));
    let _ = writeln!(out, "b      = {}", opt(r.cm.b));
    let _ = writeln!(out, "c      = {}", opt(r.cm.c));
    let _ = writeln!(out, "d      = {}", opt(r.cm.d));
    let _ = writeln!(out, "E[R]   = {}", r.e_r);
    let _ = writeln!(out, "E[R^2] = {}", r.e_r2);
    let _ = writeln!(out, "Var[R] = {}", r.var_r);
    let _ = writeln!(out);
    for note in &r.method_notes {
        let _ = writeln!(out, "method: {note}");
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w:?}");
    }
    out
}

pub fn analyze(path: &Path, json: bool) -> Result<u8, Failure> {
    let file = load(path)?;
    let report = analyze_scenario(&file.environment())?;
    if json {
        println!("{}", to_json(&report));
    } else {
        print!("{}", render_report(&file, &report));
    }
    Ok(0)
}

fn sim_settings(
    file: &ScenarioFile,
    n: Option<u64>,
    seed: Option<u64>,
    default_n: u64,
) -> Result<SimulationBlock, Failure> {
    let block = file.simulation.unwrap_or(SimulationBlock {
        n: default_n,
        ..Default::default()
    });
    SimulationBlock::new(
        n.unwrap_or(block.n),
        seed.unwrap_or(block.seed),
        block.max_attempts,
    )
    .map_err(input_error)
}

fn run(file: &ScenarioFile, block: SimulationBlock) -> Result<SimulationEstimate, Failure> {
    let workers = workers()?;
    Ok(estimate_moments(
        &file.environment(),
        block.n,
        block.seed,
        block.max_attempts,
        workers,
    )?)
}

pub fn simulate(path: &Path, json: bool, n: Option<u64>, seed: Option<u64>) -> Result<u8, Failure> {
    let file = load(path)?;
    let block = sim_settings(&file, n, seed, SimulationBlock::default().n)?;
    let est = run(&file, block)?;
    if json {
        println!("{}", to_json(&est));
    } else {
        let mut out = String::new();
        header(&mut out, &file);
        let _ = writeln!(out);
        let _ = writeln!(out, "n             = {}", est.n);
        let _ = writeln!(out, "seed          = {}", est.seed);
        let _ = writeln!(out, "max_attempts  = {}", est.max_attempts);
        let _ = writeln!(out, "mean R        = {} ± {}", est.mean_r, est.se_mean);
        let _ = writeln!(out, "mean R^2      = {} ± {}", est.mean_r2, est.se_mean2);
        let _ = writeln!(out, "mean attempts = {}", est.mean_attempts);
        print!("{out}");
    }
    Ok(0)
}

fn z_score(simulated: f64, analytic: f64, se: f64) -> f64 {
    let diff = simulated - analytic;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * analytic.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

pub fn validate(
    path: &Path,
    n: Option<u64>,
    seed: Option<u64>,
    perturb: f64,
) -> Result<u8, Failure> {
    let file = load(path)?;
    let block = sim_settings(&file, n, seed, VALIDATE_N)?;
    let report = analyze_scenario(&file.environment())?;
    let est = run(&file, block)?;

    let e_r2 = report.e_r2 * perturb;
    let rows = [
        ("E[R]", report.e_r, est.mean_r, est.se_mean),
        ("E[R^2]", e_r2, est.mean_r2, est.se_mean2),
    ];

    let mut out = String::new();
    header(&mut out, &file);
    let _ = writeln!(out, "n = {}, seed = {}, q = {}", est.n, est.seed, report.q);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8} {:>24} {:>24} {:>24} {:>10}",
        "quantity", "analytic", "simulated", "std. error", "z"
    );
    let mut pass = true;
    for (label, analytic, simulated, se) in rows {
        let z = z_score(simulated, analytic, se);
        pass &= z.abs() <= Z_LIMIT;
        let _ = writeln!(
            out,
            "{label:<8} {analytic:>24} {simulated:>24} {se:>24} {z:>10.4}"
        );
    }
    let _ = writeln!(out);
    if pass {
        let _ = writeln!(out, "result: PASS (|z| <= {Z_LIMIT} for both moments)");
    } else {
        let _ = writeln!(out, "result: FAIL (|z| > {Z_LIMIT})");
    }
    print!("{out}");
    Ok(if pass { 0 } else { EXIT_MISMATCH })
}
