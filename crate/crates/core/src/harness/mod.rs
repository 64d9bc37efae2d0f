//! Experiment front end: resolved configurations in, reports out.
//!
//! Reports are plain JSON (schema 1) or CSV and contain everything needed to
//! re-derive their pass/fail decisions offline: the resolved configuration,
//! the master seed, the schedule constants and the bound formulas used.

pub mod config;
pub mod verify;

use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::ae::{
    baseline_samples, estimate_from_outcome, grid_size, majority_rounds, mass_midpoint,
    mass_thresholds, nonlocal_projection_mass, qae_outcome_law, round_query_bound,
    round_time_bound, run_ae_tester, run_baseline_tester, AeConfig, QaeMode, ROUND_QUERY_FORMULA,
    ROUND_TIME_FORMULA,
};
use crate::bell::BellProjector;
use crate::error::{Error, Result};
use crate::lower_bound::{
    distinguishability_sweep, pair_distance_table, sweep_csv, SweepConfig, TesterKind, ZChainPair,
};
use crate::oracle::{Direction, EvolutionOracle};
use crate::pauli::HamiltonianSpec;
use crate::trials::WorkerPool;
use crate::trotter::{
    decision_probabilities, plan_schedule, primitive_probabilities, query_budget, run_tester,
    time_budget, Decision, Verdict, QUERY_BUDGET_FORMULA, TIME_BUDGET_FORMULA,
};

pub use config::{Command, Format, HamiltonianSource, Mode, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const INCONCLUSIVE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BOUND_VIOLATION: i32 = 3;
}

/// Exit code for an error raised while running a command.
pub fn error_exit_code(_err: &Error) -> i32 {
    exit::USAGE
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
    /// Human-readable notes for stderr.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub formula: &'static str,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: &'static str, formula: &'static str, bound: f64, measured: f64) -> Self {
        BoundCheck {
            name,
            formula,
            bound,
            measured,
            pass: measured <= bound,
        }
    }
}

pub fn run(cfg: &RunConfig, pool: &WorkerPool) -> Result<Output> {
    match cfg.command {
        Command::Test => run_test(cfg, pool),
        Command::Sweep => run_sweep(cfg, pool),
        Command::Verify => run_verify(cfg),
        Command::Lowerbound => run_lowerbound(cfg),
    }
}

fn to_json(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn header(cfg: &RunConfig, white_box: bool) -> Result<serde_json::Map<String, Value>> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), serde_json::to_value(cfg.command)?);
    m.insert("white_box".into(), json!(white_box));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert("config".into(), serde_json::to_value(cfg)?);
    Ok(m)
}

fn hamiltonian_json(h: &HamiltonianSpec) -> Value {
    let terms: Vec<Value> = h
        .terms()
        .terms()
        .map(|(p, c)| json!({"pauli": p.to_string(), "coefficient": c}))
        .collect();
    json!({
        "num_qubits": h.num_qubits(),
        "terms": terms,
        "spectral_norm": h.spectral_norm(),
        "stripped_identity": h.stripped_identity(),
    })
}

fn decision_exit(decision: Decision) -> i32 {
    match decision {
        Decision::Inconclusive => exit::INCONCLUSIVE,
        _ => exit::OK,
    }
}

fn p_at_least(n: u64, p: f64, c: u64) -> f64 {
    if c == 0 {
        return 1.0;
    }
    if c > n {
        return 0.0;
    }
    match Binomial::new(p.clamp(0.0, 1.0), n) {
        Ok(b) => 1.0 - b.cdf(c - 1),
        Err(_) => 0.0,
    }
}

/// `test`: one tester run, or its exact decision law in exact mode.
pub fn run_test(cfg: &RunConfig, pool: &WorkerPool) -> Result<Output> {
    let source = cfg
        .hamiltonian
        .as_ref()
        .ok_or_else(|| Error::Usage("test needs a Hamiltonian source".into()))?;
    let h = source.load()?;
    let spec = cfg.spec()?;
    spec.check_qubits(h.num_qubits())?;
    let white_box = cfg.mode == Mode::Exact
        || (cfg.algorithm == TesterKind::Ae && cfg.qae_mode == QaeMode::Ideal);
    let mut report = header(cfg, white_box)?;
    report.insert("algorithm".into(), serde_json::to_value(cfg.algorithm)?);
    report.insert("hamiltonian".into(), hamiltonian_json(&h));

    if cfg.mode == Mode::Exact {
        let exact = exact_decision_law(cfg, &h)?;
        report.insert("exact".into(), exact);
        return Ok(Output {
            body: to_json(&Value::Object(report))?,
            exit_code: exit::OK,
            diagnostics: Vec::new(),
        });
    }

    // capability checks happen before any query is issued
    match cfg.algorithm {
        TesterKind::Trotter | TesterKind::Baseline => {
            cfg.access.require(Direction::Forward, false)?
        }
        TesterKind::Ae => {
            cfg.access.require(Direction::Forward, false)?;
            cfg.access.require(Direction::Inverse, true)?;
            cfg.access.require(Direction::Forward, true)?;
        }
    }
    let oracle = EvolutionOracle::new(h, cfg.access);
    let (verdict, bounds): (Verdict, Vec<BoundCheck>) = match cfg.algorithm {
        TesterKind::Trotter => {
            let sched = plan_schedule(&spec)?;
            report.insert("schedule".into(), serde_json::to_value(sched)?);
            let v = run_tester(&oracle, &spec, cfg.seed, pool)?;
            let bounds = vec![
                BoundCheck::new(
                    "total evolution time",
                    TIME_BUDGET_FORMULA,
                    time_budget(&spec),
                    v.transcript.total_evolution_time(),
                ),
                BoundCheck::new(
                    "query count",
                    QUERY_BUDGET_FORMULA,
                    query_budget(&spec),
                    v.transcript.query_count() as f64,
                ),
            ];
            (v, bounds)
        }
        TesterKind::Ae => {
            let ae_cfg = AeConfig::new(&spec, cfg.c)?;
            let v = run_ae_tester(&oracle, &spec, &ae_cfg, cfg.qae_mode, cfg.seed, pool)?;
            let max_time = v
                .rounds
                .iter()
                .map(|r| r.cost.total_evolution_time)
                .fold(0.0, f64::max);
            let max_queries = v
                .rounds
                .iter()
                .map(|r| r.cost.query_count)
                .max()
                .unwrap_or(0);
            report.insert(
                "amplitude_estimation".into(),
                json!({
                    "c": ae_cfg.c,
                    "xi": ae_cfg.xi,
                    "alpha": ae_cfg.alpha,
                    "mode": v.mode,
                    "grid": v.grid,
                    "grover_calls": v.rounds.first().map(|r| r.grover_calls).unwrap_or(0),
                    "midpoint": v.midpoint,
                    "rounds": v.rounds,
                }),
            );
            let bounds = vec![
                BoundCheck::new(
                    "per-round evolution time",
                    ROUND_TIME_FORMULA,
                    round_time_bound(&spec),
                    max_time,
                ),
                BoundCheck::new(
                    "per-round query count",
                    ROUND_QUERY_FORMULA,
                    round_query_bound(&spec, cfg.c),
                    max_queries as f64,
                ),
            ];
            (v.verdict, bounds)
        }
        TesterKind::Baseline => {
            let ae_cfg = AeConfig::new(&spec, cfg.c)?;
            let (low, high) = mass_thresholds(spec.eps1, spec.eps2, cfg.c);
            report.insert(
                "baseline".into(),
                json!({
                    "c": ae_cfg.c,
                    "alpha": ae_cfg.alpha,
                    "low": low,
                    "high": high,
                    "midpoint": mass_midpoint(spec.eps1, spec.eps2, cfg.c),
                    "samples": baseline_samples(&spec, cfg.c),
                    "samples_formula": "ceil((low + gap/3) * 2 ln(2/delta) / (gap/2)^2), gap = high - low",
                }),
            );
            (
                run_baseline_tester(&oracle, &spec, &ae_cfg, cfg.seed, pool)?,
                Vec::new(),
            )
        }
    };
    let code = decision_exit(verdict.decision);
    let mut diagnostics: Vec<String> = bounds
        .iter()
        .filter(|b| !b.pass)
        .map(|b| {
            format!(
                "{} {} exceeds {} ({})",
                b.name, b.measured, b.bound, b.formula
            )
        })
        .collect();
    if verdict.decision == Decision::Inconclusive {
        diagnostics.push(format!(
            "inconclusive: {} successes in {} trials",
            verdict.successes, verdict.trials
        ));
    }
    report.insert("verdict".into(), serde_json::to_value(&verdict)?);
    report.insert("bounds".into(), serde_json::to_value(&bounds)?);
    Ok(Output {
        body: to_json(&Value::Object(report))?,
        exit_code: code,
        diagnostics,
    })
}

/// Decision probabilities computed from the Hamiltonian, without an oracle.
fn exact_decision_law(cfg: &RunConfig, h: &HamiltonianSpec) -> Result<Value> {
    let spec = cfg.spec()?;
    let n = h.num_qubits();
    Ok(match cfg.algorithm {
        TesterKind::Trotter => {
            let sched = plan_schedule(&spec)?;
            let law = primitive_probabilities(h, &BellProjector::locality_d(n, spec.k), &sched);
            let d = decision_probabilities(&law, &sched);
            json!({
                "schedule": sched,
                "primitive": {"abort": law.p_abort, "zero": law.p_zero, "one": law.p_one},
                "decision": d,
            })
        }
        TesterKind::Ae => {
            let ae_cfg = AeConfig::new(&spec, cfg.c)?;
            let eta = nonlocal_projection_mass(h, spec.k, ae_cfg.alpha);
            let (_, high) = mass_thresholds(spec.eps1, spec.eps2, cfg.c);
            let grid = grid_size(high, ae_cfg.xi);
            let mid = mass_midpoint(spec.eps1, spec.eps2, cfg.c);
            let round_far: f64 = qae_outcome_law(eta, grid)
                .iter()
                .enumerate()
                .filter(|(y, _)| estimate_from_outcome(*y as u64, grid) >= mid)
                .map(|(_, p)| p)
                .sum();
            let rounds = majority_rounds(spec.delta);
            let far = p_at_least(rounds, round_far, rounds / 2 + 1);
            json!({
                "mass": eta,
                "grid": grid,
                "midpoint": mid,
                "round_far_probability": round_far,
                "rounds": rounds,
                "decision": {"local": 1.0 - far, "far": far, "inconclusive": 0.0},
            })
        }
        TesterKind::Baseline => {
            let ae_cfg = AeConfig::new(&spec, cfg.c)?;
            let eta = nonlocal_projection_mass(h, spec.k, ae_cfg.alpha);
            let samples = baseline_samples(&spec, cfg.c);
            let mid = mass_midpoint(spec.eps1, spec.eps2, cfg.c);
            let c = (samples as f64 * mid).ceil() as u64;
            let far = p_at_least(samples, eta, c);
            json!({
                "mass": eta,
                "samples": samples,
                "midpoint": mid,
                "decision": {"local": 1.0 - far, "far": far, "inconclusive": 0.0},
            })
        }
    })
}

/// `sweep`: the tester on the chain pair over several gaps.
pub fn run_sweep(cfg: &RunConfig, pool: &WorkerPool) -> Result<Output> {
    if cfg.gaps.len() < 2 {
        return Err(Error::Usage("sweep needs at least two gap values".into()));
    }
    if cfg.mode == Mode::Exact {
        return Err(Error::Usage(
            "sweep runs the testers against the oracle; exact mode does not apply".into(),
        ));
    }
    let sweep = SweepConfig {
        tester: cfg.algorithm,
        eps1: cfg.eps1,
        gaps: cfg.gaps.clone(),
        delta: cfg.delta,
        n: cfg.n,
        k: cfg.k,
        k_prime: cfg.k_prime,
        reps: cfg.reps,
        ae: cfg.ae_settings(),
        seed: cfg.seed,
    };
    let result = distinguishability_sweep(&sweep, pool)?;
    let body = match cfg.format {
        Format::Csv => sweep_csv(&result),
        Format::Json => {
            let mut report = header(cfg, false)?;
            report.insert("points".into(), serde_json::to_value(&result.points)?);
            report.insert("fit".into(), serde_json::to_value(result.fit)?);
            report.insert("time_floor_formula".into(), json!("(eps2 - eps1)^-1 / 50"));
            to_json(&Value::Object(report))?
        }
    };
    Ok(Output {
        body,
        exit_code: exit::OK,
        diagnostics: Vec::new(),
    })
}

/// `verify`: the invariant battery; exit 3 if anything fails.
pub fn run_verify(cfg: &RunConfig) -> Result<Output> {
    let settings = verify::VerifySettings {
        suite_size: cfg.suite_size,
        step_scale: cfg.step_scale,
        seed: cfg.seed,
    };
    let rows = verify::run_battery(&settings)?;
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    let diagnostics = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| {
            format!(
                "check failed: {} ({} of {} cases): {}",
                r.check, r.violations, r.cases, r.statement
            )
        })
        .collect();
    let code = if failed.is_empty() {
        exit::OK
    } else {
        exit::BOUND_VIOLATION
    };
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("check,cases,violations,measured,relation,bound,pass\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.check, r.cases, r.violations, r.measured, r.relation, r.bound, r.pass
                ));
            }
            s
        }
        Format::Json => {
            let mut report = header(cfg, true)?;
            report.insert("checks".into(), serde_json::to_value(&rows)?);
            report.insert("failed".into(), json!(failed));
            to_json(&Value::Object(report))?
        }
    };
    Ok(Output {
        body,
        exit_code: code,
        diagnostics,
    })
}

/// `lowerbound`: distances between the chain pair's evolutions over time.
pub fn run_lowerbound(cfg: &RunConfig) -> Result<Output> {
    if cfg.times.is_empty() {
        return Err(Error::Usage(
            "lowerbound needs at least one time value".into(),
        ));
    }
    let pair = ZChainPair::new(cfg.n, cfg.k_prime, cfg.eps1, cfg.eps2)?;
    let rows = pair_distance_table(&pair, &cfg.times)?;
    let agree = rows.iter().all(|r| r.agrees(1e-9));
    let within = rows
        .iter()
        .all(|r| r.within_linear() && r.diamond_within_linear());
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("t,generic,closed_form,linear,diamond_lo,diamond_hi\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.t, r.generic, r.closed_form, r.linear, r.diamond_lo, r.diamond_hi
                ));
            }
            s
        }
        Format::Json => {
            let mut report = header(cfg, false)?;
            report.insert("pair".into(), serde_json::to_value(pair)?);
            report.insert("rows".into(), serde_json::to_value(&rows)?);
            report.insert(
                "closed_form".into(),
                json!("2 min(|sin((eps2 - eps1) t / 2)|, |cos((eps2 - eps1) t / 2)|)"),
            );
            report.insert("closed_form_agrees".into(), json!(agree));
            report.insert("within_linear_bound".into(), json!(within));
            to_json(&Value::Object(report))?
        }
    };
    Ok(Output {
        body,
        exit_code: exit::OK,
        diagnostics: Vec::new(),
    })
}
