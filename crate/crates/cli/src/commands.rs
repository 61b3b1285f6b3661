use delayopt_core::verify::fd::FdConfig;
use delayopt_core::verify::mc::{self, truncation_horizon, McConfig};
use delayopt_core::verify::{verify_solution, VerifyConfig};
use delayopt_core::{describe, solve, EntryRule, Error, ExitRule, Outcome, ProjectParams, Solution};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{Format, Sink};
use crate::RunArgs;

const DEFAULT_PATHS: usize = 20_000;
const DEFAULT_DT: f64 = 0.005;
const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_GRID: usize = 4000;
const DEFAULT_PMIN: f64 = 0.2;
const DEFAULT_PMAX: f64 = 20.0;
const DEFAULT_STEPS: usize = 100;

fn finite(params: &ProjectParams) -> Result<Solution, CliError> {
    match solve(params)? {
        Outcome::Finite(sol) => Ok(*sol),
        Outcome::InfiniteValue { .. } => Err(Error::Precondition(
            "r <= mu: the value is infinite (enter at once, never exit); nothing to tabulate or simulate"
                .into(),
        )
        .into()),
    }
}

/// Time step: `--dt` as given, or the default shrunk so that the delay is a
/// whole number of steps.
fn time_step(args: &RunArgs, params: &ProjectParams) -> f64 {
    match args.dt {
        Some(dt) => dt,
        None if params.delta > 0.0 => params.delta / (params.delta / DEFAULT_DT).ceil(),
        None => DEFAULT_DT,
    }
}

fn mc_config(args: &RunArgs, sol: &Solution) -> Result<McConfig, CliError> {
    let t_max = match args.tmax {
        Some(t) => t,
        None => truncation_horizon(&sol.params, sol.params.p0, sol.value_at_p0()?),
    };
    Ok(McConfig {
        n_paths: args.paths.unwrap_or(DEFAULT_PATHS),
        dt: time_step(args, &sol.params),
        t_max,
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        antithetic: false,
    })
}

/// Optimal rules, with the upper entry trigger replaced if requested.
fn candidate_rules(args: &RunArgs, sol: &Solution) -> Result<(EntryRule, ExitRule), CliError> {
    let Some(p) = args.override_p_i2 else {
        return Ok((sol.entry_rule, sol.exit_rule));
    };
    let entry = match sol.entry_rule {
        EntryRule::HitOutsideBand { lower, .. } => EntryRule::HitOutsideBand { lower, upper: p },
        EntryRule::HitAbove(_) => EntryRule::HitAbove(p),
        EntryRule::Immediately | EntryRule::Never => {
            return Err(CliError::Config(format!(
                "--override-pI2: regime {} has no upper entry trigger",
                sol.regime
            )))
        }
    };
    Ok((entry, sol.exit_rule))
}

pub fn solve_cmd(params: &ProjectParams, sink: &mut Sink, format: Format) -> Result<(), CliError> {
    let outcome = solve(params)?;
    sink.record(&describe(&outcome), format)
}

pub fn table_cmd(args: &RunArgs, params: &ProjectParams, sink: &mut Sink, format: Format) -> Result<(), CliError> {
    let sol = finite(params)?;
    let p_min = args.pmin.unwrap_or(DEFAULT_PMIN);
    let p_max = args.pmax.unwrap_or(DEFAULT_PMAX);
    let steps = args.steps.unwrap_or(DEFAULT_STEPS);
    if !(p_min > 0.0 && p_max >= p_min && p_max.is_finite()) {
        return Err(CliError::Config(format!(
            "need 0 < pmin <= pmax, got pmin = {p_min}, pmax = {p_max}"
        )));
    }
    let prices: Vec<f64> = if p_min == p_max || steps == 0 {
        vec![p_min]
    } else {
        (0..=steps)
            .map(|k| if k == steps { p_max } else { p_min + (p_max - p_min) * k as f64 / steps as f64 })
            .collect()
    };
    let coeffs = sol.coeffs;
    let rows = prices
        .into_iter()
        .map(|p| {
            let g = sol.exit.eval(p)?;
            Ok(vec![p, g, sol.entry.eval(p)?, -coeffs.exit_cost(p), g - coeffs.entry_cost(p)])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    sink.table(&["p", "G", "H", "exit_obstacle", "entry_obstacle"], &rows, format)
}

#[derive(Serialize)]
struct SimulationReport {
    p0: f64,
    entry_rule: EntryRule,
    exit_rule: ExitRule,
    closed_form_value: f64,
    mean: f64,
    std_error: f64,
    n_effective: usize,
    n_overflow: usize,
    truncation_bound: f64,
    n_paths: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
}

pub fn simulate_cmd(args: &RunArgs, params: &ProjectParams, sink: &mut Sink, format: Format) -> Result<(), CliError> {
    let sol = finite(params)?;
    let cfg = mc_config(args, &sol)?;
    let (entry, exit) = candidate_rules(args, &sol)?;
    let out = mc::simulate_policy(params, entry, exit, &cfg)?;
    let report = SimulationReport {
        p0: params.p0,
        entry_rule: entry,
        exit_rule: exit,
        closed_form_value: sol.value_at_p0()?,
        mean: out.mean,
        std_error: out.std_error,
        n_effective: out.n_effective,
        n_overflow: out.n_overflow,
        truncation_bound: out.truncation_bound,
        n_paths: cfg.n_paths,
        dt: cfg.dt,
        t_max: cfg.t_max,
        seed: cfg.seed,
    };
    sink.record(&report, format)
}

pub fn verify_cmd(args: &RunArgs, params: &ProjectParams, sink: &mut Sink, format: Format) -> Result<(), CliError> {
    let sol = finite(params)?;
    let mc = mc_config(args, &sol)?;
    let window = (args.pmin.unwrap_or(DEFAULT_PMIN), args.pmax.unwrap_or(DEFAULT_PMAX));
    let mut triggers = sol.entry.trigger_prices();
    triggers.extend(sol.exit.p_o);
    let top = triggers.iter().fold(2.0 * window.1, |m, &t| m.max(4.0 * t));
    let cfg = VerifyConfig {
        mc,
        fd: FdConfig::new(args.grid.unwrap_or(DEFAULT_GRID), window.0, top),
        fd_window: window,
    };
    let (entry, exit) = candidate_rules(args, &sol)?;
    let report = verify_solution(&sol, entry, exit, &cfg)?;
    sink.record(&report, format)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = [
            ("mc_value", report.mc_value.passed),
            ("fd", report.fd.passed),
            ("dominance", report.dominance.passed),
            ("transform", report.transform.passed),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect();
        Err(CliError::VerificationFailed(format!("failed checks: {}", failed.join(", "))))
    }
}
