//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use delayopt_core::verify::fd::FdConfig;
use delayopt_core::verify::mc::{equivalence_residuals, truncation_horizon, McConfig, PolicySpec};
use delayopt_core::verify::{dominance_check_with_extra, fd_levels_pass};
use delayopt_core::{
    classify, delayed_payoff_equivalence_residual, describe, lambda_roots, solve, solve_exit,
    EntryCoefficients, EntryRule, EntryTriggers, ExitRule, Outcome, ProjectParams, Regime, Solution,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FUZZ_PER_REGIME: usize = 1000;

fn golden() -> ProjectParams {
    ProjectParams {
        r: 0.2,
        mu: 0.1,
        sigma: 0.3,
        delta: 1.0,
        c: 10.0,
        k_i: -20.0,
        k_o: 10.0,
        p0: 3.0,
    }
}

fn finite(params: &ProjectParams) -> Solution {
    match solve(params).expect("solve") {
        Outcome::Finite(sol) => *sol,
        Outcome::InfiniteValue { .. } => panic!("unexpected infinite value for {params:?}"),
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Verdict { passed: false, detail: format!("panicked: {msg}") }
    });
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = verdict.passed && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0}s", l.as_secs_f64()));
    println!(
        "criterion {id} [{}] {name}: {}; {:.2}s{budget}",
        if passed { "PASS" } else { "FAIL" },
        verdict.detail,
        elapsed.as_secs_f64(),
    );
    passed
}

fn golden_triggers() -> Verdict {
    let params = golden();
    let sol = finite(&params);
    let report = describe(&Outcome::Finite(Box::new(sol)));
    let bound = (-params.mu * params.delta).exp() * (params.c + params.r * params.k_i);
    let got = [report.p_o, report.p_i1, report.p_i2, Some(bound)];
    let want = [2.66841, 1.96101, 6.94641, 5.42902];
    let ok = sol.regime == Regime::DoubleEntryExit
        && got.iter().zip(want).all(|(g, w)| g.is_some_and(|g| (g - w).abs() <= 1e-4));
    Verdict {
        passed: ok,
        detail: format!(
            "regime {}, p_O {:.6}, p_I1 {:.6}, p_I2 {:.6}, bound {:.6}",
            sol.regime,
            got[0].unwrap_or(f64::NAN),
            got[1].unwrap_or(f64::NAN),
            got[2].unwrap_or(f64::NAN),
            bound
        ),
    }
}

/// Random parameters with `r > mu`; cost levels are filled in per regime.
fn base_params(rng: &mut ChaCha8Rng) -> ProjectParams {
    let r = rng.random_range(0.02..0.3);
    ProjectParams {
        r,
        mu: r - rng.random_range(0.01..0.25),
        sigma: rng.random_range(0.05..0.8),
        delta: rng.random_range(0.0..3.0),
        c: rng.random_range(1.0..20.0),
        k_i: 0.0,
        k_o: 0.0,
        p0: 1.0,
    }
}

/// Fuzzed parameter sets for regimes II, IV and VI.
fn fuzzed_sets(regime: Regime, count: usize, seed: u64) -> Vec<ProjectParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut p = base_params(&mut rng);
        let perpetuity = p.c / p.r;
        match regime {
            Regime::SingleEntryNeverExit => {
                p.k_o = perpetuity + rng.random_range(0.0..50.0);
                p.k_i = -perpetuity + rng.random_range(0.01..1.0) * (perpetuity + 50.0);
            }
            Regime::SingleEntryExit => {
                p.k_o = perpetuity - rng.random_range(0.01..1.0) * (perpetuity + 50.0);
                p.k_i = (-p.k_o).max(-perpetuity) + rng.random_range(0.0..50.0);
            }
            Regime::DoubleEntryExit => {
                p.k_o = perpetuity - rng.random_range(0.01..1.0) * 2.0 * perpetuity;
                p.k_i = -perpetuity + rng.random_range(0.01..0.99) * (perpetuity - p.k_o);
            }
            _ => unreachable!(),
        }
        let lambdas = lambda_roots(&p).unwrap();
        let exit = solve_exit(&p, &lambdas).unwrap();
        if classify(&p, exit.p_o).unwrap() == regime {
            out.push(p);
        }
    }
    out
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Worst value and slope mismatch of `H` across its triggers. Mismatches
/// are relative to the size of the terms being compared.
fn pasting_errors(sol: &Solution) -> (f64, f64) {
    let e = &sol.entry;
    let (l1, l2) = (sol.lambdas.lambda1, sol.lambdas.lambda2);
    let mut worst = (0.0f64, 0.0f64);
    for p in e.trigger_prices() {
        let (value_scale, slope_scale) = match e.coefficients {
            EntryCoefficients::None => (1.0, 1.0),
            EntryCoefficients::Single { b } => (b.abs() * p.powf(l2), (b * l2).abs() * p.powf(l2 - 1.0)),
            EntryCoefficients::Double { b1, b2 } => (
                b1.abs() * p.powf(l1) + b2.abs() * p.powf(l2),
                (b1 * l1).abs() * p.powf(l1 - 1.0) + (b2 * l2).abs() * p.powf(l2 - 1.0),
            ),
        };
        let v = rel(e.waiting_value(p), e.payoff(p), value_scale.max(e.payoff(p).abs()));
        let d = rel(e.waiting_slope(p), e.payoff_slope(p), slope_scale.max(e.payoff_slope(p).abs()));
        worst = (worst.0.max(v), worst.1.max(d));
    }
    worst
}

fn smooth_pasting() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for (k, regime) in [Regime::SingleEntryNeverExit, Regime::SingleEntryExit, Regime::DoubleEntryExit]
        .into_iter()
        .enumerate()
    {
        let mut worst = (0.0f64, 0.0f64);
        let mut failures = 0;
        for params in fuzzed_sets(regime, FUZZ_PER_REGIME, 11 + k as u64) {
            match solve(&params) {
                Ok(Outcome::Finite(sol)) => {
                    let (v, d) = pasting_errors(&sol);
                    worst = (worst.0.max(v), worst.1.max(d));
                }
                _ => failures += 1,
            }
        }
        ok &= failures == 0 && worst.0 <= 1e-10 && worst.1 <= 1e-8;
        details.push(format!(
            "{regime}: {FUZZ_PER_REGIME} sets, {failures} solver errors, value {:.1e}, slope {:.1e}",
            worst.0, worst.1
        ));
    }
    Verdict { passed: ok, detail: details.join("; ") }
}

fn trigger_bounds() -> Verdict {
    let mut violations = 0;
    let mut checked = 0;
    for (k, regime) in [Regime::SingleEntryNeverExit, Regime::SingleEntryExit, Regime::DoubleEntryExit]
        .into_iter()
        .enumerate()
    {
        for params in fuzzed_sets(regime, FUZZ_PER_REGIME, 11 + k as u64) {
            let sol = finite(&params);
            let exit_bound = params.exit_trigger_bound();
            let entry_bound = params.entry_trigger_bound();
            let mut ok = sol.exit.p_o.is_none_or(|p_o| p_o < exit_bound);
            ok &= match sol.entry.triggers {
                EntryTriggers::None => true,
                EntryTriggers::Single { p_i } => p_i > entry_bound,
                EntryTriggers::Band { lower, upper } => lower < exit_bound && upper > entry_bound,
            };
            checked += 1;
            violations += usize::from(!ok);
        }
    }
    Verdict {
        passed: violations == 0,
        detail: format!("{checked} sets, {violations} violations"),
    }
}

fn finite_differences() -> Verdict {
    let sol = finite(&golden());
    // the grid reaches beyond the window to cover 4x the largest trigger
    let fd = FdConfig::new(4000, 0.2, 40.0);
    let levels = delayopt_core::verify::fd::fd_error_table(&sol.exit, &sol.entry, &fd, (0.2, 20.0))
        .expect("fd table");
    let detail = levels
        .iter()
        .map(|l| format!("n={} G {:.2e} H {:.2e}", l.n_nodes, l.g_max_rel_error, l.h_max_rel_error))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict { passed: fd_levels_pass(&levels), detail }
}

fn monte_carlo() -> Verdict {
    let params = golden();
    let sol = finite(&params);
    let p0s = [1.0, 3.0, 10.0];
    let t_max = p0s
        .iter()
        .map(|&p| truncation_horizon(&params, p, sol.value(p).unwrap()))
        .fold(0.0, f64::max);
    let cfg = McConfig { n_paths: 100_000, dt: 1e-3, t_max, seed: 20_240_601, antithetic: false };
    let extra: Vec<PolicySpec> = p0s
        .iter()
        .map(|&p0| PolicySpec { p0, entry: sol.entry_rule, exit: sol.exit_rule })
        .collect();
    let (dominance, outcomes) =
        dominance_check_with_extra(&params, sol.entry_rule, sol.exit_rule, &extra, &cfg).expect("mc");
    let mut ok = dominance.passed && dominance.competitors.len() >= 8;
    let mut details = vec![format!("t_max {t_max}")];
    for (&p0, out) in p0s.iter().zip(&outcomes) {
        let h = sol.value(p0).unwrap();
        let tol = (3.0 * out.std_error).max(0.02 * h.abs());
        ok &= (out.mean - h).abs() <= tol;
        details.push(format!("p0={p0}: mean {:.4} se {:.4} vs H {:.4}", out.mean, out.std_error, h));
    }
    let failed: Vec<&str> = dominance
        .competitors
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.rule.name.as_str())
        .collect();
    details.push(format!(
        "dominance over {} rules, failed {:?}",
        dominance.competitors.len(),
        failed
    ));
    Verdict { passed: ok, detail: details.join("; ") }
}

fn transform_equivalence() -> Verdict {
    let params = golden();
    let cfg = McConfig { n_paths: 20_000, dt: 1e-3, t_max: 20.0, seed: 99, antithetic: false };
    let rules = [
        (EntryRule::HitOutsideBand { lower: 1.96101, upper: 6.94641 }, ExitRule::FirstTimeAfterEntryBelow(2.66841)),
        (EntryRule::Immediately, ExitRule::Never),
        (EntryRule::HitAbove(5.0), ExitRule::FirstTimeAfterEntryBelow(2.0)),
        (EntryRule::HitOutsideBand { lower: 2.5, upper: 6.0 }, ExitRule::Never),
        (EntryRule::Immediately, ExitRule::FirstTimeAfterEntryBelow(2.8)),
    ];
    let mut ok = true;
    let mut worst_z = 0.0f64;
    // all five rules on one set of paths
    for out in equivalence_residuals(&params, &rules, &cfg).expect("mc") {
        let r = out.residual;
        ok &= r.mean.abs() <= 3.0 * r.std_error;
        worst_z = worst_z.max(r.mean.abs() / r.std_error);
    }
    let zero = params.with_delta(0.0);
    let mut max_zero = 0.0f64;
    for (entry, exit) in rules {
        let out = delayed_payoff_equivalence_residual(&zero, entry, exit, &McConfig { n_paths: 2000, ..cfg })
            .expect("mc");
        max_zero = max_zero.max(out.max_abs_path_residual);
    }
    ok &= max_zero == 0.0;
    Verdict {
        passed: ok,
        detail: format!(
            "5 policies, worst |residual|/SE {worst_z:.2}; delta=0 max path residual {max_zero:e}"
        ),
    }
}

fn delay_monotonicity() -> Verdict {
    let mut ok = true;
    let mut rows = Vec::new();
    for p0 in [1.0, 3.0, 10.0] {
        let values: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
            .into_iter()
            .map(|d| finite(&golden().with_delta(d)).value(p0).unwrap())
            .collect();
        ok &= values.windows(2).all(|w| w[1] <= w[0]);
        rows.push(format!(
            "p0={p0}: {}",
            values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" >= ")
        ));
    }
    Verdict { passed: ok, detail: rows.join("; ") }
}

fn degenerate_branch() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    let n = 1000;
    for i in 0..n {
        let mut p = base_params(&mut rng);
        p.mu = if i == 0 { p.r } else { p.r + rng.random_range(0.0..0.3) };
        p.k_i = rng.random_range(-50.0..50.0);
        p.k_o = rng.random_range(-50.0..50.0);
        let out = solve(&p).expect("solve");
        let json = serde_json::to_string(&describe(&out)).unwrap();
        ok &= matches!(out, Outcome::InfiniteValue { .. })
            && out.entry_rule() == EntryRule::Immediately
            && out.exit_rule() == ExitRule::Never
            && json == r#"{"regime":"InfiniteValue"}"#;
    }
    Verdict { passed: ok, detail: format!("{n} configs with r <= mu") }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        check(1, "golden example triggers", Some(secs(1)), golden_triggers),
        check(2, "smooth pasting on fuzzed regimes II/IV/VI", Some(secs(60)), smooth_pasting),
        check(3, "trigger bounds on fuzzed sets", None, trigger_bounds),
        check(4, "finite-difference oracle", Some(secs(30)), finite_differences),
        check(5, "Monte Carlo oracle and dominance", Some(secs(300)), monte_carlo),
        check(6, "delay transform equivalence", None, transform_equivalence),
        check(7, "value nonincreasing in delay", None, delay_monotonicity),
        check(8, "r <= mu gives infinite value", None, degenerate_branch),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
