//! Independent numerical checks of the closed-form solution.

pub mod fd;
pub mod mc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProjectParams;
use crate::policy::{solve, EntryRule, ExitRule, Outcome, Solution};
use fd::{fd_error_table, FdConfig, FdLevel};
use mc::{McConfig, PolicyOutcome, PolicySpec};

const TRIGGER_SCALES: [f64; 4] = [0.9, 1.1, 0.75, 1.25];
const ENTRY_LEVEL_SCALES: [f64; 4] = [1.1, 1.25, 1.5, 2.0];
const EXIT_LEVEL_SCALES: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

/// A named stopping rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedRule {
    pub name: String,
    pub entry: EntryRule,
    pub exit: ExitRule,
}

impl NamedRule {
    fn new(name: impl Into<String>, entry: EntryRule, exit: ExitRule) -> Self {
        Self { name: name.into(), entry, exit }
    }
}

/// Competitor rules around a candidate: every trigger scaled by
/// `{0.9, 1.1, 0.75, 1.25}`, immediate entry, never exit. Where the candidate
/// enters at once or never exits, threshold rules at multiples of the
/// reference price stand in for the missing trigger.
pub fn perturbed_rules(entry: EntryRule, exit: ExitRule, p_ref: f64) -> Vec<NamedRule> {
    let mut out = Vec::new();
    match entry {
        EntryRule::Never => {}
        EntryRule::Immediately => {
            for s in ENTRY_LEVEL_SCALES {
                out.push(NamedRule::new(format!("enter above {s} x p0"), EntryRule::HitAbove(s * p_ref), exit));
            }
        }
        EntryRule::HitAbove(p_i) => {
            for s in TRIGGER_SCALES {
                out.push(NamedRule::new(format!("p_I x {s}"), EntryRule::HitAbove(s * p_i), exit));
            }
        }
        EntryRule::HitOutsideBand { lower, upper } => {
            for s in TRIGGER_SCALES {
                out.push(NamedRule::new(
                    format!("p_I1 x {s}"),
                    EntryRule::HitOutsideBand { lower: s * lower, upper },
                    exit,
                ));
            }
            for s in TRIGGER_SCALES {
                out.push(NamedRule::new(
                    format!("p_I2 x {s}"),
                    EntryRule::HitOutsideBand { lower, upper: s * upper },
                    exit,
                ));
            }
        }
    }
    match exit {
        ExitRule::FirstTimeAfterEntryBelow(p_o) => {
            for s in TRIGGER_SCALES {
                out.push(NamedRule::new(
                    format!("p_O x {s}"),
                    entry,
                    ExitRule::FirstTimeAfterEntryBelow(s * p_o),
                ));
            }
            out.push(NamedRule::new("never exit", entry, ExitRule::Never));
        }
        ExitRule::Never => {
            let base = match entry {
                EntryRule::HitAbove(p_i) => p_i,
                _ => p_ref,
            };
            for s in EXIT_LEVEL_SCALES {
                out.push(NamedRule::new(
                    format!("exit below {s} x reference"),
                    entry,
                    ExitRule::FirstTimeAfterEntryBelow(s * base),
                ));
            }
        }
    }
    if !matches!(entry, EntryRule::Immediately | EntryRule::Never) {
        out.push(NamedRule::new("enter immediately", EntryRule::Immediately, exit));
    }
    out
}

/// Comparison of the candidate rule with one competitor on common paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Competitor {
    pub rule: NamedRule,
    pub outcome: PolicyOutcome,
    /// Mean of candidate minus competitor payoff, per path.
    pub advantage: f64,
    pub advantage_se: f64,
    /// `advantage >= -3 * advantage_se`.
    pub passed: bool,
}

/// Outcome of a dominance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub p0: f64,
    pub candidate: NamedRule,
    pub candidate_outcome: PolicyOutcome,
    pub competitors: Vec<Competitor>,
    pub passed: bool,
}

/// Simulates the optimal rule against its perturbations at `params.p0`.
pub fn policy_dominance_check(params: &ProjectParams, cfg: &McConfig) -> Result<DominanceReport> {
    let sol = finite_solution(params)?;
    dominance_check_rules(params, sol.entry_rule, sol.exit_rule, cfg)
}

/// Dominance check of an arbitrary candidate rule. Competitors are the
/// candidate's perturbations and, if the candidate differs from it, the
/// closed-form optimal rule.
pub fn dominance_check_rules(
    params: &ProjectParams,
    entry: EntryRule,
    exit: ExitRule,
    cfg: &McConfig,
) -> Result<DominanceReport> {
    Ok(dominance_check_with_extra(params, entry, exit, &[], cfg)?.0)
}

/// [`dominance_check_rules`] that also simulates `extra` policies on the same
/// paths, saving a second simulation when other estimates are needed.
pub fn dominance_check_with_extra(
    params: &ProjectParams,
    entry: EntryRule,
    exit: ExitRule,
    extra: &[PolicySpec],
    cfg: &McConfig,
) -> Result<(DominanceReport, Vec<PolicyOutcome>)> {
    let sol = finite_solution(params)?;
    let mut rules = perturbed_rules(entry, exit, params.p0);
    if (entry, exit) != (sol.entry_rule, sol.exit_rule) {
        rules.push(NamedRule::new("closed-form optimum", sol.entry_rule, sol.exit_rule));
    }
    let candidate = NamedRule::new("candidate", entry, exit);
    let specs: Vec<PolicySpec> = std::iter::once(&candidate)
        .chain(&rules)
        .map(|r| PolicySpec { p0: params.p0, entry: r.entry, exit: r.exit })
        .chain(extra.iter().copied())
        .collect();
    let paths = mc::simulate_payoffs(params, &specs, cfg)?;
    let n_rules = rules.len();
    let competitors: Vec<Competitor> = rules
        .into_iter()
        .enumerate()
        .map(|(i, rule)| {
            let (advantage, advantage_se) = paths.difference(0, i + 1);
            Competitor {
                rule,
                outcome: paths.outcome(i + 1),
                advantage,
                advantage_se,
                passed: advantage >= -3.0 * advantage_se,
            }
        })
        .collect();
    let report = DominanceReport {
        p0: params.p0,
        candidate,
        candidate_outcome: paths.outcome(0),
        passed: competitors.iter().all(|c| c.passed),
        competitors,
    };
    let extra_outcomes = (0..extra.len()).map(|j| paths.outcome(1 + n_rules + j)).collect();
    Ok((report, extra_outcomes))
}

/// Budgets for [`verify_solution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub mc: McConfig,
    pub fd: FdConfig,
    /// Price window of the FD error measurement.
    pub fd_window: (f64, f64),
}

/// Simulated value of the optimal rule against `J(p0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McValueCheck {
    pub p0: f64,
    pub closed_form: f64,
    pub simulated: PolicyOutcome,
    /// `max(3 SE, 2% |J|)` plus the truncation bound.
    pub tolerance: f64,
    pub passed: bool,
}

/// FD errors on three grid levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub levels: Vec<FdLevel>,
    /// Finest-level error below 1% and at least halving per refinement.
    pub passed: bool,
}

/// Delayed against transformed payoff of the candidate rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformCheck {
    pub outcome: mc::EquivalenceOutcome,
    pub passed: bool,
}

/// Every check of [`verify_solution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mc_value: McValueCheck,
    pub fd: FdCheck,
    pub dominance: DominanceReport,
    pub transform: TransformCheck,
    pub passed: bool,
}

/// Whether an FD error table shows first-order convergence below 1%.
pub fn fd_levels_pass(levels: &[FdLevel]) -> bool {
    let ok = |errs: Vec<f64>| {
        errs.last().is_some_and(|&e| e < 1e-2)
            && errs.windows(2).all(|w| w[1] <= 1e-9 || w[0] >= 2.0 * w[1])
    };
    ok(levels.iter().map(|l| l.g_max_rel_error).collect())
        && ok(levels.iter().map(|l| l.h_max_rel_error).collect())
}

/// Runs the MC value check, FD error table, dominance check and transform
/// equivalence check for a candidate rule (normally the optimal one).
pub fn verify_solution(
    sol: &Solution,
    entry: EntryRule,
    exit: ExitRule,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let params = &sol.params;
    let closed_form = sol.value_at_p0()?;
    let dominance = dominance_check_rules(params, entry, exit, &cfg.mc)?;
    let simulated = dominance.candidate_outcome;
    let tolerance =
        (3.0 * simulated.std_error).max(0.02 * closed_form.abs()) + simulated.truncation_bound;
    let mc_value = McValueCheck {
        p0: params.p0,
        closed_form,
        simulated,
        tolerance,
        passed: (simulated.mean - closed_form).abs() <= tolerance,
    };

    let levels = fd_error_table(&sol.exit, &sol.entry, &cfg.fd, cfg.fd_window)?;
    let fd = FdCheck { passed: fd_levels_pass(&levels), levels };

    let outcome = mc::equivalence_residuals(params, &[(entry, exit)], &cfg.mc)?.remove(0);
    let transform = TransformCheck {
        passed: outcome.residual.mean.abs() <= 3.0 * outcome.residual.std_error + 1e-12,
        outcome,
    };

    Ok(VerificationReport {
        passed: mc_value.passed && fd.passed && dominance.passed && transform.passed,
        mc_value,
        fd,
        dominance,
        transform,
    })
}

fn finite_solution(params: &ProjectParams) -> Result<Solution> {
    match solve(params)? {
        Outcome::Finite(sol) => Ok(*sol),
        Outcome::InfiniteValue { .. } => Err(Error::Precondition(
            "verification needs r > mu (finite value)".into(),
        )),
    }
}
