//! Full solution: optimal stopping rules and the value `J = H`.

use serde::{Deserialize, Serialize};

use crate::entry::{solve_entry, EntryCoefficients, EntrySolution, EntryTriggers};
use crate::error::Result;
use crate::exit::{solve_exit, ExitSolution};
use crate::model::{lambda_roots, LambdaPair, ProjectParams, Regime};
use crate::transform::{transform_coeffs, TransformCoeffs};

/// When to decide to enter. Decisions take effect `delta` later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EntryRule {
    /// Never enter (a reference policy, not optimal in any regime).
    Never,
    /// Decide at time zero.
    Immediately,
    /// First time the price is at or above the level.
    HitAbove(f64),
    /// First time the price is at or below `lower` or at or above `upper`.
    HitOutsideBand { lower: f64, upper: f64 },
}

/// When to decide to exit, once entered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExitRule {
    Never,
    /// First time at or after the entry decision that the price is at or
    /// below the level. A price already in the exit set at entry exits at
    /// once.
    FirstTimeAfterEntryBelow(f64),
}

impl EntryRule {
    pub(crate) fn from_triggers(triggers: EntryTriggers) -> Self {
        match triggers {
            EntryTriggers::None => EntryRule::Immediately,
            EntryTriggers::Single { p_i } => EntryRule::HitAbove(p_i),
            EntryTriggers::Band { lower, upper } => EntryRule::HitOutsideBand { lower, upper },
        }
    }

    /// Whether deciding to enter at price `p` is prescribed.
    pub fn enters_at(&self, p: f64) -> bool {
        match *self {
            EntryRule::Never => false,
            EntryRule::Immediately => true,
            EntryRule::HitAbove(level) => p >= level,
            EntryRule::HitOutsideBand { lower, upper } => p <= lower || p >= upper,
        }
    }
}

impl ExitRule {
    pub(crate) fn from_trigger(p_o: Option<f64>) -> Self {
        p_o.map_or(ExitRule::Never, ExitRule::FirstTimeAfterEntryBelow)
    }
}

/// Solution of a finite-value problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub params: ProjectParams,
    pub regime: Regime,
    pub lambdas: LambdaPair,
    pub coeffs: TransformCoeffs,
    pub exit: ExitSolution,
    pub entry: EntrySolution,
    pub entry_rule: EntryRule,
    pub exit_rule: ExitRule,
}

impl Solution {
    /// Optimal value `J(p)`, equal to `H(p)`.
    pub fn value(&self, p: f64) -> Result<f64> {
        self.entry.eval(p)
    }

    /// `J(p0)`.
    pub fn value_at_p0(&self) -> Result<f64> {
        self.value(self.params.p0)
    }

    /// Value of entering and exiting at once, `-e^{-r delta}(K_I + K_O)`.
    pub fn round_trip_value(&self) -> f64 {
        -self.coeffs.k0 - self.coeffs.l0
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Finite(Box<Solution>),
    /// `r <= mu`: the value is infinite. Enter at once and never exit.
    InfiniteValue { params: ProjectParams },
}

impl Outcome {
    pub fn regime(&self) -> Regime {
        match self {
            Outcome::Finite(sol) => sol.regime,
            Outcome::InfiniteValue { .. } => Regime::InfiniteValue,
        }
    }

    pub fn entry_rule(&self) -> EntryRule {
        match self {
            Outcome::Finite(sol) => sol.entry_rule,
            Outcome::InfiniteValue { .. } => EntryRule::Immediately,
        }
    }

    pub fn exit_rule(&self) -> ExitRule {
        match self {
            Outcome::Finite(sol) => sol.exit_rule,
            Outcome::InfiniteValue { .. } => ExitRule::Never,
        }
    }

    pub fn finite(&self) -> Option<&Solution> {
        match self {
            Outcome::Finite(sol) => Some(sol),
            Outcome::InfiniteValue { .. } => None,
        }
    }
}

/// Solves the problem for validated parameters.
pub fn solve(params: &ProjectParams) -> Result<Outcome> {
    let params = params.validate()?;
    if !params.has_finite_value() {
        return Ok(Outcome::InfiniteValue { params });
    }
    let lambdas = lambda_roots(&params)?;
    let coeffs = transform_coeffs(&params)?;
    let exit = solve_exit(&params, &lambdas)?;
    let entry = solve_entry(&params, &lambdas, &exit, &coeffs)?;
    Ok(Outcome::Finite(Box::new(Solution {
        params,
        regime: entry.regime,
        lambdas,
        coeffs,
        exit,
        entry,
        entry_rule: EntryRule::from_triggers(entry.triggers),
        exit_rule: ExitRule::from_trigger(exit.p_o),
    })))
}

/// Flat machine-readable summary. Absent quantities are omitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub regime: Regime,
    #[serde(rename = "p_O", default, skip_serializing_if = "Option::is_none")]
    pub p_o: Option<f64>,
    #[serde(rename = "p_I", default, skip_serializing_if = "Option::is_none")]
    pub p_i: Option<f64>,
    #[serde(rename = "p_I1", default, skip_serializing_if = "Option::is_none")]
    pub p_i1: Option<f64>,
    #[serde(rename = "p_I2", default, skip_serializing_if = "Option::is_none")]
    pub p_i2: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(rename = "B1", default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(rename = "B2", default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(rename = "J_at_p0", default, skip_serializing_if = "Option::is_none")]
    pub j_at_p0: Option<f64>,
}

impl Report {
    fn empty(regime: Regime) -> Self {
        Self {
            regime,
            p_o: None,
            p_i: None,
            p_i1: None,
            p_i2: None,
            a: None,
            b: None,
            b1: None,
            b2: None,
            lambda1: None,
            lambda2: None,
            k1: None,
            k0: None,
            l1: None,
            l0: None,
            j_at_p0: None,
        }
    }

    /// Trigger prices present in the report.
    pub fn triggers(&self) -> Vec<f64> {
        [self.p_o, self.p_i, self.p_i1, self.p_i2].into_iter().flatten().collect()
    }

    /// Applies `f` to every number (e.g. rounding for output).
    pub fn map_numbers(mut self, f: impl Fn(f64) -> f64) -> Self {
        for slot in [
            &mut self.p_o,
            &mut self.p_i,
            &mut self.p_i1,
            &mut self.p_i2,
            &mut self.a,
            &mut self.b,
            &mut self.b1,
            &mut self.b2,
            &mut self.lambda1,
            &mut self.lambda2,
            &mut self.k1,
            &mut self.k0,
            &mut self.l1,
            &mut self.l0,
            &mut self.j_at_p0,
        ] {
            *slot = slot.map(&f);
        }
        self
    }
}

/// Summarizes an outcome.
pub fn describe(outcome: &Outcome) -> Report {
    let Outcome::Finite(sol) = outcome else {
        return Report::empty(Regime::InfiniteValue);
    };
    let mut report = Report {
        p_o: sol.exit.p_o,
        a: sol.exit.a,
        lambda1: Some(sol.lambdas.lambda1),
        lambda2: Some(sol.lambdas.lambda2),
        k1: Some(sol.coeffs.k1),
        k0: Some(sol.coeffs.k0),
        l1: Some(sol.coeffs.l1),
        l0: Some(sol.coeffs.l0),
        j_at_p0: sol.value_at_p0().ok(),
        ..Report::empty(sol.regime)
    };
    match sol.entry.triggers {
        EntryTriggers::None => {}
        EntryTriggers::Single { p_i } => report.p_i = Some(p_i),
        EntryTriggers::Band { lower, upper } => {
            report.p_i1 = Some(lower);
            report.p_i2 = Some(upper);
        }
    }
    match sol.entry.coefficients {
        EntryCoefficients::None => {}
        EntryCoefficients::Single { b } => report.b = Some(b),
        EntryCoefficients::Double { b1, b2 } => {
            report.b1 = Some(b1);
            report.b2 = Some(b2);
        }
    }
    report
}
