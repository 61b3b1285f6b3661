//! Model parameters, characteristic roots and regime classification.
//!
//! The price follows `dP = mu P dt + sigma P dB`. A firm pays `k_i` to enter,
//! runs the project at cost `c` per unit time while receiving `P`, and pays
//! `k_o` to leave. Every decision takes effect `delta` time units after it
//! is made.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All model constants plus the initial price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectParams {
    /// Discount rate, `> 0`.
    pub r: f64,
    /// Drift of the price process.
    pub mu: f64,
    /// Volatility of the price process, `> 0`.
    pub sigma: f64,
    /// Implementation delay, `>= 0`.
    pub delta: f64,
    /// Running cost per unit time.
    #[serde(alias = "C")]
    pub c: f64,
    /// Entry cost.
    #[serde(alias = "K_I")]
    pub k_i: f64,
    /// Exit cost.
    #[serde(alias = "K_O")]
    pub k_o: f64,
    /// Initial price, `> 0`.
    pub p0: f64,
}

impl ProjectParams {
    /// Returns the parameters unchanged if every field constraint holds,
    /// otherwise a [`Error::Domain`] naming the first violated field.
    pub fn validate(self) -> Result<Self> {
        let finite = [
            ("r", self.r),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("delta", self.delta),
            ("c", self.c),
            ("k_i", self.k_i),
            ("k_o", self.k_o),
            ("p0", self.p0),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(Error::domain(field, format!("must be finite, got {value}")));
            }
        }
        if self.r <= 0.0 {
            return Err(Error::domain("r", format!("must be > 0, got {}", self.r)));
        }
        if self.sigma <= 0.0 {
            return Err(Error::domain(
                "sigma",
                format!("must be > 0, got {}", self.sigma),
            ));
        }
        if self.delta < 0.0 {
            return Err(Error::domain(
                "delta",
                format!("must be >= 0, got {}", self.delta),
            ));
        }
        if self.p0 <= 0.0 {
            return Err(Error::domain("p0", format!("must be > 0, got {}", self.p0)));
        }
        Ok(self)
    }

    /// Same parameters with a different initial price.
    pub fn with_p0(self, p0: f64) -> Self {
        Self { p0, ..self }
    }

    /// Same parameters with a different delay.
    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    /// Whether the project has finite value (`r > mu`).
    pub fn has_finite_value(&self) -> bool {
        self.r > self.mu
    }

    /// `C - r K_O`; positive iff exiting can ever be optimal.
    pub fn exit_margin(&self) -> f64 {
        self.c - self.r * self.k_o
    }

    /// `C + r K_I`; positive iff waiting to enter can be optimal.
    pub fn entry_margin(&self) -> f64 {
        self.c + self.r * self.k_i
    }

    /// `K_I + K_O`.
    pub fn cost_sum(&self) -> f64 {
        self.k_i + self.k_o
    }

    /// Upper bound on the exit trigger, `e^{-mu delta}(C - r K_O)`.
    pub fn exit_trigger_bound(&self) -> f64 {
        (-self.mu * self.delta).exp() * self.exit_margin()
    }

    /// Lower bound on the upper entry trigger, `e^{-mu delta}(C + r K_I)`.
    pub fn entry_trigger_bound(&self) -> f64 {
        (-self.mu * self.delta).exp() * self.entry_margin()
    }

    /// Discounted slope `e^{(mu-r)delta}/(r-mu)` of the entry payoff.
    pub(crate) fn delayed_slope(&self) -> f64 {
        ((self.mu - self.r) * self.delta).exp() / (self.r - self.mu)
    }

    /// Discounted intercept `e^{-r delta}(C/r + K_I)` of the entry payoff.
    pub(crate) fn delayed_entry_intercept(&self) -> f64 {
        (-self.r * self.delta).exp() * (self.c / self.r + self.k_i)
    }

    pub(crate) fn require_finite_value(&self) -> Result<()> {
        if self.has_finite_value() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "requires r > mu, got r = {}, mu = {}",
                self.r, self.mu
            )))
        }
    }
}

/// Roots of `r - mu l - sigma^2 l (l - 1) / 2 = 0`, with `lambda1 < lambda2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LambdaPair {
    /// Value of the characteristic polynomial at `lambda`.
    pub fn characteristic(params: &ProjectParams, lambda: f64) -> f64 {
        params.r - params.mu * lambda - 0.5 * params.sigma * params.sigma * lambda * (lambda - 1.0)
    }
}

/// Solves the characteristic quadratic.
///
/// The larger-magnitude root is computed first and the other one recovered
/// from the product of roots `-2r/sigma^2`, which avoids cancellation when
/// `sigma` is small.
pub fn lambda_roots(params: &ProjectParams) -> Result<LambdaPair> {
    params.require_finite_value()?;
    // sigma^2/2 l^2 + (mu - sigma^2/2) l - r = 0
    let a = 0.5 * params.sigma * params.sigma;
    let b = params.mu - a;
    let c = -params.r;
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (x, y) = (q / a, c / q);
    let (lambda1, lambda2) = if x < y { (x, y) } else { (y, x) };
    Ok(LambdaPair { lambda1, lambda2 })
}

/// Entry regime, plus the degenerate infinite-value case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `r <= mu`: enter now, never exit, value is infinite.
    InfiniteValue,
    /// (i) `C - rK_O <= 0`, `C + rK_I <= 0`.
    #[serde(rename = "I")]
    EnterNowNeverExit,
    /// (ii) `C - rK_O <= 0`, `C + rK_I > 0`.
    #[serde(rename = "II")]
    SingleEntryNeverExit,
    /// (iii) `C - rK_O > 0`, `C + rK_I <= 0`.
    #[serde(rename = "III")]
    EnterNowExit,
    /// (iv) both margins positive and `K_I + K_O >= 0`.
    #[serde(rename = "IV")]
    SingleEntryExit,
    /// (v) negative cost sum, exit trigger above the entry bound.
    #[serde(rename = "V")]
    EnterNowExitNegSum,
    /// (vi) negative cost sum, exit trigger below the entry bound.
    #[serde(rename = "VI")]
    DoubleEntryExit,
}

impl Regime {
    /// Short label: `I` through `VI`, or `InfiniteValue`.
    pub fn label(self) -> &'static str {
        match self {
            Regime::InfiniteValue => "InfiniteValue",
            Regime::EnterNowNeverExit => "I",
            Regime::SingleEntryNeverExit => "II",
            Regime::EnterNowExit => "III",
            Regime::SingleEntryExit => "IV",
            Regime::EnterNowExitNegSum => "V",
            Regime::DoubleEntryExit => "VI",
        }
    }

    /// Whether an exit trigger exists (`C > r K_O`).
    pub fn has_exit(self) -> bool {
        matches!(
            self,
            Regime::EnterNowExit
                | Regime::SingleEntryExit
                | Regime::EnterNowExitNegSum
                | Regime::DoubleEntryExit
        )
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Classifies the entry regime. Boundary equalities fall where the
/// inequalities of the case split put them (e.g. `K_I + K_O = 0` is case IV).
///
/// `exit_trigger` is only consulted when the negative-cost-sum cases V and
/// VI have to be separated.
pub fn classify(params: &ProjectParams, exit_trigger: Option<f64>) -> Result<Regime> {
    if !params.has_finite_value() {
        return Ok(Regime::InfiniteValue);
    }
    let exit_margin = params.exit_margin();
    let entry_margin = params.entry_margin();
    let regime = match (exit_margin > 0.0, entry_margin > 0.0) {
        (false, false) => Regime::EnterNowNeverExit,
        (false, true) => Regime::SingleEntryNeverExit,
        (true, false) => Regime::EnterNowExit,
        (true, true) if params.cost_sum() >= 0.0 => Regime::SingleEntryExit,
        (true, true) => {
            let p_o = exit_trigger.ok_or(Error::MissingTrigger)?;
            if p_o >= params.entry_trigger_bound() {
                Regime::EnterNowExitNegSum
            } else {
                Regime::DoubleEntryExit
            }
        }
    };
    Ok(regime)
}
