//! Exit sub-problem: when to stop a running project.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LambdaPair, ProjectParams};
use crate::transform::{transform_coeffs, TransformCoeffs};

/// Solved exit problem: optional trigger `p_O`, coefficient `A` and the
/// value function `G` of a running project.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSolution {
    params: ProjectParams,
    lambdas: LambdaPair,
    coeffs: TransformCoeffs,
    /// Exit trigger; `None` when exiting is never optimal (`C <= r K_O`).
    pub p_o: Option<f64>,
    /// Coefficient of `p^lambda1` in `G` above the trigger.
    pub a: Option<f64>,
}

/// Solves the exit problem. Requires `r > mu`.
pub fn solve_exit(params: &ProjectParams, lambdas: &LambdaPair) -> Result<ExitSolution> {
    params.require_finite_value()?;
    let coeffs = transform_coeffs(params)?;
    let (p_o, a) = if params.c <= params.r * params.k_o {
        (None, None)
    } else {
        let l1 = lambdas.lambda1;
        let drift_gap = params.r - params.mu;
        let p_o = (-params.mu * params.delta).exp() * (l1 / (l1 - 1.0))
            * drift_gap
            * (params.c / params.r - params.k_o);
        let a = ((params.mu - params.r) * params.delta).exp() * p_o.powf(1.0 - l1)
            / (l1 * (params.mu - params.r));
        (Some(p_o), Some(a))
    };
    Ok(ExitSolution {
        params: *params,
        lambdas: *lambdas,
        coeffs,
        p_o,
        a,
    })
}

pub(crate) fn check_price(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("p", format!("price must be finite and > 0, got {p}")))
    }
}

impl ExitSolution {
    pub fn params(&self) -> &ProjectParams {
        &self.params
    }

    pub fn lambdas(&self) -> &LambdaPair {
        &self.lambdas
    }

    pub fn coeffs(&self) -> &TransformCoeffs {
        &self.coeffs
    }

    pub fn has_trigger(&self) -> bool {
        self.p_o.is_some()
    }

    /// Value of running forever: `p/(r-mu) - C/r`.
    pub fn never_exit_value(&self, p: f64) -> f64 {
        p / (self.params.r - self.params.mu) - self.params.c / self.params.r
    }

    /// Stopping payoff `-(l1 p + l0)`.
    pub fn stopping_value(&self, p: f64) -> f64 {
        -self.coeffs.exit_cost(p)
    }

    /// `A p_O^lambda1`, computed without forming `A`, which over- or
    /// underflows when `lambda1` is large in magnitude.
    pub(crate) fn anchored_a(&self) -> Option<f64> {
        let Self { params, lambdas, .. } = self;
        let drift_gap = params.mu - params.r;
        self.p_o
            .map(|p_o| (drift_gap * params.delta).exp() * p_o / (lambdas.lambda1 * drift_gap))
    }

    /// `A p^lambda1`, evaluated as `A p_O^lambda1 (p/p_O)^lambda1`.
    fn option_term(&self, p: f64) -> f64 {
        match (self.anchored_a(), self.p_o) {
            (Some(anchor), Some(p_o)) => anchor * (p / p_o).powf(self.lambdas.lambda1),
            _ => 0.0,
        }
    }

    /// Continuation-region formula, valid above the trigger.
    pub fn continuation_value(&self, p: f64) -> f64 {
        self.option_term(p) + self.never_exit_value(p)
    }

    pub fn continuation_slope(&self, p: f64) -> f64 {
        self.lambdas.lambda1 * self.option_term(p) / p + 1.0 / (self.params.r - self.params.mu)
    }

    pub fn continuation_curvature(&self, p: f64) -> f64 {
        let l1 = self.lambdas.lambda1;
        l1 * (l1 - 1.0) * self.option_term(p) / (p * p)
    }

    fn exercised(&self, p: f64) -> bool {
        self.p_o.is_some_and(|p_o| p <= p_o)
    }

    /// `G(p)`.
    pub fn eval(&self, p: f64) -> Result<f64> {
        check_price(p)?;
        Ok(if self.exercised(p) {
            self.stopping_value(p)
        } else {
            self.continuation_value(p)
        })
    }

    /// `G'(p)`; at the trigger the continuation side is used.
    pub fn slope(&self, p: f64) -> Result<f64> {
        check_price(p)?;
        Ok(match self.p_o {
            Some(p_o) if p < p_o => -self.coeffs.l1,
            _ => self.continuation_slope(p),
        })
    }

    /// `G''(p)`, continuation side at the trigger.
    pub fn curvature(&self, p: f64) -> Result<f64> {
        check_price(p)?;
        Ok(match self.p_o {
            Some(p_o) if p < p_o => 0.0,
            _ => self.continuation_curvature(p),
        })
    }
}

/// `G(p)` for a solved exit problem.
pub fn eval_g(sol: &ExitSolution, p: f64) -> Result<f64> {
    sol.eval(p)
}
