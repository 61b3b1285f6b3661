//! Reduction of the delayed problem to an instant one.
//!
//! Deciding at `tau` with execution at `tau + delta` is equivalent to
//! executing at `tau` with payoffs that are linear in the decision-time price:
//! entering costs `k1 P + k0` and exiting costs `l1 P + l0`. The
//! coefficients are the expected cash flows over the delay window.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ProjectParams;
use crate::policy::{EntryRule, ExitRule};
use crate::verify::mc::{self, EquivalenceOutcome, McConfig};

/// Payoff coefficients of the instant problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformCoeffs {
    pub k1: f64,
    pub k0: f64,
    pub l1: f64,
    pub l0: f64,
}

impl TransformCoeffs {
    /// Instant entry cost `k1 p + k0`.
    pub fn entry_cost(&self, p: f64) -> f64 {
        self.k1 * p + self.k0
    }

    /// Instant exit cost `l1 p + l0`.
    pub fn exit_cost(&self, p: f64) -> f64 {
        self.l1 * p + self.l0
    }
}

/// Closed-form transform coefficients. Requires `r > mu`.
pub fn transform_coeffs(params: &ProjectParams) -> Result<TransformCoeffs> {
    params.require_finite_value()?;
    let ProjectParams { r, mu, delta, c, k_i, k_o, .. } = *params;
    let k1 = ((mu - r) * delta).exp_m1() / (mu - r);
    let window_cost = (c / r) * (-r * delta).exp_m1();
    let discount = (-r * delta).exp();
    Ok(TransformCoeffs {
        k1,
        k0: window_cost + discount * k_i,
        l1: -k1,
        l0: -window_cost + discount * k_o,
    })
}

/// Monte Carlo check that a threshold policy earns the same expected payoff
/// in the delayed problem and in the transformed instant problem.
///
/// Both payoffs are evaluated on the same simulated paths; the returned
/// outcome holds the mean and standard error of the per-path difference.
pub fn delayed_payoff_equivalence_residual(
    params: &ProjectParams,
    entry: EntryRule,
    exit: ExitRule,
    cfg: &McConfig,
) -> Result<EquivalenceOutcome> {
    let mut out = mc::equivalence_residuals(params, &[(entry, exit)], cfg)?;
    Ok(out.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::golden;

    /// Composite Simpson rule, used as an independent oracle for the
    /// expected delay-window cash flow.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn zero_delay_is_identity() {
        let t = transform_coeffs(&golden().with_delta(0.0)).unwrap();
        assert_eq!(t.k1, 0.0);
        assert_eq!(t.l1, 0.0);
        assert_eq!(t.k0, -20.0);
        assert_eq!(t.l0, 10.0);
    }

    #[test]
    fn golden_coefficients() {
        let t = transform_coeffs(&golden()).unwrap();
        assert!((t.k1 - (1.0 - (-0.1f64).exp()) / 0.1).abs() < 1e-14);
        assert!((t.k1 - 0.951626).abs() < 1e-6);
        assert!((t.k0 - (50.0 * ((-0.2f64).exp() - 1.0) - 20.0 * (-0.2f64).exp())).abs() < 1e-12);
        assert!((t.k0 + 25.4381).abs() < 1e-4);
        assert_eq!(t.l1, -t.k1);
    }

    #[test]
    fn coefficients_match_quadrature_of_window_cash_flow() {
        // Entry cost: E[int_0^delta e^{-rt}(P - C) dt] + e^{-r delta} K_I
        // with E[P_t] = p e^{mu t}.
        for &(delta, p) in &[(1.0, 3.0), (0.25, 10.0), (3.0, 0.7)] {
            let params = golden().with_delta(delta);
            let t = transform_coeffs(&params).unwrap();
            let (r, mu, c) = (params.r, params.mu, params.c);
            let window = simpson(|s| (-r * s).exp() * (p * (mu * s).exp() - c), 0.0, delta, 2000);
            let entry = window + (-r * delta).exp() * params.k_i;
            let exit = -window + (-r * delta).exp() * params.k_o;
            assert!((t.entry_cost(p) - entry).abs() < 1e-10, "delta={delta}");
            assert!((t.exit_cost(p) - exit).abs() < 1e-10, "delta={delta}");
        }
    }

    #[test]
    fn slope_positive_with_delay() {
        for &delta in &[1e-6, 0.1, 1.0, 10.0] {
            let t = transform_coeffs(&golden().with_delta(delta)).unwrap();
            assert!(t.k1 > 0.0);
            assert_eq!(t.l1, -t.k1);
        }
    }

    #[test]
    fn never_enter_residual_is_zero() {
        let cfg = McConfig { n_paths: 64, dt: 0.01, t_max: 5.0, seed: 1, antithetic: false };
        let out = delayed_payoff_equivalence_residual(
            &golden(),
            EntryRule::Never,
            ExitRule::Never,
            &cfg,
        )
        .unwrap();
        assert_eq!(out.residual.mean, 0.0);
        assert_eq!(out.residual.std_error, 0.0);
        assert_eq!(out.max_abs_path_residual, 0.0);
    }

    #[test]
    fn zero_delay_residual_is_zero_pathwise() {
        let params = golden().with_delta(0.0);
        let cfg = McConfig { n_paths: 200, dt: 0.01, t_max: 10.0, seed: 7, antithetic: true };
        let out = delayed_payoff_equivalence_residual(
            &params,
            EntryRule::HitOutsideBand { lower: 2.0, upper: 4.0 },
            ExitRule::FirstTimeAfterEntryBelow(2.5),
            &cfg,
        )
        .unwrap();
        assert_eq!(out.max_abs_path_residual, 0.0);
    }
}
