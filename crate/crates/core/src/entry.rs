//! Entry sub-problem: when to start the project, given the value `G` of a
//! running project.
//!
//! The entry payoff is `G(p) - k1 p - k0`. Depending on the signs of
//! `C - rK_O`, `C + rK_I` and `K_I + K_O` the exercise region is everything,
//! an upper ray `[p_I, inf)`, or two rays `(0, p_I1] U [p_I2, inf)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exit::{check_price, solve_exit, ExitSolution};
use crate::model::{classify, LambdaPair, ProjectParams, Regime};
use crate::roots::{bisect, expand_upward};
use crate::transform::TransformCoeffs;

const ROOT_REL_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;
/// Tolerance for agreement between the Newton and bisection band solvers.
const BAND_AGREEMENT_TOL: f64 = 1e-6;

/// Entry triggers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EntryTriggers {
    /// Enter immediately at any price.
    None,
    /// Enter once the price reaches `p_i` from below.
    Single { p_i: f64 },
    /// Enter once the price leaves `(lower, upper)`.
    Band { lower: f64, upper: f64 },
}

/// Coefficients of the homogeneous solution in the continuation region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EntryCoefficients {
    None,
    /// `H = B p^lambda2` below the trigger.
    Single { b: f64 },
    /// `H = B1 p^lambda1 + B2 p^lambda2` inside the band.
    Double { b1: f64, b2: f64 },
}

/// Solved entry problem with its value function `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntrySolution {
    pub regime: Regime,
    pub triggers: EntryTriggers,
    pub coefficients: EntryCoefficients,
    params: ProjectParams,
    lambdas: LambdaPair,
    exit: ExitSolution,
}

/// Solution of the two-trigger system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleTrigger {
    pub p_i1: f64,
    pub p_i2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Payoff pieces shared by the entry formulas.
#[derive(Debug, Clone, Copy)]
struct EntryTerms {
    l1: f64,
    l2: f64,
    /// `A p_O^lambda1` (zero without an exit trigger). `A p^lambda1` is
    /// evaluated as `anchor (p/p_O)^lambda1` so that steep powers stay finite.
    anchor: f64,
    p_o: f64,
    /// `e^{(mu-r)delta}/(r-mu)`.
    slope: f64,
    /// `e^{-r delta}(C/r + K_I)`.
    intercept: f64,
    /// `-e^{-r delta}(K_I + K_O)`: value of entering and leaving at once.
    round_trip: f64,
}

impl EntryTerms {
    /// Terms with a raw coefficient `A`.
    fn new(params: &ProjectParams, lambdas: &LambdaPair, a: f64) -> Self {
        Self::anchored(params, lambdas, a, 1.0)
    }

    fn anchored(params: &ProjectParams, lambdas: &LambdaPair, anchor: f64, p_o: f64) -> Self {
        Self {
            l1: lambdas.lambda1,
            l2: lambdas.lambda2,
            anchor,
            p_o,
            slope: params.delayed_slope(),
            intercept: params.delayed_entry_intercept(),
            round_trip: -(-params.r * params.delta).exp() * params.cost_sum(),
        }
    }

    fn from_exit(exit: &ExitSolution) -> Self {
        match (exit.anchored_a(), exit.p_o) {
            (Some(anchor), Some(p_o)) => Self::anchored(exit.params(), exit.lambdas(), anchor, p_o),
            _ => Self::new(exit.params(), exit.lambdas(), 0.0),
        }
    }

    /// `A p^lambda1`.
    fn option_term(&self, p: f64) -> f64 {
        if self.anchor == 0.0 {
            0.0
        } else {
            self.anchor * (p / self.p_o).powf(self.l1)
        }
    }

    /// `E(p)`; its larger root is the single entry trigger in case IV.
    fn residual(&self, p: f64) -> f64 {
        (self.l2 - self.l1) * self.option_term(p) + self.slope * (self.l2 - 1.0) * p
            - self.l2 * self.intercept
    }

    fn residual_slope(&self, p: f64) -> f64 {
        (self.l2 - self.l1) * self.l1 * self.option_term(p) / p + self.slope * (self.l2 - 1.0)
    }

    /// Minimizer of the convex `E`.
    fn residual_argmin(&self) -> f64 {
        let (l1, l2) = (self.l1, self.l2);
        let ratio = self.slope * (l2 - 1.0) * self.p_o / (-(l2 - l1) * l1 * self.anchor);
        self.p_o * ratio.powf(1.0 / (l1 - 1.0))
    }

    /// `p * payoff'(p) - lambda1 * payoff(p)` on the upper exercise region.
    fn elastic_gap(&self, p: f64) -> f64 {
        self.slope * (1.0 - self.l1) * p + self.l1 * self.intercept
    }

    /// Entry payoff above the exit trigger.
    fn upper_payoff(&self, p: f64) -> f64 {
        self.option_term(p) + self.slope * p - self.intercept
    }

    fn upper_payoff_slope(&self, p: f64) -> f64 {
        self.l1 * self.option_term(p) / p + self.slope
    }

    /// `B p_I^lambda2` for a single trigger, from smooth pasting.
    fn single_anchor(&self, p_i: f64) -> f64 {
        (self.l1 * self.option_term(p_i) + self.slope * p_i) / self.l2
    }
}

/// `E(p) = A(l2-l1)p^l1 + e^{(mu-r)delta}/(r-mu) (l2-1) p - l2 e^{-r delta}(C/r+K_I)`.
pub fn entry_residual(params: &ProjectParams, lambdas: &LambdaPair, a: f64, p: f64) -> Result<f64> {
    check_price(p)?;
    Ok(EntryTerms::new(params, lambdas, a).residual(p))
}

/// Solves the entry problem in every regime.
pub fn solve_entry(
    params: &ProjectParams,
    lambdas: &LambdaPair,
    exit: &ExitSolution,
    coeffs: &TransformCoeffs,
) -> Result<EntrySolution> {
    params.require_finite_value()?;
    if exit.coeffs() != coeffs || exit.params() != params {
        return Err(Error::Precondition(
            "exit solution and coefficients do not match the parameters".into(),
        ));
    }
    let regime = classify(params, exit.p_o)?;
    let terms = EntryTerms::from_exit(exit);
    let (triggers, coefficients) = match regime {
        Regime::InfiniteValue => unreachable!("r > mu checked above"),
        Regime::EnterNowNeverExit | Regime::EnterNowExit | Regime::EnterNowExitNegSum => {
            (EntryTriggers::None, EntryCoefficients::None)
        }
        Regime::SingleEntryNeverExit => {
            let l2 = lambdas.lambda2;
            let p_i = (-params.mu * params.delta).exp() * (l2 / (l2 - 1.0))
                * (params.r - params.mu)
                * (params.c / params.r + params.k_i);
            let b = terms.single_anchor(p_i) * p_i.powf(-l2);
            (EntryTriggers::Single { p_i }, EntryCoefficients::Single { b })
        }
        Regime::SingleEntryExit => {
            let p_o = exit.p_o.expect("case IV has an exit trigger");
            let p_i = solve_single_trigger(&terms, p_o)?;
            let b = terms.single_anchor(p_i) * p_i.powf(-terms.l2);
            (EntryTriggers::Single { p_i }, EntryCoefficients::Single { b })
        }
        Regime::DoubleEntryExit => {
            let p_o = exit.p_o.expect("case VI has an exit trigger");
            let band = solve_band(&terms, p_o, params.entry_trigger_bound())?;
            (
                EntryTriggers::Band { lower: band.p_i1, upper: band.p_i2 },
                EntryCoefficients::Double { b1: band.b1, b2: band.b2 },
            )
        }
    };
    Ok(EntrySolution {
        regime,
        triggers,
        coefficients,
        params: *params,
        lambdas: *lambdas,
        exit: *exit,
    })
}

/// Largest root of `E` by bisection on `[p_lo, p_hi]`, where `p_lo` is the
/// larger of `p_O` and the minimizer of `E`, and `p_hi` is doubled until
/// `E(p_hi) > 0`. `E(p_O) <= 0` whenever `K_I + K_O >= 0`; starting at the
/// minimizer keeps the bracket valid when `E(p_O)` is zero up to rounding.
fn solve_single_trigger(terms: &EntryTerms, p_o: f64) -> Result<f64> {
    let solver = "single entry trigger";
    let lo = terms.residual_argmin().max(p_o);
    let hi = expand_upward(solver, |p| terms.residual(p), 2.0 * lo, 2000)?;
    Ok(bisect(solver, |p| terms.residual(p), lo, hi, ROOT_REL_TOL, MAX_BISECTIONS)?.root)
}

/// Solves the two-trigger system for case VI.
pub fn solve_double_trigger(
    params: &ProjectParams,
    lambdas: &LambdaPair,
    a: f64,
    p_o: f64,
) -> Result<DoubleTrigger> {
    params.require_finite_value()?;
    if !(params.exit_margin() > 0.0 && params.entry_margin() > 0.0 && params.cost_sum() < 0.0) {
        return Err(Error::Precondition(
            "two entry triggers need C - rK_O > 0, C + rK_I > 0 and K_I + K_O < 0".into(),
        ));
    }
    let mut anchor = a * p_o.powf(lambdas.lambda1);
    if !anchor.is_finite() {
        anchor = solve_exit(params, lambdas)?.anchored_a().unwrap_or(0.0);
    }
    let terms = EntryTerms::anchored(params, lambdas, anchor, p_o);
    solve_band(&terms, p_o, params.entry_trigger_bound())
}

/// The system reduces to `B1(p_I1) = B1(p_I2)`, `B2(p_I1) = B2(p_I2)`, with
/// the coefficients obtained by pasting at each trigger. In logs:
///
/// ```text
/// R1 = ln E(p2) - ln(l2 v) - l1 (ln p2 - ln p1)
/// R2 = ln D(p2) - ln(-l1 v) - l2 (ln p2 - ln p1)
/// ```
///
/// with `v` the round-trip value and `D` the elastic gap of the payoff.
fn solve_band(terms: &EntryTerms, p_o: f64, lower_bound_p2: f64) -> Result<DoubleTrigger> {
    let newton = band_newton(terms, p_o, lower_bound_p2);
    let fallback = band_bisection(terms, p_o, lower_bound_p2);
    let (p1, p2) = match (newton, fallback) {
        (Ok(n), Ok(b)) => {
            let gap = ((n.0 - b.0) / n.0).abs().max(((n.1 - b.1) / n.1).abs());
            if gap > BAND_AGREEMENT_TOL {
                return Err(Error::convergence(
                    "entry band",
                    format!(
                        "Newton ({}, {}) and bisection ({}, {}) disagree",
                        n.0, n.1, b.0, b.1
                    ),
                ));
            }
            n
        }
        (Ok(n), Err(_)) => n,
        (Err(_), Ok(b)) => b,
        (Err(n), Err(b)) => {
            return Err(Error::convergence(
                "entry band",
                format!("Newton: {n}; bisection: {b}"),
            ))
        }
    };
    let v = terms.round_trip;
    let span = terms.l2 - terms.l1;
    Ok(DoubleTrigger {
        p_i1: p1,
        p_i2: p2,
        b1: terms.l2 * p1.powf(-terms.l1) * v / span,
        b2: -terms.l1 * p1.powf(-terms.l2) * v / span,
    })
}

fn band_residuals(terms: &EntryTerms, x: f64, y: f64) -> Option<[f64; 2]> {
    let p2 = y.exp();
    let (e, d) = (terms.residual(p2), terms.elastic_gap(p2));
    if !(e > 0.0 && d > 0.0) {
        return None;
    }
    let v = terms.round_trip;
    Some([
        e.ln() - (terms.l2 * v).ln() - terms.l1 * (y - x),
        d.ln() - (-terms.l1 * v).ln() - terms.l2 * (y - x),
    ])
}

/// Damped Newton in `(ln p1, ln p2)` with analytic Jacobian. Fails if an
/// iterate leaves the box `(0, p_O] x [p2_min, inf)`.
fn band_newton(terms: &EntryTerms, p_o: f64, p2_min: f64) -> Result<(f64, f64)> {
    let solver = "entry band (Newton)";
    let in_box = |x: f64, y: f64| x.exp() <= p_o && y.exp() >= p2_min;
    let mut x = (0.5 * p_o).ln();
    let mut y = (2.0 * p2_min).max(1.5 * p_o).ln();
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut res = band_residuals(terms, x, y)
        .ok_or_else(|| Error::convergence(solver, "initial guess outside the domain"))?;
    for _ in 0..100 {
        if norm(res) < 1e-13 {
            return Ok((x.exp(), y.exp()));
        }
        let p2 = y.exp();
        let j11 = terms.l1;
        let j12 = p2 * terms.residual_slope(p2) / terms.residual(p2) - terms.l1;
        let j21 = terms.l2;
        let j22 = p2 * terms.slope * (1.0 - terms.l1) / terms.elastic_gap(p2) - terms.l2;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::convergence(solver, format!("singular Jacobian at ({x}, {y})")));
        }
        let dx = -(j22 * res[0] - j12 * res[1]) / det;
        let dy = -(-j21 * res[0] + j11 * res[1]) / det;
        let mut t = 1.0;
        loop {
            let (xt, yt) = (x + t * dx, y + t * dy);
            if let Some(rt) = band_residuals(terms, xt, yt) {
                if norm(rt) < norm(res) || norm(rt) < 1e-13 {
                    x = xt;
                    y = yt;
                    res = rt;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::convergence(
                    solver,
                    format!("line search stalled at p = ({}, {}), residual {:?}", x.exp(), y.exp(), res),
                ));
            }
        }
        if !in_box(x, y) {
            return Err(Error::convergence(
                solver,
                format!("iterate ({}, {}) left the feasible box", x.exp(), y.exp()),
            ));
        }
    }
    Err(Error::convergence(
        solver,
        format!("no convergence, last iterate ({}, {}), residual {:?}", x.exp(), y.exp(), res),
    ))
}

/// Eliminates `p1` through `R2 = 0` and bisects the remaining scalar
/// equation in `p2`.
fn band_bisection(terms: &EntryTerms, p_o: f64, p2_min: f64) -> Result<(f64, f64)> {
    let solver = "entry band (bisection)";
    let v = terms.round_trip;
    // log-ratio ln(p2/p1) from R2 = 0
    let log_ratio = |p2: f64| ((terms.elastic_gap(p2)).ln() - (-terms.l1 * v).ln()) / terms.l2;
    // R1 = 0 without logs: near-degenerate bands put p2 where E is tiny,
    // and ln E would amplify its rounding error.
    let reduced = |p2: f64| {
        if terms.elastic_gap(p2) <= 0.0 {
            return -1.0;
        }
        terms.residual(p2) - terms.l2 * v * (terms.l1 * log_ratio(p2)).exp()
    };

    // E is convex; if it dips below zero, start the scan at its minimum,
    // where the residual is negative.
    let mut lo = p2_min;
    let p_min_e = terms.residual_argmin();
    if p_min_e.is_finite() && terms.residual(p_min_e) < 0.0 {
        lo = lo.max(p_min_e);
    }
    let hi = expand_upward(solver, reduced, 2.0 * lo, 2000)?;

    // Scan for the first sign change from below.
    let steps = 400;
    let ratio = (hi / lo).powf(1.0 / steps as f64);
    let mut a = lo;
    let mut found = None;
    for k in 1..=steps {
        let b = if k == steps { hi } else { lo * ratio.powi(k) };
        if reduced(a) <= 0.0 && reduced(b) > 0.0 {
            found = Some((a, b));
            break;
        }
        a = b;
    }
    let (a, b) = found.ok_or_else(|| {
        Error::convergence(solver, format!("no sign change of the reduced residual on [{lo}, {hi}]"))
    })?;
    let p2 = bisect(solver, reduced, a, b, 1e-15, MAX_BISECTIONS)?.root;
    let p1 = p2 / log_ratio(p2).exp();
    if !(p1 > 0.0 && p1 <= p_o * (1.0 + 1e-12)) {
        return Err(Error::convergence(
            solver,
            format!("lower trigger {p1} outside (0, p_O = {p_o}]"),
        ));
    }
    Ok((p1, p2))
}

impl EntrySolution {
    pub fn params(&self) -> &ProjectParams {
        &self.params
    }

    pub fn lambdas(&self) -> &LambdaPair {
        &self.lambdas
    }

    pub fn exit(&self) -> &ExitSolution {
        &self.exit
    }

    fn terms(&self) -> EntryTerms {
        EntryTerms::from_exit(&self.exit)
    }

    /// Entry payoff `G(p) - k1 p - k0` in closed form.
    pub fn payoff(&self, p: f64) -> f64 {
        let t = self.terms();
        match self.exit.p_o {
            Some(p_o) if p <= p_o => t.round_trip,
            _ => t.upper_payoff(p),
        }
    }

    /// Slope of the entry payoff.
    pub fn payoff_slope(&self, p: f64) -> f64 {
        let t = self.terms();
        match self.exit.p_o {
            Some(p_o) if p < p_o => 0.0,
            _ => t.upper_payoff_slope(p),
        }
    }

    /// The homogeneous terms `(c1 p^lambda1, c2 p^lambda2)` of the
    /// continuation region, each anchored at a trigger so that steep powers
    /// stay finite.
    fn waiting_terms(&self, p: f64) -> (f64, f64) {
        let (l1, l2) = (self.lambdas.lambda1, self.lambdas.lambda2);
        match self.triggers {
            EntryTriggers::None => (f64::NAN, f64::NAN),
            EntryTriggers::Single { p_i } => {
                (0.0, self.terms().single_anchor(p_i) * (p / p_i).powf(l2))
            }
            EntryTriggers::Band { lower, .. } => {
                let v = self.terms().round_trip / (l2 - l1);
                (l2 * v * (p / lower).powf(l1), -l1 * v * (p / lower).powf(l2))
            }
        }
    }

    /// Value of waiting inside the continuation region (homogeneous part).
    pub fn waiting_value(&self, p: f64) -> f64 {
        let (a, b) = self.waiting_terms(p);
        a + b
    }

    pub fn waiting_slope(&self, p: f64) -> f64 {
        let (a, b) = self.waiting_terms(p);
        (self.lambdas.lambda1 * a + self.lambdas.lambda2 * b) / p
    }

    /// Whether `p` lies in the continuation (waiting) region.
    pub fn is_waiting(&self, p: f64) -> bool {
        match self.triggers {
            EntryTriggers::None => false,
            EntryTriggers::Single { p_i } => p < p_i,
            EntryTriggers::Band { lower, upper } => p > lower && p < upper,
        }
    }

    /// Trigger prices in increasing order.
    pub fn trigger_prices(&self) -> Vec<f64> {
        match self.triggers {
            EntryTriggers::None => vec![],
            EntryTriggers::Single { p_i } => vec![p_i],
            EntryTriggers::Band { lower, upper } => vec![lower, upper],
        }
    }

    /// `H(p)`.
    pub fn eval(&self, p: f64) -> Result<f64> {
        check_price(p)?;
        Ok(if self.is_waiting(p) {
            self.waiting_value(p)
        } else {
            self.payoff(p)
        })
    }

    /// `H'(p)`; at a trigger the continuation side is used.
    pub fn slope(&self, p: f64) -> Result<f64> {
        check_price(p)?;
        let on_trigger = self.trigger_prices().contains(&p);
        Ok(if self.is_waiting(p) || on_trigger {
            self.waiting_slope(p)
        } else {
            self.payoff_slope(p)
        })
    }
}

/// `H(p)` for a solved entry problem.
pub fn eval_h(sol: &EntrySolution, p: f64) -> Result<f64> {
    sol.eval(p)
}
