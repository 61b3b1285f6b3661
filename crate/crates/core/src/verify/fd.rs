//! Finite-difference solution of the obstacle problems for `G` and `H`.
//!
//! `min{rV - LV - f, V - g} = 0` is discretized on a uniform grid in
//! `x = ln p`, where the generator has constant coefficients, and solved by
//! projected SOR. At both ends the solution is pinned by the decaying or
//! bounded homogeneous solution (`p^lambda2` towards zero, `p^lambda1`
//! towards infinity) around the particular solution, then projected onto the
//! obstacle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exit::ExitSolution;
use crate::model::{lambda_roots, ProjectParams};
use crate::transform::transform_coeffs;

/// Grid and iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub n_nodes: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// Relaxation factor; `None` picks the SOR optimum of the unconstrained
    /// problem.
    pub psor_omega: Option<f64>,
    /// Sweeps stop once the largest update is below `tol * max(1, |V|)`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl FdConfig {
    pub fn new(n_nodes: usize, p_min: f64, p_max: f64) -> Self {
        Self {
            n_nodes,
            p_min,
            p_max,
            psor_omega: None,
            tol: 1e-12,
            max_sweeps: 2_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 50 {
            return Err(Error::Config(format!("n_nodes must be >= 50, got {}", self.n_nodes)));
        }
        if !(self.p_min > 0.0 && self.p_max > self.p_min && self.p_max.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < p_min < p_max, got [{}, {}]",
                self.p_min, self.p_max
            )));
        }
        if let Some(w) = self.psor_omega {
            if !(w > 0.0 && w < 2.0) {
                return Err(Error::Config(format!("psor_omega must lie in (0, 2), got {w}")));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tol must be > 0".into()));
        }
        Ok(())
    }

    /// Checks the upper grid end sits at least four times above every trigger.
    pub fn check_covers(&self, triggers: &[f64]) -> Result<()> {
        let top = triggers.iter().copied().fold(0.0, f64::max);
        if self.p_max < 4.0 * top {
            return Err(Error::Config(format!(
                "p_max = {} must be >= 4 x the largest trigger {}",
                self.p_max, top
            )));
        }
        Ok(())
    }
}

/// Which obstacle problem to solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage<'a> {
    /// `G`: source `p - C`, obstacle `-(l1 p + l0)`.
    Exit,
    /// `H`: source `0`, obstacle `G(p) - k1 p - k0`. With `Some`, `G` comes
    /// from the closed form; with `None` from an exit-stage solve on the
    /// same grid.
    Entry(Option<&'a ExitSolution>),
}

/// Grid solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdSolution {
    pub prices: Vec<f64>,
    pub values: Vec<f64>,
    pub obstacle: Vec<f64>,
    pub sweeps: usize,
    pub last_update: f64,
}

impl FdSolution {
    /// Nodes where the obstacle binds.
    pub fn exercised(&self) -> Vec<bool> {
        self.values
            .iter()
            .zip(&self.obstacle)
            .map(|(v, g)| v <= g)
            .collect()
    }

    /// Linear interpolation in log-price.
    pub fn interpolate(&self, p: f64) -> Option<f64> {
        let n = self.prices.len();
        if p < self.prices[0] || p > self.prices[n - 1] {
            return None;
        }
        let x0 = self.prices[0].ln();
        let h = (self.prices[n - 1].ln() - x0) / (n - 1) as f64;
        let s = (p.ln() - x0) / h;
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        Some((1.0 - w) * self.values[i] + w * self.values[i + 1])
    }
}

/// Solves one stage of the obstacle problem on a log-price grid.
pub fn fd_value_function(params: &ProjectParams, stage: Stage<'_>, fd: &FdConfig) -> Result<FdSolution> {
    params.require_finite_value()?;
    fd.validate()?;
    let lambdas = lambda_roots(params)?;
    let coeffs = transform_coeffs(params)?;
    let n = fd.n_nodes;
    let (x0, x1) = (fd.p_min.ln(), fd.p_max.ln());
    let h = (x1 - x0) / (n - 1) as f64;
    let prices: Vec<f64> = (0..n).map(|i| (x0 + i as f64 * h).exp()).collect();

    let (source, obstacle, particular): (Vec<f64>, Vec<f64>, Vec<f64>) = match stage {
        Stage::Exit => (
            prices.iter().map(|p| p - params.c).collect(),
            prices.iter().map(|&p| -coeffs.exit_cost(p)).collect(),
            prices
                .iter()
                .map(|p| p / (params.r - params.mu) - params.c / params.r)
                .collect(),
        ),
        Stage::Entry(exit) => {
            let g: Vec<f64> = match exit {
                Some(sol) => prices.iter().map(|&p| sol.eval(p)).collect::<Result<_>>()?,
                None => fd_value_function(params, Stage::Exit, fd)?.values,
            };
            (
                vec![0.0; n],
                prices
                    .iter()
                    .zip(&g)
                    .map(|(&p, g)| g - coeffs.entry_cost(p))
                    .collect(),
                vec![0.0; n],
            )
        }
    };

    // r V - nu V_x - s2/2 V_xx = f, central differences, upwinded where the
    // central scheme would lose monotonicity.
    let s2 = params.sigma * params.sigma;
    let nu = params.mu - 0.5 * s2;
    let diff = 0.5 * s2 / (h * h);
    let (lower, upper) = if nu.abs() * h <= s2 {
        (diff - 0.5 * nu / h, diff + 0.5 * nu / h)
    } else if nu > 0.0 {
        (diff, diff + nu / h)
    } else {
        (diff - nu / h, diff)
    };
    let centre = params.r + lower + upper;
    let low_ratio = (-lambdas.lambda2 * h).exp();
    let high_ratio = (lambdas.lambda1 * h).exp();

    let omega = fd.psor_omega.unwrap_or_else(|| {
        let jacobi = (lower + upper) / centre * (std::f64::consts::PI / (n - 1) as f64).cos();
        2.0 / (1.0 + (1.0 - jacobi * jacobi).sqrt())
    });

    let mut v: Vec<f64> = obstacle
        .iter()
        .zip(&particular)
        .map(|(g, q)| g.max(*q))
        .collect();
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut biggest = 0.0f64;
        let mut scale = 1.0f64;

        let b0 = obstacle[0].max(particular[0] + low_ratio * (v[1] - particular[1]));
        biggest = biggest.max((b0 - v[0]).abs());
        v[0] = b0;
        for i in 1..n - 1 {
            let gs = (source[i] + lower * v[i - 1] + upper * v[i + 1]) / centre;
            let new = obstacle[i].max(v[i] + omega * (gs - v[i]));
            biggest = biggest.max((new - v[i]).abs());
            scale = scale.max(new.abs());
            v[i] = new;
        }
        let bn = obstacle[n - 1].max(particular[n - 1] + high_ratio * (v[n - 2] - particular[n - 2]));
        biggest = biggest.max((bn - v[n - 1]).abs());
        v[n - 1] = bn;

        if biggest <= fd.tol * scale {
            return Ok(FdSolution { prices, values: v, obstacle, sweeps, last_update: biggest });
        }
        if sweeps >= fd.max_sweeps || !biggest.is_finite() {
            return Err(Error::convergence(
                "projected SOR",
                format!("update {biggest:e} after {sweeps} sweeps (tol {:e})", fd.tol),
            ));
        }
    }
}

/// FD error against the closed forms at one grid level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdLevel {
    pub n_nodes: usize,
    /// Largest `|V_fd - V| / max(|V|, 1)` over window nodes, for `G`.
    pub g_max_rel_error: f64,
    /// Same for `H`.
    pub h_max_rel_error: f64,
    pub g_sweeps: usize,
    pub h_sweeps: usize,
}

/// Errors of `G` and `H` against the closed forms over `window`, on grids of
/// `n_nodes / 4`, `n_nodes / 2` and `n_nodes` nodes. The entry stage uses the
/// grid `G`, not the closed form.
pub fn fd_error_table(
    exit: &ExitSolution,
    entry: &crate::entry::EntrySolution,
    fd: &FdConfig,
    window: (f64, f64),
) -> Result<Vec<FdLevel>> {
    let params = exit.params();
    let mut triggers = entry.trigger_prices();
    triggers.extend(exit.p_o);
    fd.check_covers(&triggers)?;
    if window.0 < fd.p_min || window.1 > fd.p_max {
        return Err(Error::Config(format!(
            "window [{}, {}] outside grid [{}, {}]",
            window.0, window.1, fd.p_min, fd.p_max
        )));
    }
    [fd.n_nodes / 4, fd.n_nodes / 2, fd.n_nodes]
        .into_iter()
        .map(|n_nodes| {
            let cfg = FdConfig { n_nodes, ..*fd };
            let g = fd_value_function(params, Stage::Exit, &cfg)?;
            let h = fd_value_function(params, Stage::Entry(None), &cfg)?;
            let err = |sol: &FdSolution, exact: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
                let mut worst = 0.0f64;
                for (&p, &v) in sol.prices.iter().zip(&sol.values) {
                    if p < window.0 * (1.0 - 1e-12) || p > window.1 * (1.0 + 1e-12) {
                        continue;
                    }
                    let e = exact(p)?;
                    worst = worst.max((v - e).abs() / e.abs().max(1.0));
                }
                Ok(worst)
            };
            Ok(FdLevel {
                n_nodes,
                g_max_rel_error: err(&g, &|p| exit.eval(p))?,
                h_max_rel_error: err(&h, &|p| entry.eval(p))?,
                g_sweeps: g.sweeps,
                h_sweeps: h.sweeps,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::golden;
    use crate::policy::{solve, Outcome};

    #[test]
    fn config_validation() {
        assert!(FdConfig::new(10, 0.1, 10.0).validate().is_err());
        assert!(FdConfig::new(100, 1.0, 1.0).validate().is_err());
        let bad = FdConfig { psor_omega: Some(2.0), ..FdConfig::new(100, 0.1, 10.0) };
        assert!(bad.validate().is_err());
        assert!(FdConfig::new(100, 0.1, 10.0).check_covers(&[2.0, 3.0]).is_err());
        assert!(FdConfig::new(100, 0.1, 12.0).check_covers(&[2.0, 3.0]).is_ok());
    }

    #[test]
    fn projection_binds_exactly() {
        let fd = FdConfig::new(400, 0.2, 40.0);
        let sol = fd_value_function(&golden(), Stage::Exit, &fd).unwrap();
        for (i, &p) in sol.prices.iter().enumerate() {
            assert!(sol.values[i] >= sol.obstacle[i]);
            if p < 2.0 {
                assert_eq!(sol.values[i], sol.obstacle[i]);
            }
        }
    }

    #[test]
    fn exit_stage_matches_closed_form() {
        let Outcome::Finite(sol) = solve(&golden()).unwrap() else { panic!() };
        let fd = FdConfig::new(1000, 0.2, 40.0);
        let g = fd_value_function(&golden(), Stage::Exit, &fd).unwrap();
        for (&p, &v) in g.prices.iter().zip(&g.values) {
            let e = sol.exit.eval(p).unwrap();
            assert!((v - e).abs() <= 1e-2 * e.abs().max(1.0), "p={p} fd={v} exact={e}");
        }
        // G(10) at an off-grid point
        let e = sol.exit.eval(10.0).unwrap();
        assert!((g.interpolate(10.0).unwrap() - e).abs() < 1e-2 * e.abs());
    }

    #[test]
    fn entry_band_localized() {
        let params = golden();
        let fd = FdConfig::new(2000, 0.2, 40.0);
        let h = fd_value_function(&params, Stage::Entry(None), &fd).unwrap();
        let ex = h.exercised();
        let cell = (40.0f64 / 0.2).ln() / 1999.0;
        let lower = (0..ex.len()).take_while(|&i| ex[i]).last().unwrap();
        let upper = (0..ex.len()).rev().take_while(|&i| ex[i]).last().unwrap();
        assert!((0..ex.len()).filter(|&i| i > lower && i < upper).all(|i| !ex[i]));
        let dl = (h.prices[lower] / 1.96101).ln().abs() / cell;
        let du = (h.prices[upper] / 6.94641).ln().abs() / cell;
        assert!(dl <= 2.0 && du <= 2.0, "lower {} upper {}", h.prices[lower], h.prices[upper]);
    }
}
