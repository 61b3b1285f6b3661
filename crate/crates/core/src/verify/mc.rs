//! Monte Carlo execution of delayed entry/exit rules on simulated GBM paths.
//!
//! Paths use exact log-normal steps on a uniform grid. Every path draws its
//! normals from its own ChaCha stream, keyed by `(seed, path index)`, so
//! results do not depend on how paths are split across threads. All policies
//! passed in one call are evaluated on the same paths (common random
//! numbers); since `P = p0 * M` for a unit-start path `M`, this also covers
//! different initial prices.
//!
//! Decisions are only checked at grid times (no Brownian-bridge correction).
//! Cash flows `e^{-rt}(P - C)` are integrated with the trapezoid rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProjectParams;
use crate::policy::{EntryRule, ExitRule};
use crate::transform::transform_coeffs;

const BLOCK: usize = 64;
const PATHS_PER_TASK: usize = 64;
/// Largest log-price step count before `exp` overflows.
const LOG_OVERFLOW: f64 = 700.0;

/// Simulation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    /// Pair path `2k` with the mirror image `2k + 1`.
    pub antithetic: bool,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(Error::Config("antithetic sampling needs an even n_paths".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(Error::Config(format!(
                "t_max must be finite and >= dt, got {}",
                self.t_max
            )));
        }
        Ok(())
    }
}

/// Analytic cap on the discounted value ignored past `t_max`.
pub fn truncation_bound(params: &ProjectParams, p0: f64, t_max: f64) -> f64 {
    p0 * ((params.mu - params.r) * t_max).exp() / (params.r - params.mu)
        + (params.c / params.r).abs() * (-params.r * t_max).exp()
}

/// Smallest horizon (on a 0.5 time-unit lattice) whose truncation bound is
/// below `0.1%` of `|value| + 1`.
pub fn truncation_horizon(params: &ProjectParams, p0: f64, value: f64) -> f64 {
    let target = 1e-3 * (value.abs() + 1.0);
    let mut t = 0.5;
    while truncation_bound(params, p0, t) >= target && t < 1e6 {
        t += 0.5;
    }
    t
}

/// Estimated expected discounted payoff of one policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub mean: f64,
    pub std_error: f64,
    /// Paths that entered the average (overflowed paths are dropped).
    pub n_effective: usize,
    pub n_overflow: usize,
    pub truncation_bound: f64,
}

/// A rule applied from a given initial price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub p0: f64,
    pub entry: EntryRule,
    pub exit: ExitRule,
}

/// Per-path payoffs of several policies on common paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPayoffs {
    /// `payoffs[policy][unit]`; a unit is a path, or an antithetic pair.
    pub payoffs: Vec<Vec<f64>>,
    pub n_overflow: usize,
    pub truncation_bounds: Vec<f64>,
}

impl PathPayoffs {
    pub fn outcome(&self, policy: usize) -> PolicyOutcome {
        let (mean, std_error) = mean_and_se(&self.payoffs[policy]);
        PolicyOutcome {
            mean,
            std_error,
            n_effective: self.payoffs[policy].len(),
            n_overflow: self.n_overflow,
            truncation_bound: self.truncation_bounds[policy],
        }
    }

    /// Mean and standard error of `payoff[a] - payoff[b]` over common paths.
    pub fn difference(&self, a: usize, b: usize) -> (f64, f64) {
        let diff: Vec<f64> = self.payoffs[a]
            .iter()
            .zip(&self.payoffs[b])
            .map(|(x, y)| x - y)
            .collect();
        mean_and_se(&diff)
    }
}

/// Delayed-versus-instant payoff comparison for one policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceOutcome {
    pub delayed: PolicyOutcome,
    pub instant: PolicyOutcome,
    /// Mean and standard error of the per-path difference.
    pub residual: PolicyOutcome,
    pub max_abs_path_residual: f64,
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// Time lattice shared by all paths.
struct Lattice {
    /// Steps to the horizon.
    n: usize,
    /// Steps covered by the delay.
    d: usize,
    dt: f64,
    drift: f64,
    vol: f64,
    /// `e^{-r t_k}`.
    disc: Vec<f64>,
    /// Trapezoid prefix sums of `e^{-rt}`.
    disc_prefix: Vec<f64>,
}

impl Lattice {
    fn new(params: &ProjectParams, cfg: &McConfig) -> Result<Self> {
        cfg.validate()?;
        let n = (cfg.t_max / cfg.dt).round() as usize;
        let d_real = params.delta / cfg.dt;
        let d = d_real.round() as usize;
        if (d_real - d as f64).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "delta = {} is not a multiple of dt = {}",
                params.delta, cfg.dt
            )));
        }
        if d >= n {
            return Err(Error::Config(format!(
                "horizon t_max = {} must exceed the delay {}",
                cfg.t_max, params.delta
            )));
        }
        let disc: Vec<f64> = (0..=n).map(|k| (-params.r * k as f64 * cfg.dt).exp()).collect();
        let mut disc_prefix = Vec::with_capacity(n + 1);
        disc_prefix.push(0.0);
        for k in 0..n {
            disc_prefix.push(disc_prefix[k] + 0.5 * cfg.dt * (disc[k] + disc[k + 1]));
        }
        Ok(Self {
            n,
            d,
            dt: cfg.dt,
            drift: (params.mu - 0.5 * params.sigma * params.sigma) * cfg.dt,
            vol: params.sigma * cfg.dt.sqrt(),
            disc,
            disc_prefix,
        })
    }

    /// Last grid index at which a decision can still be executed in time.
    fn last_decision(&self) -> usize {
        self.n - self.d
    }
}

/// One simulated unit-start path with block extrema for fast hitting scans.
struct PathWork {
    log_m: Vec<f64>,
    /// Trapezoid prefix sums of `e^{-rt} M_t`.
    flow: Vec<f64>,
    block_min: Vec<f64>,
    block_max: Vec<f64>,
}

impl PathWork {
    fn new(n: usize) -> Self {
        let blocks = n / BLOCK + 1;
        Self {
            log_m: vec![0.0; n + 1],
            flow: vec![0.0; n + 1],
            block_min: vec![0.0; blocks],
            block_max: vec![0.0; blocks],
        }
    }

    /// Simulates the path for `stream`; `mirror` negates every normal.
    /// Returns `false` if the path leaves the representable range.
    fn fill(&mut self, lat: &Lattice, seed: u64, stream: u64, mirror: bool) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let sign = if mirror { -1.0 } else { 1.0 };
        let mut x = 0.0f64;
        let mut prev = 1.0f64;
        let mut acc = 0.0f64;
        self.log_m[0] = 0.0;
        self.flow[0] = 0.0;
        let half_dt = 0.5 * lat.dt;
        for k in 1..=lat.n {
            let z: f64 = rng.sample(StandardNormal);
            x += lat.drift + lat.vol * sign * z;
            let cur = (x.min(LOG_OVERFLOW)).exp() * lat.disc[k];
            acc += half_dt * (prev + cur);
            prev = cur;
            self.log_m[k] = x;
            self.flow[k] = acc;
        }
        if !acc.is_finite() || self.log_m.iter().any(|v| v.abs() >= LOG_OVERFLOW) {
            return false;
        }
        for (b, chunk) in self.log_m.chunks(BLOCK).enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in chunk {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            self.block_min[b] = lo;
            self.block_max[b] = hi;
        }
        true
    }

    /// First index in `[from, to]` where `pred` holds; `skip(b)` says block
    /// `b` contains no such index.
    fn first_where(
        &self,
        from: usize,
        to: usize,
        skip: impl Fn(usize) -> bool,
        pred: impl Fn(f64) -> bool,
    ) -> Option<usize> {
        let mut k = from;
        while k <= to {
            let b = k / BLOCK;
            if k.is_multiple_of(BLOCK) && skip(b) {
                k += BLOCK;
                continue;
            }
            if pred(self.log_m[k]) {
                return Some(k);
            }
            k += 1;
        }
        None
    }

    fn first_at_or_below(&self, from: usize, to: usize, level: f64) -> Option<usize> {
        self.first_where(from, to, |b| self.block_min[b] > level, |v| v <= level)
    }

    fn first_at_or_above(&self, from: usize, to: usize, level: f64) -> Option<usize> {
        self.first_where(from, to, |b| self.block_max[b] < level, |v| v >= level)
    }

    fn first_outside(&self, from: usize, to: usize, lower: f64, upper: f64) -> Option<usize> {
        self.first_where(
            from,
            to,
            |b| self.block_min[b] > lower && self.block_max[b] < upper,
            |v| v <= lower || v >= upper,
        )
    }
}

/// Decision indices for one policy on one path.
#[derive(Debug, Clone, Copy)]
struct Decisions {
    entry: Option<usize>,
    exit: Option<usize>,
}

fn log_level(price: f64, p0: f64) -> f64 {
    (price / p0).ln()
}

fn decide(spec: &PolicySpec, path: &PathWork, last: usize) -> Decisions {
    let entry = match spec.entry {
        EntryRule::Never => None,
        EntryRule::Immediately => Some(0),
        EntryRule::HitAbove(p_i) => path.first_at_or_above(0, last, log_level(p_i, spec.p0)),
        EntryRule::HitOutsideBand { lower, upper } => path.first_outside(
            0,
            last,
            log_level(lower, spec.p0),
            log_level(upper, spec.p0),
        ),
    };
    let exit = match (entry, spec.exit) {
        (Some(start), ExitRule::FirstTimeAfterEntryBelow(p_o)) => {
            path.first_at_or_below(start, last, log_level(p_o, spec.p0))
        }
        _ => None,
    };
    Decisions { entry, exit }
}

/// Payoff of the delayed problem: cash flows on `[tau_I + delta, tau_O + delta]`.
fn delayed_payoff(params: &ProjectParams, lat: &Lattice, path: &PathWork, p0: f64, dec: Decisions) -> f64 {
    let Some(i_in) = dec.entry else { return 0.0 };
    let start = i_in + lat.d;
    let end = dec.exit.map_or(lat.n, |o| o + lat.d);
    let cash = p0 * (path.flow[end] - path.flow[start])
        - params.c * (lat.disc_prefix[end] - lat.disc_prefix[start]);
    let exit_cost = if dec.exit.is_some() { lat.disc[end] * params.k_o } else { 0.0 };
    cash - lat.disc[start] * params.k_i - exit_cost
}

/// Payoff of the transformed instant problem on the same decisions.
/// A policy still running at the last decision time is closed there at no
/// cost, matching the horizon cut of the delayed payoff.
fn instant_payoff(
    params: &ProjectParams,
    lat: &Lattice,
    path: &PathWork,
    p0: f64,
    dec: Decisions,
    k: &crate::transform::TransformCoeffs,
) -> f64 {
    let Some(i_in) = dec.entry else { return 0.0 };
    let last = lat.last_decision();
    let end = dec.exit.unwrap_or(last);
    let price = |i: usize| p0 * path.log_m[i].exp();
    let cash = p0 * (path.flow[end] - path.flow[i_in])
        - params.c * (lat.disc_prefix[end] - lat.disc_prefix[i_in]);
    let exit_cost = if dec.exit.is_some() {
        lat.disc[end] * k.exit_cost(price(end))
    } else {
        0.0
    };
    let tail = if dec.exit.is_none() {
        let window_cost = (params.c / params.r) * (-params.r * params.delta).exp_m1();
        lat.disc[last] * (k.k1 * price(last) + window_cost)
    } else {
        0.0
    };
    cash - lat.disc[i_in] * k.entry_cost(price(i_in)) - exit_cost + tail
}

/// Runs `eval` on every path and collects one row of values per path.
/// Rows of overflowed paths are `None`.
fn run_paths<F>(lat: &Lattice, cfg: &McConfig, width: usize, eval: F) -> Vec<Option<Vec<f64>>>
where
    F: Fn(&PathWork) -> Vec<f64> + Sync,
{
    let tasks = cfg.n_paths.div_ceil(PATHS_PER_TASK);
    let rows: Vec<Vec<Option<Vec<f64>>>> = (0..tasks)
        .into_par_iter()
        .map_init(
            || PathWork::new(lat.n),
            |work, task| {
                let begin = task * PATHS_PER_TASK;
                let end = (begin + PATHS_PER_TASK).min(cfg.n_paths);
                (begin..end)
                    .map(|i| {
                        let (stream, mirror) = if cfg.antithetic {
                            ((i / 2) as u64, i % 2 == 1)
                        } else {
                            (i as u64, false)
                        };
                        if work.fill(lat, cfg.seed, stream, mirror) {
                            let row = eval(work);
                            debug_assert_eq!(row.len(), width);
                            Some(row)
                        } else {
                            None
                        }
                    })
                    .collect()
            },
        )
        .collect();
    rows.into_iter().flatten().collect()
}

/// Groups per-path rows into sampling units (antithetic pairs are averaged)
/// and transposes to one vector per column.
fn into_columns(rows: Vec<Option<Vec<f64>>>, width: usize, antithetic: bool) -> (Vec<Vec<f64>>, usize) {
    let n_overflow = rows.iter().filter(|r| r.is_none()).count();
    let mut cols = vec![Vec::with_capacity(rows.len()); width];
    if antithetic {
        for pair in rows.chunks(2) {
            if let [Some(a), Some(b)] = pair {
                for j in 0..width {
                    cols[j].push(0.5 * (a[j] + b[j]));
                }
            }
        }
    } else {
        for row in rows.into_iter().flatten() {
            for (j, v) in row.into_iter().enumerate() {
                cols[j].push(v);
            }
        }
    }
    (cols, n_overflow)
}

/// Per-path delayed payoffs of several policies on common paths.
pub fn simulate_payoffs(params: &ProjectParams, specs: &[PolicySpec], cfg: &McConfig) -> Result<PathPayoffs> {
    params.require_finite_value()?;
    let lat = Lattice::new(params, cfg)?;
    let last = lat.last_decision();
    let rows = run_paths(&lat, cfg, specs.len(), |path| {
        specs
            .iter()
            .map(|spec| delayed_payoff(params, &lat, path, spec.p0, decide(spec, path, last)))
            .collect()
    });
    let (payoffs, n_overflow) = into_columns(rows, specs.len(), cfg.antithetic);
    Ok(PathPayoffs {
        payoffs,
        n_overflow,
        truncation_bounds: specs
            .iter()
            .map(|s| truncation_bound(params, s.p0, cfg.t_max))
            .collect(),
    })
}

/// Estimates of several policies on common paths.
pub fn simulate_policies(params: &ProjectParams, specs: &[PolicySpec], cfg: &McConfig) -> Result<Vec<PolicyOutcome>> {
    let paths = simulate_payoffs(params, specs, cfg)?;
    Ok((0..specs.len()).map(|i| paths.outcome(i)).collect())
}

/// Expected discounted payoff of a fixed rule started at `params.p0`.
pub fn simulate_policy(
    params: &ProjectParams,
    entry: EntryRule,
    exit: ExitRule,
    cfg: &McConfig,
) -> Result<PolicyOutcome> {
    let spec = PolicySpec { p0: params.p0, entry, exit };
    Ok(simulate_policies(params, &[spec], cfg)?.remove(0))
}

/// Delayed and transformed-instant payoffs of each rule on common paths.
pub fn equivalence_residuals(
    params: &ProjectParams,
    rules: &[(EntryRule, ExitRule)],
    cfg: &McConfig,
) -> Result<Vec<EquivalenceOutcome>> {
    params.require_finite_value()?;
    let lat = Lattice::new(params, cfg)?;
    let coeffs = transform_coeffs(params)?;
    let last = lat.last_decision();
    let p0 = params.p0;
    // columns: delayed, instant, difference for each rule
    let width = 3 * rules.len();
    let rows = run_paths(&lat, cfg, width, |path| {
        let mut row = Vec::with_capacity(width);
        for &(entry, exit) in rules {
            let dec = decide(&PolicySpec { p0, entry, exit }, path, last);
            let delayed = delayed_payoff(params, &lat, path, p0, dec);
            let instant = instant_payoff(params, &lat, path, p0, dec, &coeffs);
            row.extend([delayed, instant, delayed - instant]);
        }
        row
    });
    let max_abs: Vec<f64> = (0..rules.len())
        .map(|j| {
            rows.iter()
                .flatten()
                .map(|row| row[3 * j + 2].abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let (cols, n_overflow) = into_columns(rows, width, cfg.antithetic);
    let bound = truncation_bound(params, p0, cfg.t_max);
    let outcome = |col: &Vec<f64>| {
        let (mean, std_error) = mean_and_se(col);
        PolicyOutcome { mean, std_error, n_effective: col.len(), n_overflow, truncation_bound: bound }
    };
    Ok((0..rules.len())
        .map(|j| EquivalenceOutcome {
            delayed: outcome(&cols[3 * j]),
            instant: outcome(&cols[3 * j + 1]),
            residual: outcome(&cols[3 * j + 2]),
            max_abs_path_residual: max_abs[j],
        })
        .collect())
}

/// Sample of `e^{-mu t} P(t) / p0` at `t`, for martingale sanity checks.
pub fn discounted_price_sample(params: &ProjectParams, t: f64, cfg: &McConfig) -> Result<PolicyOutcome> {
    let lat = Lattice::new(&params.with_delta(0.0), &McConfig { t_max: t, ..*cfg })?;
    let growth = (-params.mu * lat.n as f64 * lat.dt).exp();
    let rows = run_paths(&lat, cfg, 1, |path| vec![growth * path.log_m[lat.n].exp()]);
    let (cols, n_overflow) = into_columns(rows, 1, cfg.antithetic);
    let (mean, std_error) = mean_and_se(&cols[0]);
    Ok(PolicyOutcome { mean, std_error, n_effective: cols[0].len(), n_overflow, truncation_bound: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::golden;

    fn cfg(n_paths: usize, dt: f64, t_max: f64) -> McConfig {
        McConfig { n_paths, dt, t_max, seed: 42, antithetic: false }
    }

    #[test]
    fn never_enter_is_exactly_zero() {
        let out = simulate_policy(&golden(), EntryRule::Never, ExitRule::Never, &cfg(100, 0.01, 5.0)).unwrap();
        assert_eq!(out.mean, 0.0);
        assert_eq!(out.std_error, 0.0);
        assert_eq!(out.n_effective, 100);
    }

    #[test]
    fn perpetual_project_value() {
        // enter now, never exit, no delay: p0/(r-mu) - C/r = 50
        let params = ProjectParams { delta: 0.0, k_i: 0.0, p0: 10.0, ..golden() };
        let t_max = truncation_horizon(&params, 10.0, 50.0);
        let c = McConfig { antithetic: true, ..cfg(4000, 0.01, t_max) };
        let out = simulate_policy(&params, EntryRule::Immediately, ExitRule::Never, &c).unwrap();
        let err = (out.mean - 50.0).abs();
        assert!(err <= 3.0 * out.std_error + out.truncation_bound + 0.05, "{out:?}");
    }

    #[test]
    fn deterministic_and_rule_identity() {
        let params = golden();
        let band = EntryRule::HitOutsideBand { lower: 1.96, upper: 6.95 };
        let exit = ExitRule::FirstTimeAfterEntryBelow(2.67);
        let spec = PolicySpec { p0: 3.0, entry: band, exit };
        let c = cfg(300, 0.01, 10.0);
        let a = simulate_payoffs(&params, &[spec, spec], &c).unwrap();
        assert_eq!(a.payoffs[0], a.payoffs[1]);
        let b = simulate_payoffs(&params, &[spec], &c).unwrap();
        assert_eq!(a.payoffs[0], b.payoffs[0]);
    }

    #[test]
    fn results_independent_of_thread_count() {
        let params = golden();
        let spec = PolicySpec {
            p0: 3.0,
            entry: EntryRule::HitAbove(4.0),
            exit: ExitRule::FirstTimeAfterEntryBelow(2.5),
        };
        let c = cfg(500, 0.01, 8.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate_policies(&params, &[spec], &c)).unwrap();
        let b = four.install(|| simulate_policies(&params, &[spec], &c)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn martingale_sanity() {
        let out = discounted_price_sample(&golden(), 1.0, &cfg(20_000, 0.01, 1.0)).unwrap();
        assert!((out.mean - 1.0).abs() <= 3.0 * out.std_error, "{out:?}");
    }

    #[test]
    fn config_errors() {
        let p = golden();
        let rule = (EntryRule::Immediately, ExitRule::Never);
        for bad in [cfg(0, 0.01, 5.0), cfg(10, 0.0, 5.0), cfg(10, 0.01, 0.001), cfg(10, 0.3, 5.0)] {
            assert!(matches!(simulate_policy(&p, rule.0, rule.1, &bad), Err(Error::Config(_))), "{bad:?}");
        }
        let odd = McConfig { antithetic: true, ..cfg(11, 0.01, 5.0) };
        assert!(simulate_policy(&p, rule.0, rule.1, &odd).is_err());
        let infinite = ProjectParams { mu: 0.3, ..p };
        assert!(matches!(
            simulate_policy(&infinite, rule.0, rule.1, &cfg(10, 0.01, 5.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hitting_scans_match_linear_search() {
        let params = golden();
        let c = cfg(1, 0.01, 20.0);
        let lat = Lattice::new(&params, &c).unwrap();
        let mut w = PathWork::new(lat.n);
        for stream in 0..20 {
            assert!(w.fill(&lat, 3, stream, false));
            for &level in &[-0.5, -0.1, 0.0, 0.2, 0.6] {
                for from in [0, 1, 63, 64, 65, 500] {
                    let brute_lo = (from..=lat.n).find(|&k| w.log_m[k] <= level);
                    let brute_hi = (from..=lat.n).find(|&k| w.log_m[k] >= level);
                    assert_eq!(w.first_at_or_below(from, lat.n, level), brute_lo);
                    assert_eq!(w.first_at_or_above(from, lat.n, level), brute_hi);
                    let brute_band = (from..=lat.n).find(|&k| w.log_m[k] <= -level.abs() - 0.1 || w.log_m[k] >= level.abs() + 0.1);
                    assert_eq!(w.first_outside(from, lat.n, -level.abs() - 0.1, level.abs() + 0.1), brute_band);
                }
            }
        }
    }
}
