//! Parameter sets shared by the benchmarks.

use delayopt_core::ProjectParams;

fn params(r: f64, mu: f64, sigma: f64, delta: f64, c: f64, k_i: f64, k_o: f64) -> ProjectParams {
    ProjectParams { r, mu, sigma, delta, c, k_i, k_o, p0: 3.0 }
}

/// One parameter set per finite-value regime, labelled by regime name.
pub fn regime_fixtures() -> Vec<(&'static str, ProjectParams)> {
    vec![
        ("golden_band", params(0.2, 0.1, 0.3, 1.0, 10.0, -20.0, 10.0)),
        ("single_trigger", params(0.2, 0.1, 0.3, 1.0, 10.0, 20.0, 10.0)),
        ("no_delay", params(0.2, 0.1, 0.3, 0.0, 10.0, -20.0, 10.0)),
        ("low_volatility", params(0.05, -0.02, 0.05, 2.0, 1.0, -5.0, 2.0)),
    ]
}

/// The worked example with a band of entry triggers.
pub fn golden() -> ProjectParams {
    regime_fixtures()[0].1
}
