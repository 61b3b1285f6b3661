use delayopt_core::{describe, solve, Error, Outcome, ProjectParams, Regime, Report, Solution};
use proptest::prelude::*;

prop_compose! {
    fn finite_params()(r in 0.02f64..0.3, gap in 0.01f64..0.3, sigma in 0.1f64..0.8,
                       delta in 0.0f64..3.0, c in -10.0f64..20.0, k_i in -30.0f64..30.0,
                       k_o in -30.0f64..30.0, p0 in 0.2f64..20.0) -> ProjectParams {
        ProjectParams { r, mu: r - gap, sigma, delta, c, k_i, k_o, p0 }
    }
}

fn solved(params: &ProjectParams) -> Solution {
    match solve(params) {
        Ok(Outcome::Finite(sol)) => *sol,
        other => panic!("{params:?}: {other:?}"),
    }
}

fn prices() -> impl Iterator<Item = f64> {
    (0..=60).map(|k| 0.1 * 1.1f64.powi(k))
}

fn close(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn running_value_dominates_both_choices(params in finite_params()) {
        let sol = solved(&params);
        for p in prices() {
            let g = sol.exit.eval(p).unwrap();
            let stop = sol.exit.stopping_value(p);
            prop_assert!(g >= stop - close(g, stop), "G {g} < stop {stop} at {p}");
            let run = sol.exit.never_exit_value(p);
            prop_assert!(g >= run - close(g, run), "G {g} < never exit {run} at {p}");
        }
    }

    #[test]
    fn idle_value_dominates_entry_and_waiting(params in finite_params()) {
        let sol = solved(&params);
        for p in prices() {
            let h = sol.entry.eval(p).unwrap();
            let enter = sol.entry.payoff(p);
            prop_assert!(h >= enter - close(h, enter), "H {h} < entry payoff {enter} at {p}");
            prop_assert!(h >= -close(h, 0.0), "H {h} < 0 at {p}");
        }
    }

    #[test]
    fn triggers_positive_and_ordered(params in finite_params()) {
        let sol = solved(&params);
        let triggers = sol.entry.trigger_prices();
        prop_assert!(triggers.iter().chain(sol.exit.p_o.iter()).all(|t| t.is_finite() && *t > 0.0));
        prop_assert!(triggers.windows(2).all(|w| w[0] < w[1]));
        for t in triggers {
            prop_assert!(sol.entry.eval(t).unwrap() >= 0.0);
        }
        if let Some(p_o) = sol.exit.p_o {
            prop_assert!(p_o < params.exit_trigger_bound());
        }
    }

    #[test]
    fn value_nonincreasing_in_delay(params in finite_params(), extra in 0.01f64..2.0) {
        let short = solved(&params).value_at_p0().unwrap();
        let long = solved(&params.with_delta(params.delta + extra)).value_at_p0().unwrap();
        prop_assert!(long <= short + close(long, short), "{long} > {short}");
    }

    #[test]
    fn value_nonincreasing_in_entry_cost(params in finite_params(), bump in 0.0f64..5.0) {
        let base = solved(&params).value_at_p0().unwrap();
        let cheaper = ProjectParams { k_i: params.k_i - bump, ..params };
        let v = solved(&cheaper).value_at_p0().unwrap();
        prop_assert!(v >= base - close(v, base));
    }

    #[test]
    fn report_round_trips(params in finite_params()) {
        let report = describe(&solve(&params).unwrap());
        let text = serde_json::to_string(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, report);
    }

    #[test]
    fn infinite_value_when_drift_reaches_rate(params in finite_params(), excess in 0.0f64..0.2) {
        let params = ProjectParams { mu: params.r + excess, ..params };
        let outcome = solve(&params).unwrap();
        prop_assert_eq!(outcome.regime(), Regime::InfiniteValue);
        prop_assert!(outcome.finite().is_none());
    }

    #[test]
    fn nonpositive_volatility_rejected(params in finite_params(), sigma in -1.0f64..=0.0) {
        let err = solve(&ProjectParams { sigma, ..params }).unwrap_err();
        prop_assert!(matches!(err, Error::Domain { .. }), "{err:?}");
    }
}
