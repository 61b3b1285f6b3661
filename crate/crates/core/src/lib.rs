//! Optimal entry and exit decisions for a project with implementation delay.
//!
//! The output price follows geometric Brownian motion. A firm decides when to
//! start and when to stop the project; each decision takes effect after a
//! fixed delay. The solvers return the trigger prices, the value functions
//! `G` (running project) and `H` (idle project, equal to the optimal value
//! `J`), and executable stopping rules. [`verify`] holds independent Monte
//! Carlo and finite-difference checks of those closed forms.

pub mod entry;
pub mod error;
pub mod exit;
pub mod model;
pub mod policy;
pub mod roots;
pub mod transform;
pub mod verify;

pub use entry::{
    entry_residual, eval_h, solve_double_trigger, solve_entry, DoubleTrigger, EntryCoefficients,
    EntrySolution, EntryTriggers,
};
pub use error::{Error, Result};
pub use exit::{eval_g, solve_exit, ExitSolution};
pub use model::{classify, lambda_roots, LambdaPair, ProjectParams, Regime};
pub use policy::{describe, solve, EntryRule, ExitRule, Outcome, Report, Solution};
pub use transform::{delayed_payoff_equivalence_residual, transform_coeffs, TransformCoeffs};
