//! Constant-factor approximation for facility location with general
//! lower bounds.
//!
//! The solver reduces a lower-bounded instance, stage by stage, to
//! capacitated facility location, solves that by local search, and lifts
//! the answer back. Every lift is checked against its cost inequality in
//! exact integer arithmetic; [`oracle`] provides brute-force ground truth
//! for tiny instances.

pub mod bench;
pub mod certificate;
pub mod cfl;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod generate;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod reductions;
pub mod scaled;
pub mod ufl;

/// Costs and distances: integers in units of an instance's `1 / scale`.
pub type Cost = i64;

/// Exact rational used for `β` and the reduction coefficients.
pub type Rational = num_rational::Ratio<i64>;

pub use error::{Error, Result};
pub use instance::{cost_of, CostBreakdown, LbflInstance, LbflSolution};
pub use pipeline::{pipeline_solve, PipelineConfig, PipelineOutput};
pub use scaled::Scaled;

/// Default `β = 2/3`.
pub fn default_beta() -> Rational {
    Rational::new(2, 3)
}
