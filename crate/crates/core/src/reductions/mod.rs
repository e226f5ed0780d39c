//! The reduction chain from the aggregated instance down to capacitated
//! facility location, and the lifts back up.
//!
//! | stage | instance                                   | module        |
//! |-------|--------------------------------------------|---------------|
//! | `I¹`  | clients moved onto `S°`                    | [`aggregate`] |
//! | `I²`  | nearby facilities moved onto `S°`          | [`aggregate`] |
//! | `I³`  | lower bounds with per-location penalties   | [`penalty`]   |
//! | `I⁴`  | configurable supplies and demands          | [`tcsd`]      |
//! | `I⁵`  | capacitated facility location              | [`capacitated`] |

pub mod aggregate;
pub mod capacitated;
pub mod penalty;
pub mod recost;
pub mod tcsd;

pub use aggregate::{aggregate_clients, aggregate_facilities, StageI1, StageI2};
pub use capacitated::{
    build_cfl, canonical_tcsd, canonicalize_rv, lift_cfl_to_tcsd, raw_choice, realize_prefix,
    round_up_pow2, CanonicalPair, CanonicalRv, CflInstance, Supplier,
};
pub use penalty::{
    build_penalty_instance, cost_lbflp, lift_lbflp_to_i2, LocatedFacility, MovingForest,
    PartialSolution, StageI3,
};
pub use recost::{recost_down, Recost};
pub use tcsd::{build_tcsd, lift_tcsd_to_lbflp, tcsd_cost, OptionSource, TcsdInstance, TcsdOption};

use crate::Rational;

/// `(2β − 1) / (2β²)`, the per-location penalty coefficient.
pub fn penalty_coefficient(beta: Rational) -> Rational {
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    (two * beta - one) / (two * beta * beta)
}

/// `2β / (2β − 1)`, the factor lost when reconnecting penalized clients.
pub fn reconnection_factor(beta: Rational) -> Rational {
    let two = Rational::from_integer(2);
    two * beta / (two * beta - Rational::from_integer(1))
}
