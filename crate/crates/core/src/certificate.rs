//! Per-stage inequality checks and the approximation-factor ledger.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::{ratio_to_f64, Scaled};
use crate::Rational;

/// One certified inequality `lhs ≤ factor · rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The reduction step whose inequality this certifies.
    pub step: String,
    pub lhs: Scaled,
    pub factor: Rational,
    pub rhs: Scaled,
    pub passed: bool,
}

impl Check {
    pub fn leq(
        name: impl Into<String>,
        step: impl Into<String>,
        lhs: Scaled,
        factor: Rational,
        rhs: Scaled,
    ) -> Check {
        Check {
            name: name.into(),
            step: step.into(),
            lhs,
            factor,
            rhs,
            passed: lhs.leq_times(factor, rhs),
        }
    }

    pub fn eq(name: impl Into<String>, step: impl Into<String>, lhs: Scaled, rhs: Scaled) -> Check {
        let one = Rational::from_integer(1);
        let mut c = Check::leq(name, step, lhs, one, rhs);
        c.passed = c.passed && rhs.leq(lhs);
        c
    }

    /// Turns a failed check into a certificate error.
    pub fn require(self) -> Result<Check> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::certificate(
                self.step.clone(),
                format!(
                    "{}: {} (= {:.4}) > {} · {} (= {:.4})",
                    self.name,
                    self.lhs,
                    self.lhs.unscaled(),
                    self.factor,
                    self.rhs,
                    ratio_to_f64(self.factor) * self.rhs.unscaled()
                ),
            ))
        }
    }
}

/// Approximation factors lost per reduction, composed end to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorLedger {
    pub beta: Rational,
    pub alpha_cfl: Rational,
    /// TCSD instance; equal to the penalty instance's factor.
    pub alpha4: Rational,
    pub alpha3: Rational,
    pub alpha2: Rational,
    pub alpha1: Rational,
    pub alpha: Rational,
}

impl FactorLedger {
    pub fn new(beta: Rational, alpha_cfl: Rational) -> Self {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        let four = Rational::from_integer(4);
        let alpha4 = four * alpha_cfl;
        let alpha3 = alpha4;
        let alpha2 = (two * beta / (two * beta - one) + two / beta) * alpha3;
        let alpha1 = four * alpha2;
        let bi = two / (one - beta);
        let alpha = alpha1 * (one + bi) + bi;
        FactorLedger {
            beta,
            alpha_cfl,
            alpha4,
            alpha3,
            alpha2,
            alpha1,
            alpha,
        }
    }
}
