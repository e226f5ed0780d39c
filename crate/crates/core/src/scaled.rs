//! Exact comparisons between costs stored at different precision factors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Cost, Rational};

/// A cost of `value / scale` in instance units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaled {
    pub value: Cost,
    pub scale: i64,
}

impl Scaled {
    pub fn new(value: Cost, scale: i64) -> Self {
        debug_assert!(scale > 0);
        Scaled { value, scale }
    }

    pub fn unscaled(self) -> f64 {
        self.value as f64 / self.scale as f64
    }

    /// `self <= factor * rhs`, compared exactly.
    pub fn leq_times(self, factor: Rational, rhs: Scaled) -> bool {
        let lhs = self.value as i128 * rhs.scale as i128 * *factor.denom() as i128;
        let rhs = *factor.numer() as i128 * rhs.value as i128 * self.scale as i128;
        lhs <= rhs
    }

    pub fn leq(self, rhs: Scaled) -> bool {
        self.leq_times(Rational::from_integer(1), rhs)
    }

    /// Exact `self / other` as a rational, `None` when `other` is zero.
    pub fn ratio_to(self, other: Scaled) -> Option<Rational> {
        if other.value == 0 {
            return None;
        }
        let num = self.value as i128 * other.scale as i128;
        let den = other.value as i128 * self.scale as i128;
        let g = num_integer::gcd(num, den);
        Some(Rational::new((num / g) as i64, (den / g) as i64))
    }

    /// Re-expresses the value at `scale`, which must be a multiple of the
    /// current one.
    pub fn at_scale(self, scale: i64) -> Scaled {
        assert!(
            scale % self.scale == 0,
            "scale {scale} is not a multiple of {}",
            self.scale
        );
        Scaled::new(self.value * (scale / self.scale), scale)
    }
}

impl std::ops::Add for Scaled {
    type Output = Scaled;

    fn add(self, rhs: Scaled) -> Scaled {
        let scale = num_integer::lcm(self.scale, rhs.scale);
        Scaled::new(
            self.at_scale(scale).value + rhs.at_scale(scale).value,
            scale,
        )
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 1 {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{}/{}", self.value, self.scale)
        }
    }
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_scale_comparison() {
        let a = Scaled::new(9, 24); // 3/8
        let b = Scaled::new(1, 4); // 1/4
        assert!(a.leq_times(Rational::new(3, 2), b));
        assert!(!a.leq_times(Rational::new(4, 3), b));
        assert!(!a.leq(b));
        assert_eq!(a.ratio_to(b), Some(Rational::new(3, 2)));
        assert_eq!((a + b).at_scale(24).value, 15);
    }
}
