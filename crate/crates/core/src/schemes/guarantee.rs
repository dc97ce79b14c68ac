use num_traits::{One, Signed};
use serde::Serialize;

use crate::rational::{format_rational, serde_str, Rational};

/// Lower bound `coeff / sqrt(radicand)` on the ratio of a scheme's principal
/// value to the offline optimum. `radicand = 1` for rational bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Guarantee {
    #[serde(with = "serde_str")]
    pub coeff: Rational,
    #[serde(with = "serde_str")]
    pub radicand: Rational,
}

impl Guarantee {
    pub fn ratio(coeff: Rational) -> Self {
        Self {
            coeff,
            radicand: Rational::one(),
        }
    }

    pub fn over_sqrt(coeff: Rational, radicand: Rational) -> Self {
        Self { coeff, radicand }
    }

    /// Exact check of `value >= offline * coeff / sqrt(radicand)`.
    pub fn holds(&self, value: &Rational, offline: &Rational) -> bool {
        if value.is_negative() {
            return false;
        }
        let rhs = offline * &self.coeff;
        value * value * &self.radicand >= &rhs * &rhs
    }

    pub fn describe(&self) -> String {
        if self.radicand.is_one() {
            format_rational(&self.coeff)
        } else {
            format!(
                "{}/sqrt({})",
                format_rational(&self.coeff),
                format_rational(&self.radicand)
            )
        }
    }
}
