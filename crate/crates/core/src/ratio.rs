//! Exact rational arithmetic helpers.
//!
//! Measures, densities, and energies are `BigRational` end to end so that
//! identities like energy monotonicity hold with zero tolerance. Hot loops
//! compare counts against a rational threshold through [`FracCmp`], which
//! cross-multiplies in `i128` and only falls back to big integers when the
//! threshold does not fit.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::ToPrimitive;

pub type Rat = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `n / d` from unsigned counts.
pub fn rat_u(n: u128, d: u128) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Rational as `f64`, for reporting only.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Precomputed comparison of `count/total` fractions against a fixed
/// rational threshold.
pub struct FracCmp {
    small: Option<(i128, i128)>,
    big: Rat,
}

impl FracCmp {
    pub fn new(threshold: &Rat) -> Self {
        let small = match (threshold.numer().to_i128(), threshold.denom().to_i128()) {
            (Some(n), Some(d)) if d > 0 => Some((n, d)),
            _ => None,
        };
        FracCmp {
            small,
            big: threshold.clone(),
        }
    }

    /// Is `count / total >= threshold`?
    pub fn frac_ge(&self, count: u64, total: u64) -> bool {
        debug_assert!(total > 0);
        if let Some((n, d)) = self.small {
            // count/total >= n/d  <=>  count*d >= n*total  (d > 0, total > 0)
            if let (Some(lhs), Some(rhs)) = (
                (count as i128).checked_mul(d),
                n.checked_mul(total as i128),
            ) {
                return lhs >= rhs;
            }
        }
        rat_u(count as u128, total as u128) >= self.big
    }

    /// Is `count / total < threshold`?
    pub fn frac_lt(&self, count: u64, total: u64) -> bool {
        !self.frac_ge(count, total)
    }

    /// Is `count / total <= threshold`?
    pub fn frac_le(&self, count: u64, total: u64) -> bool {
        debug_assert!(total > 0);
        if let Some((n, d)) = self.small {
            if let (Some(lhs), Some(rhs)) = (
                (count as i128).checked_mul(d),
                n.checked_mul(total as i128),
            ) {
                return lhs <= rhs;
            }
        }
        rat_u(count as u128, total as u128) <= self.big
    }
}
