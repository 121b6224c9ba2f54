//! Numeric scalar abstraction used by the LP and MIP solvers.
//!
//! The simplex and branch-and-bound code is written once against [`Scalar`].
//! Floating point types compare against tolerances, exact types (rationals)
//! compare against zero.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A field element the solvers can compute with.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and tolerances collapse to zero.
    const EXACT: bool;

    /// Converts a requested tolerance into this type. Exact types ignore it.
    fn tolerance(requested: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(requested).unwrap_or_else(Self::zero)
        }
    }

    /// Lossy conversion from `f64`, panicking on non-finite input.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(|| panic!("non-representable scalar {value}"))
    }

    /// Lossy conversion to `f64`.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Flushes values that are numerically zero. No-op for exact types.
    fn flush(self, _tiny: &Self) -> Self {
        self
    }

    fn is_negligible(&self, tol: &Self) -> bool {
        self.abs() <= *tol
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            #[inline]
            fn flush(self, tiny: &Self) -> Self {
                if self.abs() < *tiny {
                    0.0
                } else {
                    self
                }
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64_lossy(value: f64) -> Self {
        BigRational::from_float(value).unwrap_or_else(|| panic!("non-representable scalar {value}"))
    }
}

/// Builds an exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_tolerance_is_zero() {
        assert_eq!(BigRational::tolerance(1e-9), ratio(0, 1));
        assert_eq!(f64::tolerance(1e-9), 1e-9);
    }

    #[test]
    fn flush_only_affects_floats() {
        assert_eq!(1e-15f64.flush(&1e-12), 0.0);
        assert_eq!(ratio(1, 1_000_000_000).flush(&ratio(1, 10)), ratio(1, 1_000_000_000));
    }

    #[test]
    fn rational_roundtrips_dyadic_floats() {
        let r = BigRational::from_f64_lossy(0.375);
        assert_eq!(r, ratio(3, 8));
        assert_eq!(r.to_f64_lossy(), 0.375);
    }
}
