use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar field the symbolic algebra is generic over.
///
/// Implemented for `f32` and `f64`. Constants that appear in formulas are
/// written as `f64` literals and converted with [`Real::lit`].
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count or degree.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Absolute value below which arithmetic results are pruned.
    fn prune_threshold() -> Self {
        Self::lit(1e-14)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `n!` as a scalar.
pub fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_count(k as usize))
}

/// `n!!` as a scalar, with `0!! = (-1)!! = 1`.
pub fn double_factorial<T: Real>(n: i64) -> T {
    let mut acc = T::one();
    let mut k = n;
    while k > 1 {
        acc *= T::from_count(k as usize);
        k -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(double_factorial::<f64>(-1), 1.0);
        assert_eq!(double_factorial::<f64>(0), 1.0);
        assert_eq!(double_factorial::<f64>(5), 15.0);
        assert_eq!(double_factorial::<f32>(7), 105.0);
    }
}
