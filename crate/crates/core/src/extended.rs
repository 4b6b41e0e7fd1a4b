use core::fmt;
use core::ops::Add;

/// Entry of a cost matrix: a finite nonnegative real or a forbidden cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }
}

impl From<Cost> for ExtReal {
    fn from(c: Cost) -> Self {
        match c {
            Cost::Finite(v) => ExtReal::Finite(v),
            Cost::Infinite => ExtReal::Infinity,
        }
    }
}

/// A point of `[−∞, ∞]`.
///
/// Variant order gives the usual order of the extended line, so the derived
/// `PartialOrd` is the natural one.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Multiplication by a nonnegative weight with `0 · (±∞) = 0`.
    pub fn scale(self, weight: f64) -> ExtReal {
        debug_assert!(weight >= 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * weight),
            _ if weight == 0.0 => ExtReal::ZERO,
            other => other,
        }
    }

    /// Finite value or the nearest `f64` infinity.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInfinity => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::Infinity => f64::INFINITY,
        }
    }
}

/// `−∞` is absorbing: `−∞ + x = −∞` for every `x`, including `+∞`.
impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, rhs) {
            (NegInfinity, _) | (_, NegInfinity) => NegInfinity,
            (Infinity, _) | (_, Infinity) => Infinity,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInfinity => f.write_str("-inf"),
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neg_infinity_absorbs() {
        assert_eq!(ExtReal::NegInfinity + ExtReal::Infinity, ExtReal::NegInfinity);
        assert_eq!(ExtReal::Finite(2.0) + ExtReal::NegInfinity, ExtReal::NegInfinity);
        assert_eq!(ExtReal::Finite(2.0) + ExtReal::Finite(-0.5), ExtReal::Finite(1.5));
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::Infinity.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::NegInfinity.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::Infinity.scale(0.5), ExtReal::Infinity);
    }

    #[test]
    fn order_follows_extended_line() {
        assert!(ExtReal::NegInfinity < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::Infinity);
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
    }
}
