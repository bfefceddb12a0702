use core::cmp::Ordering;
use core::fmt;

/// A totally ordered distance value with a distinguished top element.
///
/// Internally this wraps a non-NaN `f64`; `+inf` is the top element used to
/// retire pairs (see [`crate::DistanceOracle::set_infinite`]). The library
/// core only ever *compares* distances — arithmetic on the underlying value
/// is confined to the application drivers that need it.
#[derive(Debug, Clone, Copy)]
pub struct OrderedDistance(f64);

impl OrderedDistance {
    /// The top element: compares greater than every finite distance and
    /// equal to itself.
    pub const INFINITY: OrderedDistance = OrderedDistance(f64::INFINITY);

    /// Wraps a raw value, rejecting NaN (the one `f64` that breaks the
    /// total order). `+inf` and `-inf` are accepted; `+inf` is the top.
    pub fn try_from_f64(value: f64) -> Result<OrderedDistance, UnorderedValue> {
        if value.is_nan() {
            Err(UnorderedValue)
        } else {
            Ok(OrderedDistance(value))
        }
    }

    /// Wraps a value known to be orderable. Panics on NaN.
    pub fn finite(value: f64) -> OrderedDistance {
        Self::try_from_f64(value).expect("distance value must not be NaN")
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }
}

// Comparison goes through total_cmp so that Eq and Ord agree on signed
// zeros (derived PartialEq on f64 would not).
impl PartialEq for OrderedDistance {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for OrderedDistance {}

impl PartialOrd for OrderedDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for OrderedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Error returned when a raw value does not embed into the total order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnorderedValue;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_top() {
        let big = OrderedDistance::finite(f64::MAX);
        assert!(OrderedDistance::INFINITY > big);
        assert!(OrderedDistance::INFINITY == OrderedDistance::INFINITY);
        assert!(OrderedDistance::finite(f64::NEG_INFINITY) < OrderedDistance::finite(0.0));
    }

    #[test]
    fn nan_rejected() {
        assert!(OrderedDistance::try_from_f64(f64::NAN).is_err());
        assert!(OrderedDistance::try_from_f64(0.0 / 0.0).is_err());
        assert!(OrderedDistance::try_from_f64(1.5).is_ok());
    }

    #[test]
    fn total_order_on_signed_zero() {
        let neg = OrderedDistance::finite(-0.0);
        let pos = OrderedDistance::finite(0.0);
        // Eq must agree with Ord: total_cmp separates -0.0 from +0.0.
        assert!(neg < pos);
        assert!(neg != pos);
    }

    #[test]
    fn display() {
        assert_eq!(OrderedDistance::finite(10.0).to_string(), "10");
        assert_eq!(OrderedDistance::finite(1.25).to_string(), "1.25");
        assert_eq!(OrderedDistance::INFINITY.to_string(), "inf");
    }
}
