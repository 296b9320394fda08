use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::rational::{pow2_inv, Rational};

/// Deepest level an arc index can address (`2^63` fits an unsigned 64-bit index).
pub const MAX_LEVEL: u32 = 63;

/// The arc `[index * 2^-level, (index + 1) * 2^-level)` of the circle parametrized by `θ ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicArc {
    pub level: u32,
    pub index: u64,
}

impl DyadicArc {
    pub const ROOT: DyadicArc = DyadicArc { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(BlochError::InvalidArgument(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if index >= Self::count(level) {
            return Err(BlochError::InvalidArgument(format!("index {index} out of range at level {level}")));
        }
        Ok(Self { level, index })
    }

    /// Number of arcs at `level`.
    pub fn count(level: u32) -> u64 {
        1u64 << level
    }

    pub fn length(&self) -> Rational {
        pow2_inv(self.level)
    }

    pub fn length_f64(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn start(&self) -> Rational {
        Rational::new(BigInt::from(self.index), BigInt::from(1u8) << self.level as usize)
    }

    pub fn start_f64(&self) -> f64 {
        self.index as f64 * self.length_f64()
    }

    pub fn end_f64(&self) -> f64 {
        (self.index + 1) as f64 * self.length_f64()
    }

    pub fn center_f64(&self) -> f64 {
        (self.index as f64 + 0.5) * self.length_f64()
    }

    pub fn left(&self) -> Self {
        Self { level: self.level + 1, index: 2 * self.index }
    }

    /// The upper half of the arc; the "+" child of the right-favouring splitting rules.
    pub fn right(&self) -> Self {
        Self { level: self.level + 1, index: 2 * self.index + 1 }
    }

    pub fn children(&self) -> [Self; 2] {
        [self.left(), self.right()]
    }

    pub fn is_right_child(&self) -> bool {
        self.index & 1 == 1
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self { level: self.level - 1, index: self.index >> 1 })
    }

    pub fn ancestor(&self, level: u32) -> Option<Self> {
        (level <= self.level).then(|| Self { level, index: self.index >> (self.level - level) })
    }

    /// The contiguous arc of equal length following this one, wrapping around the circle.
    pub fn next(&self) -> Self {
        Self { level: self.level, index: (self.index + 1) % Self::count(self.level) }
    }

    pub fn contains(&self, other: &DyadicArc) -> bool {
        other.level >= self.level && other.index >> (other.level - self.level) == self.index
    }

    /// Smallest dyadic arc containing both arcs.
    pub fn common_ancestor(&self, other: &DyadicArc) -> Self {
        let mut a = *self;
        let mut b = *other;
        while a.level > b.level {
            a = a.parent().expect("level > 0");
        }
        while b.level > a.level {
            b = b.parent().expect("level > 0");
        }
        while a != b {
            a = a.parent().expect("distinct arcs share the root");
            b = b.parent().expect("distinct arcs share the root");
        }
        a
    }

    /// Whether the closed interval `[start, end]` of the parametrization contains `θ`.
    ///
    /// The test is done in `[0, 1]` without wrap-around, so `θ = 0` meets only arc index 0.
    pub fn closed_contains(&self, theta: &Rational) -> bool {
        let scaled = theta * Rational::from_integer(BigInt::from(1u8) << self.level as usize);
        let k = Rational::from_integer(BigInt::from(self.index));
        let k1 = Rational::from_integer(BigInt::from(self.index + 1));
        k <= scaled && scaled <= k1
    }

    /// Whether the half-open arc contains `θ ∈ [0, 1)`.
    pub fn half_open_contains(&self, theta: &Rational) -> bool {
        let scaled = theta * Rational::from_integer(BigInt::from(1u8) << self.level as usize);
        let k = Rational::from_integer(BigInt::from(self.index));
        let k1 = Rational::from_integer(BigInt::from(self.index + 1));
        k <= scaled && scaled < k1
    }

    /// Normalized arc-length distance from the closed arc to the point `θ`, in `[0, 1/2]`.
    pub fn circular_distance_to(&self, theta: f64) -> f64 {
        let (s, e) = (self.start_f64(), self.end_f64());
        let t = theta.rem_euclid(1.0);
        if (s..=e).contains(&t) {
            return 0.0;
        }
        let d1 = circle_dist(t, s);
        let d2 = circle_dist(t, e);
        d1.min(d2)
    }
}

/// Normalized circular distance `min(|a - b|, 1 - |a - b|)` between two parameters.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl fmt::Display for DyadicArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.level, self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn children_split_the_parent() {
        let a = DyadicArc::new(3, 5).unwrap();
        let [l, r] = a.children();
        assert_eq!(l, DyadicArc { level: 4, index: 10 });
        assert_eq!(r, DyadicArc { level: 4, index: 11 });
        assert!(r.is_right_child() && !l.is_right_child());
        assert_eq!(l.length() + r.length(), a.length());
        assert_eq!(l.parent(), Some(a));
    }

    #[test]
    fn next_wraps_around() {
        let a = DyadicArc::new(2, 3).unwrap();
        assert_eq!(a.next(), DyadicArc::new(2, 0).unwrap());
        assert_eq!(DyadicArc::ROOT.next(), DyadicArc::ROOT);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(DyadicArc::new(2, 4).is_err());
        assert!(DyadicArc::new(64, 0).is_err());
    }

    #[test]
    fn closed_membership_has_no_wrap() {
        let zero = ratio(0, 1);
        assert!(DyadicArc::new(3, 0).unwrap().closed_contains(&zero));
        assert!(!DyadicArc::new(3, 7).unwrap().closed_contains(&zero));
        let half = ratio(1, 2);
        assert!(DyadicArc::new(3, 3).unwrap().closed_contains(&half));
        assert!(DyadicArc::new(3, 4).unwrap().closed_contains(&half));
        assert!(!DyadicArc::new(3, 3).unwrap().half_open_contains(&half));
    }

    #[test]
    fn common_ancestor_of_wrapping_pair_is_root() {
        let a = DyadicArc::new(4, 15).unwrap();
        assert_eq!(a.common_ancestor(&a.next()), DyadicArc::ROOT);
        let b = DyadicArc::new(4, 6).unwrap();
        assert_eq!(b.common_ancestor(&b.next()), DyadicArc::new(3, 3).unwrap());
        let c = DyadicArc::new(4, 7).unwrap();
        assert_eq!(c.common_ancestor(&c.next()), DyadicArc::ROOT);
    }

    proptest! {
        #[test]
        fn ancestors_contain_descendants(level in 0u32..40, raw in any::<u64>(), up in 0u32..40) {
            let a = DyadicArc::new(level, raw % DyadicArc::count(level)).unwrap();
            let anc = a.ancestor(level.saturating_sub(up)).unwrap();
            prop_assert!(anc.contains(&a));
            prop_assert!(anc.start_f64() <= a.start_f64() && a.end_f64() <= anc.end_f64());
        }
    }
}
