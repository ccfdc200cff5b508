//! Exact half-integer arithmetic for spin projections.
//!
//! Spin quantum numbers and projections are rationals over 2. Representing
//! them as an integer count of halves keeps branch identity and symmetry
//! checks exact; floats enter only at the final `to_f64` conversion.

use std::fmt;
use std::ops::Neg;

/// A half-integer stored as twice its value (`twice = 2m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    /// Build from twice the value, so `new(1)` is 1/2 and `new(-3)` is -3/2.
    pub const fn new(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// 1/2.
    pub const fn half() -> Self {
        HalfInt { twice: 1 }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    pub fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// All projections m = -s, -s+1, ..., +s of a spin-s system.
///
/// `s` must be a non-negative half-integer.
pub fn projections(s: HalfInt) -> Vec<HalfInt> {
    assert!(!s.is_negative(), "spin quantum number must be non-negative");
    (-s.twice()..=s.twice())
        .step_by(2)
        .map(HalfInt::new)
        .collect()
}

/// Dimension 2s+1 of the spin-s projection ladder.
pub fn multiplicity(s: HalfInt) -> usize {
    assert!(!s.is_negative(), "spin quantum number must be non-negative");
    (s.twice() + 1) as usize
}
