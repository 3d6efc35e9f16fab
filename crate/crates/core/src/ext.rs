//! Extended non-negative reals `[0, ∞]` as a tagged value.
//!
//! Modular values and class constants can be genuinely infinite (an exponent
//! `∞` cell where `|f| > 1`, a tail mismatch), so infinity is carried as an
//! explicit enum variant instead of a floating sentinel. Finite payloads are
//! always finite, never NaN.

use std::cmp::Ordering;
use std::fmt;

/// A value in `[0, ∞]` (more generally any finite real or `+∞`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    /// A finite value (guaranteed not NaN, not ±∞).
    Finite(f64),
    /// Positive infinity.
    Infinite,
}

impl ExtReal {
    /// Wraps a finite `f64`. Panics on NaN or ±∞; use [`ExtReal::Infinite`]
    /// for genuine infinities.
    pub fn finite(x: f64) -> Self {
        assert!(x.is_finite(), "ExtReal::finite called with {x}");
        ExtReal::Finite(x)
    }

    /// Converts, mapping `+∞` to [`ExtReal::Infinite`]. Panics on NaN / `-∞`.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::Infinite
        } else {
            Self::finite(x)
        }
    }

    /// The finite payload, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// `true` for the finite variant.
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Lossy conversion for display and CSV output.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    /// Maximum with `∞` as the top element.
    pub fn max(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.max(b)),
            _ => ExtReal::Infinite,
        }
    }

    /// Comparison against a finite threshold.
    pub fn gt(self, threshold: f64) -> bool {
        match self {
            ExtReal::Finite(x) => x > threshold,
            ExtReal::Infinite => true,
        }
    }

    /// `self ≤ threshold` for a finite threshold.
    pub fn le(self, threshold: f64) -> bool {
        !self.gt(threshold)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

/// Addition in `[0, ∞]`; `∞ + x = ∞`, and finite overflow saturates.
impl std::ops::Add for ExtReal {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_f64(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}
