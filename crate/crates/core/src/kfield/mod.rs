//! Exact arithmetic in Q(K), the field of rational functions of the time
//! parameter `K`, ordered by eventual sign as `K -> +inf`.

mod poly;
mod ratfn;

use std::cmp::Ordering;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use poly::Poly;
pub use ratfn::{Limit, RatFn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KFieldError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("division by the zero element")]
    DivisionByZero,
    #[error("evaluation at a pole: K = {0}")]
    Pole(BigRational),
    #[error("the zero element has no stable nonzero sign")]
    ZeroHasNoSign,
}

/// Ordered-field operations shared by plain rationals and Q(K), so one
/// simplex implementation serves both.
pub trait OrderedField: Clone + Debug + PartialEq + Zero + One {
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    /// Panics when `rhs` is zero.
    fn over(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Sign in the field's order.
    fn sign(&self) -> Ordering;
    /// Beyond which value of `K` the sign is stable; `None` when the value
    /// does not depend on `K`.
    fn stable_beyond(&self) -> Option<BigRational>;
}

impl OrderedField for BigRational {
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn stable_beyond(&self) -> Option<BigRational> {
        None
    }
}

impl OrderedField for RatFn {
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        self.signum()
    }
    fn stable_beyond(&self) -> Option<BigRational> {
        self.sign_threshold().ok()
    }
}

/// Parses `"p"` or `"p/q"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let r: BigRational = s.parse().ok()?;
    Some(r)
}

/// Shorthand constructor for small rationals.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
