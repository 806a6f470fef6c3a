//! Numeric field abstraction shared by the transforms and the simplex core.
//!
//! `f64` is the default. `BigRational` gives exact arithmetic: every
//! tolerance collapses to zero and every comparison is exact.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num::traits::{FromPrimitive, NumAssign, Signed, ToPrimitive};
use num::BigRational;

pub trait Scalar: Clone + Debug + Display + PartialOrd + NumAssign + Neg<Output = Self> {
    /// True when arithmetic is exact and tolerances are ignored.
    const EXACT: bool;

    /// Exact conversion from a finite float; `None` for NaN or infinity.
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    /// Tolerance in this field: `v` for floats, zero when exact.
    fn tolerance(v: f64) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn tolerance(v: f64) -> Self {
        v
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }

    fn tolerance(_v: f64) -> Self {
        BigRational::from_u8(0).unwrap()
    }
}
