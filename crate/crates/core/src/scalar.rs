//! Scalar abstraction shared by every numerical module.
//!
//! All linear algebra runs over `Complex<T>` where `T` is a real field
//! (`f32` or `f64`). Thresholds are written as `f64` literals and converted
//! once through [`lit`].

use std::fmt::{Debug, LowerExp};

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the crate is generic over.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Debug {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;
/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVector<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Lifts a real matrix into a complex one.
pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// `(-1)^k` as a signed integer.
#[inline]
pub fn parity_sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}
