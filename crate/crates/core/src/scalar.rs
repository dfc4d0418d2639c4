//! Scalar abstraction: every numerical kernel in this crate is generic over a
//! real floating type implementing [`Real`]. Concrete aliases at the crate
//! root fix `f64` as the default working precision.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Real scalar used by grids, functionals and eigensolvers.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal; panics only on NaN inputs that
    /// the type cannot represent, which never happens for the constants used
    /// here.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex value over the crate scalar.
pub type Cplx<T> = Complex<T>;

/// `|z|^2` without the intermediate sqrt.
#[inline]
pub fn norm_sqr<T: Real>(z: Cplx<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Unit phase `exp(i a)`.
#[inline]
pub fn phase<T: Real>(a: T) -> Cplx<T> {
    Cplx::new(a.cos(), a.sin())
}
