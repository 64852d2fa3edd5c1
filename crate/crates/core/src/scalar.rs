//! Scalar abstraction shared by the polynomial kernel and the quadrature rules.
//!
//! Polynomials carry either real coefficients (phases, amplitude parts, Taylor
//! jets of the medium) or complex ones (collapsed amplitudes, local spectral
//! solutions), so the algebra is written once against [`Scalar`].

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num};

pub trait Scalar:
    Copy
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Send
    + Sync
    + 'static
{
    type Real: RealScalar;

    fn from_real(r: Self::Real) -> Self;
    fn mul_real(self, r: Self::Real) -> Self;
    fn modulus(self) -> Self::Real;
    fn conjugate(self) -> Self;
    fn exp(self) -> Self;
    fn powf(self, e: Self::Real) -> Self;

    fn cast_f64(x: f64) -> Self {
        Self::from_real(<Self::Real as FromPrimitive>::from_f64(x).expect("representable"))
    }
}

/// Real field underlying a [`Scalar`]: `f32` or `f64`.
pub trait RealScalar: Scalar<Real = Self> + Float + FloatConst + FromPrimitive {
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            #[inline]
            fn from_real(r: $t) -> $t {
                r
            }
            #[inline]
            fn mul_real(self, r: $t) -> $t {
                self * r
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn conjugate(self) -> $t {
                self
            }
            #[inline]
            fn exp(self) -> $t {
                <$t>::exp(self)
            }
            #[inline]
            fn powf(self, e: $t) -> $t {
                <$t>::powf(self, e)
            }
        }
        impl RealScalar for $t {}

        impl Scalar for Complex<$t> {
            type Real = $t;
            #[inline]
            fn from_real(r: $t) -> Self {
                Complex::new(r, 0.0)
            }
            #[inline]
            fn mul_real(self, r: $t) -> Self {
                self * r
            }
            #[inline]
            fn modulus(self) -> $t {
                self.norm()
            }
            #[inline]
            fn conjugate(self) -> Self {
                self.conj()
            }
            #[inline]
            fn exp(self) -> Self {
                Complex::exp(self)
            }
            #[inline]
            fn powf(self, e: $t) -> Self {
                Complex::powf(self, e)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
