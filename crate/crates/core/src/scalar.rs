//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All of the cumulant algebra, root solving, quadrature and Edgeworth
//! evaluation is written against [`Scalar`], which is implemented for `f32`
//! and `f64`. Sampling hooks live on the trait as well so that generic code
//! can draw standard variates without carrying `rand_distr` bounds around.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};

/// floating point: f32 or f64
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Converts an `f64` literal. Infallible for the implemented types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Natural log of the gamma function.
    fn ln_gamma(self) -> Self {
        Self::lit(statrs::function::gamma::ln_gamma(self.to_f64_lossy()))
    }

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn sample_standard_exp<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draws from Gamma(shape, 1).
    fn sample_unit_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self) -> Self;

    /// Uniform draw on the open interval (0, 1).
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            fn sample_standard_exp<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Exp1.sample(rng)
            }

            fn sample_unit_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self) -> Self {
                Gamma::new(shape, 1.0)
                    .expect("gamma shape validated upstream")
                    .sample(rng)
            }

            fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Standard normal density.
pub fn std_normal_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

/// Log of the standard normal density.
pub fn std_normal_ln_pdf<T: Scalar>(x: T) -> T {
    -(x * x) / T::lit(2.0) - T::lit(0.5) * T::TAU().ln()
}

/// Numerically stable `ln(exp(a) + exp(b))`.
pub fn log_add_exp<T: Scalar>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
