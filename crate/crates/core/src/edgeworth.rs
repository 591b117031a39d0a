//! Edgeworth expansions of order 3 to 5 for standardized sums of
//! independent, non-identically distributed variables.
//!
//! The same formulas serve the untilted sum and its tilted variants: feed
//! [`edgeworth_coefficients`] the [`AggregateMoments`] computed at the
//! relevant tilt and index range.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{std_normal_pdf, Scalar};
use crate::tilting::AggregateMoments;

pub const MAX_HERMITE_DEGREE: usize = 9;

/// Probabilists' Hermite polynomial `He_ν(x)` for `ν <= 9`.
pub fn hermite<T: Scalar>(nu: usize, x: T) -> Result<T> {
    if nu > MAX_HERMITE_DEGREE {
        return Err(Error::UnsupportedDegree(nu));
    }
    Ok(hermite_all(x)[nu])
}

/// `He_0(x), ..., He_9(x)` via `He_{ν+1} = x He_ν - ν He_{ν-1}`.
pub fn hermite_all<T: Scalar>(x: T) -> [T; MAX_HERMITE_DEGREE + 1] {
    let mut h = [T::zero(); MAX_HERMITE_DEGREE + 1];
    h[0] = T::one();
    h[1] = x;
    for nu in 1..MAX_HERMITE_DEGREE {
        h[nu + 1] = x * h[nu] - T::from_usize_lossy(nu) * h[nu - 1];
    }
    h
}

/// Coefficients of the Hermite corrections `P₃ = α³H₃`,
/// `P₄ = β⁶H₆ + β⁴H₄`, `P₅ = γ⁹H₉ + γ⁷H₇ + γ⁵H₅`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeworthCoefficients<T> {
    pub alpha3: T,
    pub beta6: T,
    pub beta4: T,
    pub gamma9: T,
    pub gamma7: T,
    pub gamma5: T,
}

pub fn edgeworth_coefficients<T: Scalar>(m: &AggregateMoments<T>) -> Result<EdgeworthCoefficients<T>> {
    if !(m.s2 > T::zero()) || !m.s2.is_finite() {
        return Err(Error::DegenerateVariance(m.s2.to_f64_lossy()));
    }
    let s = m.s2.sqrt();
    let lit = T::lit;
    let kappa4_sum = m.mu4 - lit(3.0) * m.sum_s4;
    let kappa5_sum = m.mu5 - lit(10.0) * m.sum_mu3_s2;
    Ok(EdgeworthCoefficients {
        alpha3: m.mu3 / (lit(6.0) * s.powi(3)),
        beta6: m.mu3 * m.mu3 / (lit(72.0) * s.powi(6)),
        beta4: kappa4_sum / (lit(24.0) * s.powi(4)),
        gamma9: m.mu3.powi(3) / (lit(1296.0) * s.powi(9)),
        gamma7: m.mu3 * kappa4_sum / (lit(144.0) * s.powi(7)),
        gamma5: kappa5_sum / (lit(120.0) * s.powi(5)),
    })
}

impl<T: Scalar> EdgeworthCoefficients<T> {
    /// `Σ_{ν=3}^{order} P_ν(x)`.
    pub fn correction(&self, order: usize, x: T) -> Result<T> {
        if !(3..=5).contains(&order) {
            return Err(Error::UnsupportedEdgeworthOrder(order));
        }
        let h = hermite_all(x);
        let mut sum = self.alpha3 * h[3];
        if order >= 4 {
            sum = sum + self.beta6 * h[6] + self.beta4 * h[4];
        }
        if order >= 5 {
            sum = sum + self.gamma9 * h[9] + self.gamma7 * h[7] + self.gamma5 * h[5];
        }
        Ok(sum)
    }

    /// `𝔫(x) (1 + Σ P_ν(x))`. Not guaranteed positive in the far tails.
    pub fn density(&self, order: usize, x: T) -> Result<T> {
        Ok(std_normal_pdf(x) * (T::one() + self.correction(order, x)?))
    }
}

/// Order-`order` Edgeworth approximation to the density of the standardized
/// sum described by `moments`, evaluated at `x`.
pub fn edgeworth_density<T: Scalar>(moments: &AggregateMoments<T>, order: usize, x: T) -> Result<T> {
    edgeworth_coefficients(moments)?.density(order, x)
}
