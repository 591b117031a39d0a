//! Exponential tilting and the mean-matching tilt equations.
//!
//! For an index range `ℓ..=n` the average tilted mean
//! `m̄_{ℓ,n}(θ) = (n-ℓ+1)^{-1} Σ_j m_j(θ)` is strictly increasing on Θ, so the
//! equation `m̄_{ℓ,n}(θ) = s` has exactly one root whenever `s` lies in the
//! support. [`solve_mean_tilt`] finds it by bracketing outward from a
//! starting guess and then running Brent's method.

use std::collections::HashMap;
use std::sync::RwLock;

use rand::Rng;
use serde::Serialize;

use crate::distributions::{DistributionFamily, RangeView};
use crate::error::{Error, Result};
use crate::root::{brent, RootOptions};
use crate::scalar::Scalar;

/// Density of the θ-tilted `j`-th component, `exp(θx) p_j(x) / Φ_j(θ)`.
pub fn tilted_density<T: Scalar>(family: &DistributionFamily<T>, j: usize, theta: T, x: T) -> Result<T> {
    let c = family.component(j)?;
    family.check_theta(theta)?;
    Ok(if family.support().contains(x) { c.tilted(theta).density(x) } else { T::zero() })
}

/// Draws from the θ-tilted `j`-th component.
pub fn sample_tilted<T: Scalar, R: Rng + ?Sized>(
    family: &DistributionFamily<T>,
    j: usize,
    theta: T,
    rng: &mut R,
) -> Result<T> {
    let c = family.component(j)?;
    family.check_theta(theta)?;
    Ok(c.tilted(theta).sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltSolution<T> {
    pub theta: T,
    /// `|m̄(θ) - target|` at the returned θ.
    pub residual: T,
    pub iterations: usize,
    pub bracket: (T, T),
}

#[derive(Debug, Clone, Copy)]
pub struct TiltOptions<T> {
    /// Relative residual tolerance; the absolute target is `rel_tol · max(1, |s|)`.
    pub rel_tol: T,
    /// Finite ends of Θ are pulled in by `margin · max(1, |end|)`.
    pub margin: T,
    pub max_expansions: usize,
}

impl<T: Scalar> Default for TiltOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-12).max(T::lit(4.0) * T::epsilon()),
            margin: T::lit(1e-9).max(T::lit(4.0) * T::epsilon()),
            max_expansions: 200,
        }
    }
}

/// Solves `m̄_{ℓ,n}(θ) = target` with the default options.
pub fn solve_mean_tilt<T: Scalar>(family: &DistributionFamily<T>, range: (usize, usize), target: T) -> Result<TiltSolution<T>> {
    let view = family.range(range.0, range.1)?;
    solve_on_range(family, &view, target, None, &TiltOptions::default())
}

/// Solves `m̄(θ) = target` over a prepared range view, starting the bracket
/// search from `warm_start` when given (clamped into Θ).
pub fn solve_on_range<T: Scalar>(
    family: &DistributionFamily<T>,
    view: &RangeView<'_, T>,
    target: T,
    warm_start: Option<T>,
    opts: &TiltOptions<T>,
) -> Result<TiltSolution<T>> {
    let support = family.support();
    if !target.is_finite() || !support.contains(target) {
        return Err(Error::TargetOutsideSupport {
            target: target.to_f64_lossy(),
            lo: support.lo.to_f64_lossy(),
            hi: support.hi.to_f64_lossy(),
        });
    }
    let domain = family.theta_domain().shrink(opts.margin);
    let tol = opts.rel_tol * target.abs().max(T::one());
    let f = |t: T| view.mean_of_means(t) - target;
    let clamp = |t: T| t.max(domain.lo).min(domain.hi);

    let mut lo_pt = clamp(warm_start.unwrap_or_else(T::zero));
    let mut f_lo = f(lo_pt);
    if f_lo.abs() <= tol {
        return Ok(TiltSolution { theta: lo_pt, residual: f_lo.abs(), iterations: 0, bracket: (lo_pt, lo_pt) });
    }
    let dir = -f_lo.signum();
    let slope = view.mean_of_variances(lo_pt);
    let mut step = if slope.is_finite() && slope > T::zero() {
        T::lit(1.5) * f_lo.abs() / slope + T::epsilon() * lo_pt.abs().max(T::one())
    } else {
        T::one()
    };
    let mut expansions = 0;
    let (mut hi_pt, mut f_hi);
    loop {
        hi_pt = clamp(lo_pt + dir * step);
        f_hi = f(hi_pt);
        if f_hi.signum() != f_lo.signum() || f_hi == T::zero() {
            break;
        }
        expansions += 1;
        if hi_pt == lo_pt || expansions >= opts.max_expansions || !f_hi.is_finite() {
            return Err(Error::BracketFailure { target: target.to_f64_lossy(), expansions });
        }
        lo_pt = hi_pt;
        f_lo = f_hi;
        step = step * T::lit(2.0);
    }
    let root_opts = RootOptions { f_tol: tol, x_tol: T::zero(), max_iter: 200 };
    let root = brent(f, lo_pt, hi_pt, f_lo, f_hi, root_opts)?;
    Ok(TiltSolution {
        theta: root.x,
        residual: root.fx.abs(),
        iterations: expansions + root.iterations,
        bracket: root.bracket,
    })
}

/// Thread-safe memo of tilt solutions keyed by `(ℓ, n, target)`.
///
/// Entries are exact re-solves of the same equation, so reads through the
/// cache return what a fresh solve would.
#[derive(Debug, Default)]
pub struct TiltCache<T> {
    map: RwLock<HashMap<(usize, usize, u64), TiltSolution<T>>>,
}

impl<T: Scalar> TiltCache<T> {
    pub fn new() -> Self {
        Self { map: RwLock::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("tilt cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve(&self, family: &DistributionFamily<T>, range: (usize, usize), target: T) -> Result<TiltSolution<T>> {
        let key = (range.0, range.1, target.to_f64_lossy().to_bits());
        if let Some(hit) = self.map.read().expect("tilt cache poisoned").get(&key) {
            return Ok(*hit);
        }
        let sol = solve_mean_tilt(family, range, target)?;
        self.map.write().expect("tilt cache poisoned").entry(key).or_insert(sol);
        Ok(sol)
    }
}

/// Range sums of cumulant derivatives at a fixed tilt.
///
/// `mu4`, `mu5` and `mu6` are sums of *centered* moments of the tilted
/// components, so `mu4 - 3·sum_s4` and `mu5 - 10·sum_mu3_s2` recover the
/// fourth and fifth cumulant sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateMoments<T> {
    pub range: (usize, usize),
    pub theta: T,
    pub s2: T,
    pub sigma: T,
    pub mu3: T,
    pub mu4: T,
    pub mu5: T,
    pub mu6: T,
    pub sum_s4: T,
    pub sum_mu3_s2: T,
    /// `Σ_j (μ_j⁴ - 3 (s_j²)²)`.
    pub lambda_sum: T,
}

pub fn aggregate_moments<T: Scalar>(family: &DistributionFamily<T>, theta: T, range: (usize, usize)) -> Result<AggregateMoments<T>> {
    family.check_theta(theta)?;
    let view = family.range(range.0, range.1)?;
    Ok(moments_on_range(&view, theta))
}

/// [`aggregate_moments`] over a prepared range; θ is assumed valid.
pub fn moments_on_range<T: Scalar>(view: &RangeView<'_, T>, theta: T) -> AggregateMoments<T> {
    let s2 = view.sum_by(|c| c.variance_at(theta));
    let sum_s4 = view.sum_by(|c| {
        let v = c.variance_at(theta);
        v * v
    });
    let sum_mu3_s2 = view.sum_by(|c| c.kappa_derivative(3, theta) * c.variance_at(theta));
    let mu4 = view.sum_by(|c| c.centered_moment_at(4, theta));
    AggregateMoments {
        range: (view.p, view.q),
        theta,
        s2,
        sigma: s2.sqrt(),
        mu3: view.sum_by(|c| c.kappa_derivative(3, theta)),
        mu4,
        mu5: view.sum_by(|c| c.centered_moment_at(5, theta)),
        mu6: view.sum_by(|c| c.centered_moment_at(6, theta)),
        sum_s4,
        sum_mu3_s2,
        lambda_sum: view.sum_by(|c| c.kappa_derivative(4, theta)),
    }
}
