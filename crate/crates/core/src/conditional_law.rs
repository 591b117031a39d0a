//! Approximations `G_k` to the law of `(X_1, ..., X_k)` given
//! `X_1 + ... + X_n = na`.
//!
//! Two constructions are provided:
//!
//! - **small k**: the product of the components tilted at the single
//!   parameter `θ_n^a` solving `m̄_{1,n}(θ) = a`;
//! - **large k**: a sequential kernel. At step `i` the tilt `t_{i,n}` solves
//!   `m̄_{i+1,n}(t) = (na - Σ_{j≤i} y_j) / (n - i)` and the next coordinate has
//!   density proportional to
//!
//!   ```text
//!   p̃_{i+1}(y) · exp(-(y - m_{i+1})² / (2 s²_{i+2,n})) · exp(3 α³_{i+2,n} y / σ_{i+2,n})
//!   ```
//!
//!   with all moments evaluated at `t_{i,n}`.
//!
//! Kernel draws use exact rejection from the tilted component whenever the
//! predicted acceptance rate is reasonable, and inverse-CDF sampling on an
//! adaptive grid otherwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{Component, DistributionFamily, Interval, RangeView};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, uniform_breaks, QuadOptions};
use crate::rng::PathRng;
use crate::scalar::Scalar;
use crate::tilting::{solve_on_range, TiltOptions, TiltSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallK,
    LargeK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeMode {
    SmallK,
    LargeK,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeConfig<T> {
    pub mode: RegimeMode,
    /// Small-k exponent: `k <= n^rho`, `0 < rho < 1/2`.
    pub rho: T,
    /// Large-k exponent: `n - k >= (log n)^tau`, `tau > 6`.
    pub tau: T,
}

impl<T: Scalar> RegimeConfig<T> {
    pub fn new(mode: RegimeMode, rho: T, tau: T) -> Result<Self> {
        if !(rho > T::zero() && rho < T::lit(0.5)) {
            return Err(Error::InvalidParameter(format!("rho = {rho} must lie in (0, 1/2)")));
        }
        if !(tau > T::lit(6.0)) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau = {tau} must exceed 6")));
        }
        Ok(Self { mode, rho, tau })
    }
}

impl<T: Scalar> Default for RegimeConfig<T> {
    fn default() -> Self {
        Self { mode: RegimeMode::Auto, rho: T::lit(0.3), tau: T::lit(6.5) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeChoice {
    pub regime: Regime,
    /// Neither (or both) regime conditions hold, or a forced mode violates
    /// its own condition.
    pub out_of_theory: bool,
}

/// Picks the construction for `(n, k)`.
pub fn choose_regime<T: Scalar>(n: usize, k: usize, config: &RegimeConfig<T>) -> RegimeChoice {
    let nf = n as f64;
    let small = (k as f64) <= nf.powf(config.rho.to_f64_lossy());
    let large = n > k && ((n - k) as f64) >= nf.ln().powf(config.tau.to_f64_lossy());
    match config.mode {
        RegimeMode::SmallK => RegimeChoice { regime: Regime::SmallK, out_of_theory: !small },
        RegimeMode::LargeK => RegimeChoice { regime: Regime::LargeK, out_of_theory: !large },
        RegimeMode::Auto => match (small, large) {
            (true, false) => RegimeChoice { regime: Regime::SmallK, out_of_theory: false },
            (false, true) => RegimeChoice { regime: Regime::LargeK, out_of_theory: false },
            _ => RegimeChoice {
                regime: if (k as f64) <= nf.sqrt() { Regime::SmallK } else { Regime::LargeK },
                out_of_theory: true,
            },
        },
    }
}

fn check_dimensions<T: Scalar>(family: &DistributionFamily<T>, n: usize, k: usize) -> Result<()> {
    if n > family.len() {
        return Err(Error::IndexOutOfRange { index: n, len: family.len() });
    }
    if n < 3 || k == 0 || k > n - 2 {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n - 2, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// Position of the sequential construction after `i` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalState<T> {
    pub n: usize,
    pub a: T,
    pub k: usize,
    pub i: usize,
    pub partial_sum: T,
    /// `t_{i,n}`.
    pub tilt: TiltSolution<T>,
}

impl<T: Scalar> ConditionalState<T> {
    /// Builds the state and solves for `t_{i,n}`, optionally warm-started.
    pub fn new(
        family: &DistributionFamily<T>,
        n: usize,
        a: T,
        k: usize,
        i: usize,
        partial_sum: T,
        warm_start: Option<T>,
    ) -> Result<Self> {
        check_dimensions(family, n, k)?;
        if i >= k {
            return Err(Error::InvalidParameter(format!("step {i} must be below k = {k}")));
        }
        let view = family.range(i + 1, n)?;
        Self::solve(family, &view, n, a, k, i, partial_sum, warm_start)
    }

    #[allow(clippy::too_many_arguments)]
    fn solve(
        family: &DistributionFamily<T>,
        view: &RangeView<'_, T>,
        n: usize,
        a: T,
        k: usize,
        i: usize,
        partial_sum: T,
        warm_start: Option<T>,
    ) -> Result<Self> {
        let residual = residual_mean(n, a, i, partial_sum);
        if !family.support().contains(residual) {
            return Err(Error::ResidualMeanOutOfSupport { step: i, residual_mean: residual.to_f64_lossy() });
        }
        let tilt = solve_on_range(family, view, residual, warm_start, &TiltOptions::default())?;
        Ok(Self { n, a, k, i, partial_sum, tilt })
    }

    /// `(na - Σ_{j≤i} y_j) / (n - i)`.
    pub fn residual_mean(&self) -> T {
        residual_mean(self.n, self.a, self.i, self.partial_sum)
    }
}

fn residual_mean<T: Scalar>(n: usize, a: T, i: usize, partial_sum: T) -> T {
    (T::from_usize_lossy(n) * a - partial_sum) / T::from_usize_lossy(n - i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelSampling {
    /// Rejection when the predicted acceptance rate is at least
    /// [`SamplerOptions::min_acceptance`], inverse CDF otherwise.
    #[default]
    Auto,
    Rejection,
    InverseCdf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions<T> {
    pub method: KernelSampling,
    pub min_acceptance: T,
    /// Initial number of grid cells for inverse-CDF draws.
    pub initial_grid: usize,
    pub max_grid: usize,
    pub tail_mass_tol: T,
    pub richardson_tol: T,
}

impl<T: Scalar> Default for SamplerOptions<T> {
    fn default() -> Self {
        Self {
            method: KernelSampling::Auto,
            min_acceptance: T::lit(0.05),
            initial_grid: 1 << 12,
            max_grid: 1 << 20,
            tail_mass_tol: T::lit(1e-12),
            richardson_tol: T::lit(1e-9),
        }
    }
}

/// The step-`i` transition density `g(y_{i+1} | y_1^i)` up to its normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel<T> {
    pub step: usize,
    /// `p̃_{i+1}` at `t_{i,n}`.
    pub tilted: Component<T>,
    /// `m_{i+1}(t_{i,n})`.
    pub center: T,
    /// `s²_{i+2,n}(t_{i,n})`.
    pub tail_variance: T,
    /// `α³_{i+2,n}(t_{i,n})`.
    pub tail_alpha3: T,
    /// `3 α³_{i+2,n} / σ_{i+2,n}`.
    pub skew: T,
    /// Values of `y_{i+1}` that keep the next residual mean inside the support.
    pub feasible: Interval<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(family: &DistributionFamily<T>, state: &ConditionalState<T>) -> Result<Self> {
        let (n, i) = (state.n, state.i);
        if i + 2 > n {
            return Err(Error::EmptyTailRange { from: i + 2, n });
        }
        let tail = family.range(i + 2, n)?;
        Self::from_parts(family, state, &tail)
    }

    fn from_parts(family: &DistributionFamily<T>, state: &ConditionalState<T>, tail: &RangeView<'_, T>) -> Result<Self> {
        let t = state.tilt.theta;
        family.check_theta(t)?;
        let comp = family.component(state.i + 1)?;
        let tail_variance = tail.sum_by(|c| c.variance_at(t));
        let tail_mu3 = tail.sum_by(|c| c.kappa_derivative(3, t));
        let sigma = tail_variance.sqrt();
        let tail_alpha3 = tail_mu3 / (T::lit(6.0) * tail_variance * sigma);
        let support = family.support();
        let budget = T::from_usize_lossy(state.n) * state.a - state.partial_sum;
        let remaining = T::from_usize_lossy(state.n - state.i - 1);
        let bound = |end: T| if end.is_finite() { budget - remaining * end } else { -end };
        let feasible = Interval::new(bound(support.hi), bound(support.lo)).intersect(&support);
        Ok(Self {
            step: state.i,
            tilted: comp.tilted(t),
            center: comp.mean_at(t),
            tail_variance,
            tail_alpha3,
            skew: T::lit(3.0) * tail_alpha3 / sigma,
            feasible,
        })
    }

    /// `log` of the unnormalized kernel; `-∞` outside the feasible set.
    pub fn ln_unnormalized(&self, y: T) -> T {
        if !self.feasible.contains(y) {
            return T::neg_infinity();
        }
        let d = y - self.center;
        self.tilted.ln_density(y) - d * d / (T::lit(2.0) * self.tail_variance) + self.skew * y
    }

    pub fn unnormalized(&self, y: T) -> T {
        let l = self.ln_unnormalized(y);
        if l == T::neg_infinity() {
            T::zero()
        } else {
            l.exp()
        }
    }

    /// Gaussian approximation `(mean, sd)` of the kernel.
    fn gaussian_proxy(&self) -> (T, T) {
        let tilted_var = self.tilted.variance_at(T::zero());
        let precision = T::one() / tilted_var + T::one() / self.tail_variance;
        (self.center + self.skew / precision, (T::one() / precision).sqrt())
    }

    /// Interval carrying all but a negligible fraction of the kernel mass,
    /// together with the log-kernel maximum found on it.
    ///
    /// Starts from the tilted mean ± 12 tilted sds and widens any side whose
    /// endpoint still carries more than `e^{-70}` of the peak value.
    pub fn effective_range(&self) -> (T, T, T) {
        let tilted_sd = self.tilted.variance_at(T::zero()).sqrt();
        let (proxy_mean, proxy_sd) = self.gaussian_proxy();
        let twelve = T::lit(12.0);
        let mut lo = (self.center - twelve * tilted_sd).min(proxy_mean - twelve * proxy_sd);
        let mut hi = (self.center + twelve * tilted_sd).max(proxy_mean + twelve * proxy_sd);
        lo = lo.max(self.feasible.lo);
        hi = hi.min(self.feasible.hi);
        if !(lo < hi) {
            // Feasible set lies entirely outside the nominal window.
            lo = self.feasible.lo;
            hi = if self.feasible.hi.is_finite() { self.feasible.hi } else { lo + twelve * tilted_sd };
        }
        let scan = |lo: T, hi: T| {
            uniform_breaks(lo, hi, 64)
                .into_iter()
                .map(|y| self.ln_unnormalized(y))
                .fold(T::neg_infinity(), T::max)
        };
        let mut peak = scan(lo, hi);
        let cutoff = T::lit(70.0);
        for _ in 0..60 {
            let width = hi - lo;
            let mut moved = false;
            if hi < self.feasible.hi && self.ln_unnormalized(hi) > peak - cutoff {
                hi = (hi + width).min(self.feasible.hi);
                moved = true;
            }
            if lo > self.feasible.lo && self.ln_unnormalized(lo) > peak - cutoff {
                lo = (lo - width).max(self.feasible.lo);
                moved = true;
            }
            if !moved {
                break;
            }
            peak = peak.max(scan(lo, hi));
        }
        // Open-interval ends contribute nothing but may evaluate to -∞.
        (lo, hi, peak)
    }

    /// Mean and variance of the kernel when `p̃` is Gaussian, in which case
    /// the kernel itself is Gaussian.
    fn gaussian_posterior(&self) -> Option<(T, T, T, T)> {
        match self.tilted {
            Component::Gaussian { mean, sd } if self.tail_variance.is_finite() => {
                let (s2, v) = (sd * sd, self.tail_variance);
                let shifted = self.center + self.skew * v;
                let precision = T::one() / s2 + T::one() / v;
                let post_mean = (mean / s2 + shifted / v) / precision;
                Some((post_mean, T::one() / precision, mean, s2))
            }
            _ => None,
        }
    }

    /// `log C_i`; closed form for Gaussian components, adaptive quadrature
    /// otherwise.
    pub fn ln_normalizer(&self) -> Result<T> {
        match self.gaussian_posterior() {
            Some((_, _, mean, s2)) => {
                let v = self.tail_variance;
                let shifted = self.center + self.skew * v;
                let d = mean - shifted;
                let two = T::lit(2.0);
                Ok(self.ln_envelope() + T::lit(0.5) * (v / (v + s2)).ln() - d * d / (two * (v + s2)))
            }
            None => self.ln_normalizer_quadrature(),
        }
    }

    /// `log C_i` by adaptive Gauss-Kronrod quadrature over
    /// [`Self::effective_range`].
    pub fn ln_normalizer_quadrature(&self) -> Result<T> {
        let (lo, hi, peak) = self.effective_range();
        if !peak.is_finite() {
            return Err(Error::GridUnderflow);
        }
        let opts = QuadOptions::default().with_rel_tol(T::lit(1e-12).max(T::lit(16.0) * T::epsilon()));
        let mut f = |y: T| {
            let l = self.ln_unnormalized(y);
            if l == T::neg_infinity() {
                T::zero()
            } else {
                (l - peak).exp()
            }
        };
        let r = integrate_with_breaks(&mut f, &uniform_breaks(lo, hi, 8), opts)?;
        if !(r.value > T::zero()) {
            return Err(Error::GridUnderflow);
        }
        Ok(peak + r.value.ln())
    }

    /// `C_i`.
    pub fn normalizer(&self) -> Result<T> {
        Ok(self.ln_normalizer()?.exp())
    }

    /// `log g(y | y_1^i)`.
    pub fn ln_density(&self, y: T, ln_c: T) -> T {
        self.ln_unnormalized(y) - ln_c
    }

    /// Upper bound of `ln[kernel / p̃]`: `skew·m + skew²·s²/2`.
    fn ln_envelope(&self) -> T {
        self.skew * self.center + self.skew * self.skew * self.tail_variance / T::lit(2.0)
    }

    /// Predicted acceptance rate of rejection sampling from `p̃`.
    pub fn acceptance_rate(&self, ln_c: T) -> T {
        (ln_c - self.ln_envelope()).exp().min(T::one())
    }

    /// Draws `y_{i+1}`; `ln_c` must be [`Self::ln_normalizer`].
    pub fn sample<R: Rng + ?Sized>(&self, ln_c: T, rng: &mut R, opts: &SamplerOptions<T>) -> Result<T> {
        if let Some((mean, var, _, _)) = self.gaussian_posterior() {
            return Ok(mean + var.sqrt() * T::sample_standard_normal(rng));
        }
        let use_rejection = match opts.method {
            KernelSampling::Rejection => true,
            KernelSampling::InverseCdf => false,
            KernelSampling::Auto => self.acceptance_rate(ln_c) >= opts.min_acceptance,
        };
        if use_rejection {
            if let Some(y) = self.sample_rejection(rng, 100_000) {
                return Ok(y);
            }
        }
        self.sample_inverse_cdf(rng, opts)
    }

    /// Exact rejection sampler with proposal `p̃`: accept with probability
    /// `exp(-(y - m - skew·s²)² / (2 s²))`.
    fn sample_rejection<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: usize) -> Option<T> {
        let shift = self.center + self.skew * self.tail_variance;
        let two_v = T::lit(2.0) * self.tail_variance;
        for _ in 0..max_attempts {
            let y = self.tilted.sample(rng);
            if !self.feasible.contains(y) {
                continue;
            }
            let d = y - shift;
            let u = T::sample_open01(rng);
            if u.ln() < -d * d / two_v {
                return Some(y);
            }
        }
        None
    }

    /// Inverse-CDF draw on a uniform grid, refined until the trapezoid
    /// Richardson error and the estimated truncated tail mass are within
    /// tolerance.
    pub fn sample_inverse_cdf<R: Rng + ?Sized>(&self, rng: &mut R, opts: &SamplerOptions<T>) -> Result<T> {
        Ok(self.inverse_cdf(opts)?.sample(rng))
    }

    /// Tabulated inverse CDF of the kernel, reusable for many draws.
    pub fn inverse_cdf(&self, opts: &SamplerOptions<T>) -> Result<KernelCdf<T>> {
        let (mut lo, mut hi, peak) = self.effective_range();
        if !peak.is_finite() {
            return Err(Error::GridUnderflow);
        }
        let (_, proxy_sd) = self.gaussian_proxy();
        let mut cells = opts.initial_grid.max(2);
        for _ in 0..64 {
            let grid = KernelCdf::build(|y| self.ln_unnormalized(y), peak, lo, hi, cells);
            if !(grid.total > T::lit(1e-300)) {
                return Err(Error::GridUnderflow);
            }
            let width = hi - lo;
            let reach = proxy_sd.max(grid.h);
            let lo_tail = if lo > self.feasible.lo { grid.density[0] * reach / grid.total } else { T::zero() };
            let hi_tail = if hi < self.feasible.hi {
                grid.density[grid.density.len() - 1] * reach / grid.total
            } else {
                T::zero()
            };
            if lo_tail + hi_tail >= opts.tail_mass_tol {
                if lo_tail > T::zero() {
                    lo = (lo - width / T::lit(2.0)).max(self.feasible.lo);
                }
                if hi_tail > T::zero() {
                    hi = (hi + width / T::lit(2.0)).min(self.feasible.hi);
                }
                continue;
            }
            if grid.richardson_error() >= opts.richardson_tol && cells < opts.max_grid {
                cells *= 2;
                continue;
            }
            return Ok(grid);
        }
        Err(Error::GridUnderflow)
    }
}

/// Tabulated piecewise-linear density and its trapezoid CDF.
#[derive(Debug, Clone)]
pub struct KernelCdf<T> {
    lo: T,
    h: T,
    density: Vec<T>,
    cumulative: Vec<T>,
    total: T,
    coarse_total: T,
}

impl<T: Scalar> KernelCdf<T> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.invert(T::sample_open01(rng))
    }

    pub fn cells(&self) -> usize {
        self.density.len() - 1
    }

    fn build<F: Fn(T) -> T>(ln_f: F, shift: T, lo: T, hi: T, cells: usize) -> Self {
        let h = (hi - lo) / T::from_usize_lossy(cells);
        let density: Vec<T> = (0..=cells)
            .map(|i| {
                let y = if i == cells { hi } else { lo + h * T::from_usize_lossy(i) };
                let l = ln_f(y);
                if l == T::neg_infinity() {
                    T::zero()
                } else {
                    (l - shift).exp()
                }
            })
            .collect();
        let half = T::lit(0.5);
        let mut cumulative = Vec::with_capacity(cells + 1);
        let mut acc = T::zero();
        cumulative.push(acc);
        for w in density.windows(2) {
            acc = acc + half * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        let coarse_total = density
            .iter()
            .step_by(2)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| *w[0] + *w[1])
            .sum::<T>()
            * h;
        Self { lo, h, density, cumulative, total: acc, coarse_total }
    }

    fn richardson_error(&self) -> T {
        (self.total - self.coarse_total).abs() / (T::lit(3.0) * self.total)
    }

    fn invert(&self, u: T) -> T {
        let target = u * self.total;
        let idx = self.cumulative.partition_point(|&c| c < target).clamp(1, self.cumulative.len() - 1);
        let cell = idx - 1;
        let (f0, f1) = (self.density[cell], self.density[cell + 1]);
        let rem = target - self.cumulative[cell];
        let x0 = self.lo + self.h * T::from_usize_lossy(cell);
        // Solve f0·s + (f1 - f0)·s²/(2h) = rem for s in [0, h].
        let slope = (f1 - f0) / self.h;
        let s = if slope.abs() <= T::epsilon() * (f0 + f1) / self.h {
            if f0 > T::zero() {
                rem / f0
            } else {
                T::zero()
            }
        } else {
            let disc = (f0 * f0 + T::lit(2.0) * slope * rem).max(T::zero());
            T::lit(2.0) * rem / (f0 + disc.sqrt())
        };
        x0 + s.max(T::zero()).min(self.h)
    }
}

/// `g(y | y_1^i)` before normalization at the given state.
pub fn kernel_unnormalized<T: Scalar>(family: &DistributionFamily<T>, state: &ConditionalState<T>, y: T) -> Result<T> {
    Ok(Kernel::new(family, state)?.unnormalized(y))
}

/// Normalizer `C_i` of the step kernel at the given state.
pub fn kernel_normalizer<T: Scalar>(family: &DistributionFamily<T>, state: &ConditionalState<T>) -> Result<T> {
    Kernel::new(family, state)?.normalizer()
}

/// A sampled prefix together with its log-density under `G_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GkPath<T> {
    pub y: Vec<T>,
    /// `log g(y_{i+1} | y_1^i)` per step (small k: per-coordinate tilted log-densities).
    pub step_log_densities: Vec<T>,
    pub log_density: T,
    /// `t_{i,n}` per step (small k: `θ_n^a` repeated).
    pub tilts: Vec<T>,
}

impl<T: Scalar> GkPath<T> {
    /// `t_{k-1,n}`.
    pub fn final_tilt(&self) -> T {
        *self.tilts.last().expect("paths have k >= 1 steps")
    }
}

/// `G_k` for fixed `(n, a, k)` and regime.
#[derive(Debug, Clone)]
pub struct GkSampler<'a, T> {
    family: &'a DistributionFamily<T>,
    pub n: usize,
    pub a: T,
    pub k: usize,
    pub regime: Regime,
    pub options: SamplerOptions<T>,
    /// `θ_n^a`, which is also `t_{0,n}`.
    pub theta_na: TiltSolution<T>,
}

impl<'a, T: Scalar> GkSampler<'a, T> {
    pub fn new(family: &'a DistributionFamily<T>, n: usize, a: T, k: usize, regime: Regime) -> Result<Self> {
        Self::with_options(family, n, a, k, regime, SamplerOptions::default())
    }

    pub fn with_options(
        family: &'a DistributionFamily<T>,
        n: usize,
        a: T,
        k: usize,
        regime: Regime,
        options: SamplerOptions<T>,
    ) -> Result<Self> {
        check_dimensions(family, n, k)?;
        let view = family.range(1, n)?;
        let state = ConditionalState::solve(family, &view, n, a, k, 0, T::zero(), None)?;
        Ok(Self { family, n, a, k, regime, options, theta_na: state.tilt })
    }

    pub fn family(&self) -> &'a DistributionFamily<T> {
        self.family
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GkPath<T>> {
        match self.regime {
            Regime::SmallK => self.sample_small(rng),
            Regime::LargeK => self.walk(Walk::Sample(rng)),
        }
    }

    pub fn log_density(&self, y: &[T]) -> Result<T> {
        Ok(self.evaluate(y)?.log_density)
    }

    /// Re-runs the construction along `y`, recording every step.
    pub fn evaluate(&self, y: &[T]) -> Result<GkPath<T>> {
        if y.len() != self.k {
            return Err(Error::InvalidParameter(format!("expected {} coordinates, got {}", self.k, y.len())));
        }
        match self.regime {
            Regime::SmallK => self.evaluate_small(y),
            Regime::LargeK => self.walk::<PathRng>(Walk::Evaluate(y)),
        }
    }

    fn small_tilted(&self, j: usize) -> Result<Component<T>> {
        Ok(self.family.component(j)?.tilted(self.theta_na.theta))
    }

    fn sample_small<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GkPath<T>> {
        let mut y = Vec::with_capacity(self.k);
        let mut steps = Vec::with_capacity(self.k);
        for j in 1..=self.k {
            let c = self.small_tilted(j)?;
            let v = c.sample(rng);
            steps.push(c.ln_density(v));
            y.push(v);
        }
        Ok(GkPath {
            log_density: steps.iter().copied().sum(),
            step_log_densities: steps,
            y,
            tilts: vec![self.theta_na.theta; self.k],
        })
    }

    fn evaluate_small(&self, y: &[T]) -> Result<GkPath<T>> {
        let mut steps = Vec::with_capacity(self.k);
        for (idx, &v) in y.iter().enumerate() {
            steps.push(self.small_tilted(idx + 1)?.ln_density(v));
        }
        Ok(GkPath {
            log_density: steps.iter().copied().sum(),
            step_log_densities: steps,
            y: y.to_vec(),
            tilts: vec![self.theta_na.theta; self.k],
        })
    }

    /// The large-k sequential pass, either drawing each coordinate or reading
    /// it from a given prefix.
    fn walk<R: Rng + ?Sized>(&self, mut mode: Walk<'_, T, R>) -> Result<GkPath<T>> {
        let mut y = Vec::with_capacity(self.k);
        let mut steps = Vec::with_capacity(self.k);
        let mut tilts = Vec::with_capacity(self.k);
        let mut partial = T::zero();
        let mut warm = None;
        let mut state = ConditionalState {
            n: self.n,
            a: self.a,
            k: self.k,
            i: 0,
            partial_sum: T::zero(),
            tilt: self.theta_na,
        };
        for i in 0..self.k {
            if i > 0 {
                let view = self.family.range(i + 1, self.n)?;
                state = ConditionalState::solve(self.family, &view, self.n, self.a, self.k, i, partial, warm)?;
            }
            let tail = self.family.range(i + 2, self.n)?;
            let kernel = Kernel::from_parts(self.family, &state, &tail)?;
            let ln_c = kernel.ln_normalizer()?;
            let v = match &mut mode {
                Walk::Sample(rng) => kernel.sample(ln_c, *rng, &self.options)?,
                Walk::Evaluate(given) => {
                    let v = given[i];
                    if self.family.support().contains(v) && !kernel.feasible.contains(v) {
                        let residual = residual_mean(self.n, self.a, i + 1, partial + v);
                        return Err(Error::ResidualMeanOutOfSupport {
                            step: i + 1,
                            residual_mean: residual.to_f64_lossy(),
                        });
                    }
                    v
                }
            };
            steps.push(kernel.ln_density(v, ln_c));
            tilts.push(state.tilt.theta);
            warm = Some(state.tilt.theta);
            partial = partial + v;
            y.push(v);
        }
        Ok(GkPath { log_density: steps.iter().copied().sum(), step_log_densities: steps, y, tilts })
    }
}

/// A law on `R^d` that can be sampled and evaluated, as needed by TV and
/// importance-sampling estimators.
pub trait PathLaw<T>: Sync {
    fn dim(&self) -> usize;

    /// One draw together with its log-density.
    fn sample_path(&self, rng: &mut PathRng) -> Result<(Vec<T>, T)>;

    fn log_density(&self, y: &[T]) -> Result<T>;
}

impl<T: Scalar> PathLaw<T> for GkSampler<'_, T> {
    fn dim(&self) -> usize {
        self.k
    }

    fn sample_path(&self, rng: &mut PathRng) -> Result<(Vec<T>, T)> {
        let p = self.sample(rng)?;
        Ok((p.y, p.log_density))
    }

    fn log_density(&self, y: &[T]) -> Result<T> {
        GkSampler::log_density(self, y)
    }
}

enum Walk<'r, T, R: ?Sized> {
    Sample(&'r mut R),
    Evaluate(&'r [T]),
}

/// `log g_k(y_1^k)`.
pub fn g_k_log_density<T: Scalar>(
    family: &DistributionFamily<T>,
    n: usize,
    a: T,
    k: usize,
    y: &[T],
    regime: Regime,
) -> Result<T> {
    GkSampler::new(family, n, a, k, regime)?.log_density(y)
}

/// One draw from `G_k`.
pub fn sample_g_k<T: Scalar, R: Rng + ?Sized>(
    family: &DistributionFamily<T>,
    n: usize,
    a: T,
    k: usize,
    regime: Regime,
    rng: &mut R,
) -> Result<GkPath<T>> {
    GkSampler::new(family, n, a, k, regime)?.sample(rng)
}
