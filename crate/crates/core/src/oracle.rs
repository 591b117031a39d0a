//! Ground truth for the conditional law.
//!
//! The exact conditional density of `(X_1, ..., X_k)` given `S_{1,n} = na` is
//!
//! ```text
//! Π_{j≤k} p_j(y_j) · p_{S_{k+1,n}}(na - Σ y_j) / p_{S_{1,n}}(na)
//! ```
//!
//! The two sum densities are computed on a uniform grid by FFT convolution of
//! the gridded component densities. Because the ratio is unchanged by
//! exponential tilting, the grids are built for the family tilted at `θ_n^a`,
//! which moves the conditioning point into the bulk of `S_{1,n}` where the
//! grid is accurate.
//!
//! For all-Gaussian families the conditional law is Gaussian and available in
//! closed form ([`GaussianConditional`]).

use std::io::{Read, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::conditional_law::PathLaw;
use crate::distributions::{Component, DistributionFamily};
use crate::error::{Error, Result};
use crate::rng::{map_paths, PathRng};
use crate::scalar::Scalar;
use crate::tilting::solve_mean_tilt;

const GRID_MAGIC: &[u8; 4] = b"TGRD";
const GRID_VERSION: u16 = 1;

/// Density sampled at `origin + i·spacing`, with mass `spacing · Σ values`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity<T> {
    pub origin: T,
    pub spacing: T,
    pub values: Vec<T>,
    /// The law has a jump at `origin`, whose node carries only the mass of
    /// the half cell to its right. Interpolation in the first cell then
    /// extrapolates from the interior.
    pub jump_at_origin: bool,
}

impl<T: Scalar> GridDensity<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> T {
        self.origin + self.spacing * T::from_usize_lossy(i)
    }

    pub fn end(&self) -> T {
        self.node(self.values.len().saturating_sub(1))
    }

    pub fn mass(&self) -> T {
        self.spacing * self.values.iter().copied().sum::<T>()
    }

    pub fn mean(&self) -> T {
        let m: T = self.values.iter().enumerate().map(|(i, v)| self.node(i) * *v).sum();
        m * self.spacing / self.mass()
    }

    fn normalize(&mut self) {
        let m = self.mass();
        for v in &mut self.values {
            *v = *v / m;
        }
    }

    /// Drops leading and trailing nodes below `rel_tol · max`.
    fn trim(&mut self, rel_tol: T) {
        let max = self.values.iter().copied().fold(T::zero(), T::max);
        let cut = max * rel_tol;
        let first = self.values.iter().position(|v| *v > cut).unwrap_or(0);
        let last = self.values.iter().rposition(|v| *v > cut).unwrap_or(0);
        // A jump node is kept even when its half weight is small. Otherwise
        // the cut is rounded to an even node so that grids at spacing h and
        // h/2 built from the same components stay node-aligned.
        let first = if self.jump_at_origin { 0 } else { first & !1 };
        if first > 0 || last + 1 < self.values.len() {
            self.origin = self.node(first);
            self.values = self.values[first..=last].to_vec();
        }
    }

    /// Density at `x` by log-linear interpolation between positive nodes
    /// (linear otherwise); zero outside the grid.
    pub fn value_at(&self, x: T) -> T {
        let l = self.ln_value_at(x);
        if l == T::neg_infinity() {
            T::zero()
        } else {
            l.exp()
        }
    }

    pub fn ln_value_at(&self, x: T) -> T {
        let len = self.values.len();
        if len == 0 || !(x >= self.origin) || !(x <= self.end()) {
            return T::neg_infinity();
        }
        let pos = (x - self.origin) / self.spacing;
        let mut cell = pos.floor().to_usize().unwrap_or(0).min(len.saturating_sub(2));
        if len == 1 {
            return self.values[0].ln();
        }
        if self.jump_at_origin && cell == 0 && len >= 3 {
            cell = 1;
        }
        let frac = pos - T::from_usize_lossy(cell);
        let (v0, v1) = (self.values[cell], self.values[cell + 1]);
        if v0 > T::zero() && v1 > T::zero() {
            let (l0, l1) = (v0.ln(), v1.ln());
            l0 + frac * (l1 - l0)
        } else {
            let v = v0 + frac * (v1 - v0);
            if v > T::zero() {
                v.ln()
            } else {
                T::neg_infinity()
            }
        }
    }

    /// `x,density` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,density")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.node(i).to_f64_lossy(), v.to_f64_lossy())?;
        }
        Ok(())
    }

    /// Binary dump: magic `TGRD`, version `u16`, origin and spacing as `f64`,
    /// node count as `u64`, then the values as `f64`; all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(GRID_MAGIC)?;
        w.write_all(&GRID_VERSION.to_le_bytes())?;
        w.write_all(&self.origin.to_f64_lossy().to_le_bytes())?;
        w.write_all(&self.spacing.to_f64_lossy().to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != GRID_MAGIC {
            return Err(Error::Io("not a TGRD stream".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        if u16::from_le_bytes(b2) != GRID_VERSION {
            return Err(Error::Io("unsupported TGRD version".into()));
        }
        let next_word = |r: &mut R| -> Result<[u8; 8]> {
            let mut b8 = [0u8; 8];
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let origin = f64::from_le_bytes(next_word(&mut r)?);
        let spacing = f64::from_le_bytes(next_word(&mut r)?);
        let count = u64::from_le_bytes(next_word(&mut r)?) as usize;
        let values = (0..count)
            .map(|_| next_word(&mut r).map(|b| T::lit(f64::from_le_bytes(b))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { origin: T::lit(origin), spacing: T::lit(spacing), values, jump_at_origin: false })
    }
}

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    /// Node spacing; `None` picks `min component sd / 200`.
    pub spacing: Option<T>,
    /// Nodes below `tail_tol · max` are trimmed from both ends.
    pub tail_tol: T,
    /// Recompute at half spacing and fail with `GridTooCoarse` when the two
    /// grids differ by more than `coarseness_tol` (sup-norm).
    pub check_coarseness: bool,
    pub coarseness_tol: T,
}

impl<T: Scalar> Default for GridSpec<T> {
    fn default() -> Self {
        Self { spacing: None, tail_tol: T::lit(1e-17), check_coarseness: true, coarseness_tol: T::lit(1e-6) }
    }
}

impl<T: Scalar> GridSpec<T> {
    pub fn with_spacing(spacing: T) -> Self {
        Self { spacing: Some(spacing), ..Self::default() }
    }

    fn resolve_spacing(&self, components: &[(&Component<T>, usize)]) -> T {
        self.spacing.unwrap_or_else(|| {
            let sd = components
                .iter()
                .map(|(c, _)| c.variance_at(T::zero()).sqrt())
                .fold(T::infinity(), T::min);
            sd / T::lit(200.0)
        })
    }
}

/// Point-sampled density of one component on nodes `origin + i·h`.
///
/// A finite lower support end becomes the origin; if the density jumps there,
/// the origin node holds the mass of `[lo, lo + h/2]` divided by `h`.
pub fn component_grid<T: Scalar>(c: &Component<T>, spacing: T, tail_tol: T) -> GridDensity<T> {
    let support = c.support();
    let mean = c.mean_at(T::zero());
    let sd = c.variance_at(T::zero()).sqrt();
    let reference = c.density(mean).max(c.density(mean + sd)).max(c.density(mean - sd));
    let negligible = |x: T| c.density(x) <= tail_tol * reference;
    let step = sd;
    let mut hi = mean + T::lit(6.0) * sd;
    while !negligible(hi) {
        hi = hi + step;
    }
    let (origin, jump) = if support.lo.is_finite() {
        (support.lo, c.jump_points().is_some())
    } else {
        let mut lo = mean - T::lit(6.0) * sd;
        while !negligible(lo) {
            lo = lo - step;
        }
        (lo, false)
    };
    let count = ((hi - origin) / spacing).ceil().to_usize().unwrap_or(0) + 1;
    let mut values: Vec<T> = (0..count)
        .map(|i| c.density(origin + spacing * T::from_usize_lossy(i)))
        .collect();
    if jump {
        values[0] = jump_node_value(c, spacing);
    }
    let mut g = GridDensity { origin, spacing, values, jump_at_origin: jump };
    g.normalize();
    g
}

/// Weight of the origin node when the density jumps there: half the right
/// limit, which turns discrete convolution into the trapezoid rule. An
/// unbounded right limit (gamma shape below one) falls back to the mass of
/// the half cell `[lo, lo + h/2]` divided by `h`.
fn jump_node_value<T: Scalar>(c: &Component<T>, spacing: T) -> T {
    let half = T::lit(0.5);
    match *c {
        Component::Exponential { rate } | Component::ShiftedExponential { rate, .. } => half * rate,
        Component::Gamma { shape, rate } if shape == T::one() => half * rate,
        Component::Gamma { shape, rate } => {
            let mass = statrs::function::gamma::gamma_lr(shape.to_f64_lossy(), (half * rate * spacing).to_f64_lossy());
            T::lit(mass) / spacing
        }
        Component::Gaussian { .. } => T::zero(),
    }
}

/// Reusable FFT plans for grid convolution.
pub struct Convolver<T: Scalar> {
    planner: FftPlanner<T>,
    tail_tol: T,
}

impl<T: Scalar> Convolver<T> {
    pub fn new(tail_tol: T) -> Self {
        Self { planner: FftPlanner::new(), tail_tol }
    }

    /// Density of the sum of two independent variables on a common spacing.
    pub fn convolve(&mut self, a: &GridDensity<T>, b: &GridDensity<T>) -> GridDensity<T> {
        let h = a.spacing;
        let len = a.len() + b.len() - 1;
        let mut values = if a.len().min(b.len()) <= 64 {
            let mut out = vec![T::zero(); len];
            for (i, x) in a.values.iter().enumerate() {
                for (j, y) in b.values.iter().enumerate() {
                    out[i + j] = out[i + j] + *x * *y;
                }
            }
            out
        } else {
            self.fft_convolve(&a.values, &b.values, len)
        };
        for v in &mut values {
            *v = (*v * h).max(T::zero());
        }
        if a.jump_at_origin && b.jump_at_origin {
            // Trapezoid over the empty interval [o_a + o_b, o_a + o_b].
            values[0] = T::zero();
        }
        let mut g = GridDensity { origin: a.origin + b.origin, spacing: h, values, jump_at_origin: false };
        g.trim(self.tail_tol);
        g.normalize();
        g
    }

    fn fft_convolve(&mut self, a: &[T], b: &[T], len: usize) -> Vec<T> {
        let size = len.next_power_of_two();
        let forward = self.planner.plan_fft_forward(size);
        let inverse = self.planner.plan_fft_inverse(size);
        let pad = |v: &[T]| {
            let mut buf: Vec<Complex<T>> = v.iter().map(|x| Complex::new(*x, T::zero())).collect();
            buf.resize(size, Complex::new(T::zero(), T::zero()));
            buf
        };
        let (mut fa, mut fb) = (pad(a), pad(b));
        forward.process(&mut fa);
        forward.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = *x * *y;
        }
        inverse.process(&mut fa);
        let scale = T::one() / T::from_usize_lossy(size);
        fa[..len].iter().map(|c| c.re * scale).collect()
    }

    /// `count`-fold self-convolution by repeated squaring.
    pub fn power(&mut self, g: &GridDensity<T>, count: usize) -> GridDensity<T> {
        let mut result: Option<GridDensity<T>> = None;
        let mut base = g.clone();
        let mut e = count;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => self.convolve(&r, &base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = self.convolve(&base, &base);
            }
        }
        result.expect("count >= 1")
    }
}

fn sum_density_at<T: Scalar>(groups: &[(&Component<T>, usize)], spacing: T, tail_tol: T) -> GridDensity<T> {
    let mut conv = Convolver::new(tail_tol);
    let mut acc: Option<GridDensity<T>> = None;
    for (c, count) in groups {
        let single = component_grid(c, spacing, tail_tol);
        let part = conv.power(&single, *count);
        acc = Some(match acc {
            None => part,
            Some(a) => conv.convolve(&a, &part),
        });
    }
    acc.expect("non-empty range")
}

/// Density of `S_{ℓ,n} = X_ℓ + ... + X_n` on a uniform grid.
pub fn grid_sum_density<T: Scalar>(
    family: &DistributionFamily<T>,
    range: (usize, usize),
    spec: &GridSpec<T>,
) -> Result<GridDensity<T>> {
    let view = family.range(range.0, range.1)?;
    let groups = view.groups();
    let h = spec.resolve_spacing(groups);
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("grid spacing {h} must be positive")));
    }
    let mut coarse = sum_density_at(groups, h, spec.tail_tol);
    if !spec.check_coarseness {
        return Ok(coarse);
    }
    // The point-sampled convolution is a trapezoid rule with an O(h²) error
    // expansion: the h/2 grid's error is about a third of the h-vs-h/2
    // difference, and the Richardson combination removes the leading term.
    let half = h / T::lit(2.0);
    let fine = sum_density_at(groups, half, spec.tail_tol);
    let fine_at = |x: T| {
        let j = ((x - fine.origin) / half).round();
        match j.to_usize() {
            Some(j) if j < fine.len() => fine.values[j],
            _ => T::zero(),
        }
    };
    let skip = usize::from(coarse.jump_at_origin);
    let mut err = T::zero();
    let mut extrapolated = coarse.values.clone();
    for (i, v) in coarse.values.iter().enumerate().skip(skip) {
        let f = fine_at(coarse.node(i));
        err = err.max((*v - f).abs() / T::lit(3.0));
        extrapolated[i] = ((T::lit(4.0) * f - *v) / T::lit(3.0)).max(T::zero());
    }
    if err > spec.coarseness_tol {
        return Err(Error::GridTooCoarse(err.to_f64_lossy()));
    }
    coarse.values = extrapolated;
    coarse.normalize();
    Ok(coarse)
}

/// Exact conditional density of the first `k` coordinates given
/// `S_{1,n} = na`, evaluated through gridded sum densities of the family
/// tilted at a fixed `θ`.
#[derive(Debug, Clone)]
pub struct ExactConditional<T> {
    pub n: usize,
    pub a: T,
    pub k: usize,
    /// Tilt at which the grids were built.
    pub theta: T,
    head: Vec<Component<T>>,
    /// Density of `S_{k+1,n}` under the tilted family.
    pub tail: GridDensity<T>,
    /// `log p_{S_{1,n}}(na)` under the tilted family.
    pub ln_denominator: T,
}

impl<T: Scalar> ExactConditional<T> {
    /// Builds the oracle at `θ = θ_n^a`.
    pub fn new(family: &DistributionFamily<T>, n: usize, a: T, k: usize, spec: &GridSpec<T>) -> Result<Self> {
        let theta = solve_mean_tilt(family, (1, n), a)?.theta;
        Self::with_tilt(family, n, a, k, theta, spec)
    }

    /// Builds the oracle from the family tilted at an arbitrary `θ`; the
    /// result does not depend on `θ` beyond grid error.
    pub fn with_tilt(family: &DistributionFamily<T>, n: usize, a: T, k: usize, theta: T, spec: &GridSpec<T>) -> Result<Self> {
        if n > family.len() {
            return Err(Error::IndexOutOfRange { index: n, len: family.len() });
        }
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= k <= n - 1, got n = {n}, k = {k}")));
        }
        let tilted = family.truncated(n)?.tilted(theta)?;
        let tail = grid_sum_density(&tilted, (k + 1, n), spec)?;
        let full = grid_sum_density(&tilted, (1, n), spec)?;
        let s = T::from_usize_lossy(n) * a;
        let den = full.value_at(s);
        if !(den > T::zero()) {
            return Err(Error::ZeroDenominator);
        }
        let head = tilted.components()[..k].to_vec();
        Ok(Self { n, a, k, theta, head, tail, ln_denominator: den.ln() })
    }

    pub fn log_density(&self, y: &[T]) -> Result<T> {
        if y.len() != self.k {
            return Err(Error::InvalidParameter(format!("expected {} coordinates, got {}", self.k, y.len())));
        }
        let mut total = -self.ln_denominator;
        let mut sum = T::zero();
        for (c, v) in self.head.iter().zip(y) {
            total = total + c.ln_density(*v);
            sum = sum + *v;
        }
        let rest = T::from_usize_lossy(self.n) * self.a - sum;
        Ok(total + self.tail.ln_value_at(rest))
    }

    pub fn density(&self, y: &[T]) -> Result<T> {
        let l = self.log_density(y)?;
        Ok(if l == T::neg_infinity() { T::zero() } else { l.exp() })
    }
}

/// Convenience wrapper around [`ExactConditional`] for a single point.
pub fn exact_conditional_density<T: Scalar>(
    family: &DistributionFamily<T>,
    n: usize,
    a: T,
    k: usize,
    y: &[T],
    spec: &GridSpec<T>,
) -> Result<T> {
    ExactConditional::new(family, n, a, k, spec)?.density(y)
}

/// Conditional law of the first `k` coordinates of independent Gaussians
/// given their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianConditional<T> {
    pub n: usize,
    pub a: T,
    /// Unconditional means `μ_j`, `j ≤ k`.
    pub prior_means: Vec<T>,
    /// `σ_j²`, `j ≤ k`.
    pub variances: Vec<T>,
    /// Conditional means `μ_j + σ_j² (na - Σμ) / Σσ²`.
    pub means: Vec<T>,
    pub tail_mean: T,
    /// `Σ_{j>k} σ_j²`.
    pub tail_variance: T,
    /// `Σ_{j≤n} σ_j²`.
    pub total_variance: T,
}

impl<T: Scalar> GaussianConditional<T> {
    pub fn new(family: &DistributionFamily<T>, n: usize, a: T, k: usize) -> Result<Self> {
        if n > family.len() {
            return Err(Error::IndexOutOfRange { index: n, len: family.len() });
        }
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= k <= n - 1, got n = {n}, k = {k}")));
        }
        let mut params = Vec::with_capacity(n);
        for c in &family.components()[..n] {
            match *c {
                Component::Gaussian { mean, sd } => params.push((mean, sd * sd)),
                _ => return Err(Error::NotGaussianFamily),
            }
        }
        let total_mean: T = params.iter().map(|p| p.0).sum();
        let total_variance: T = params.iter().map(|p| p.1).sum();
        let tail_mean: T = params[k..].iter().map(|p| p.0).sum();
        let tail_variance: T = params[k..].iter().map(|p| p.1).sum();
        let shift = (T::from_usize_lossy(n) * a - total_mean) / total_variance;
        let head = &params[..k];
        Ok(Self {
            n,
            a,
            prior_means: head.iter().map(|p| p.0).collect(),
            variances: head.iter().map(|p| p.1).collect(),
            means: head.iter().map(|p| p.0 + p.1 * shift).collect(),
            tail_mean,
            tail_variance,
            total_variance,
        })
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    /// Covariance `diag(σ²) - σ_i² σ_j² / Σσ²`.
    pub fn covariance(&self) -> Vec<Vec<T>> {
        let k = self.k();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let d = if i == j { self.variances[i] } else { T::zero() };
                        d - self.variances[i] * self.variances[j] / self.total_variance
                    })
                    .collect()
            })
            .collect()
    }

    /// Exact log-density. The covariance is a rank-one downdate of a
    /// diagonal matrix, so its inverse is `diag(1/σ²) + 11ᵀ / V_tail` and
    /// its determinant is `Πσ² · V_tail / V`.
    pub fn ln_density(&self, y: &[T]) -> Result<T> {
        if y.len() != self.k() {
            return Err(Error::InvalidParameter(format!("expected {} coordinates, got {}", self.k(), y.len())));
        }
        let half = T::lit(0.5);
        let mut quad = T::zero();
        let mut z_sum = T::zero();
        let mut ln_det = (self.tail_variance / self.total_variance).ln();
        for ((v, m), s2) in y.iter().zip(&self.means).zip(&self.variances) {
            let z = *v - *m;
            quad = quad + z * z / *s2;
            z_sum = z_sum + z;
            ln_det = ln_det + s2.ln();
        }
        quad = quad + z_sum * z_sum / self.tail_variance;
        let k = T::from_usize_lossy(self.k());
        Ok(-half * (k * T::TAU().ln() + ln_det + quad))
    }

    /// Exact draw: sample the unconditional head and tail sum, then shift
    /// each coordinate by its share `σ_j² / V` of the sum's miss.
    pub fn sample(&self, rng: &mut PathRng) -> Vec<T> {
        let mut x: Vec<T> = self
            .prior_means
            .iter()
            .zip(&self.variances)
            .map(|(m, s2)| *m + s2.sqrt() * T::sample_standard_normal(rng))
            .collect();
        let tail = self.tail_mean + self.tail_variance.sqrt() * T::sample_standard_normal(rng);
        let s: T = x.iter().copied().sum::<T>() + tail;
        let miss = (T::from_usize_lossy(self.n) * self.a - s) / self.total_variance;
        for (v, s2) in x.iter_mut().zip(&self.variances) {
            *v = *v + *s2 * miss;
        }
        x
    }
}

impl<T: Scalar> PathLaw<T> for GaussianConditional<T> {
    fn dim(&self) -> usize {
        self.k()
    }

    fn sample_path(&self, rng: &mut PathRng) -> Result<(Vec<T>, T)> {
        let y = self.sample(rng);
        let l = self.ln_density(&y)?;
        Ok((y, l))
    }

    fn log_density(&self, y: &[T]) -> Result<T> {
        self.ln_density(y)
    }
}

/// Closed-form conditional mean vector and covariance matrix for an
/// all-Gaussian family.
pub fn gaussian_conditional_params<T: Scalar>(
    family: &DistributionFamily<T>,
    n: usize,
    a: T,
    k: usize,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let g = GaussianConditional::new(family, n, a, k)?;
    Ok((g.means.clone(), g.covariance()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMethod {
    Grid,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvEstimate<T> {
    pub estimate: T,
    pub std_error: T,
    pub n_samples: usize,
    pub method: TvMethod,
}

/// `½ E_g |exp(log p - log g) - 1|` over `n_samples` draws from `approx`,
/// path `i` using stream `i` of `seed`.
pub fn tv_monte_carlo<T, P, F>(true_log_density: F, approx: &P, n_samples: usize, seed: u64) -> Result<TvEstimate<T>>
where
    T: Scalar,
    P: PathLaw<T> + ?Sized,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidParameter("TV estimation needs at least two samples".into()));
    }
    let terms = map_paths(n_samples, seed, |i, rng| -> Result<T> {
        let (y, lg) = approx.sample_path(rng)?;
        let lp = true_log_density(&y)?;
        let delta = lp - lg;
        if delta.is_nan() || delta == T::infinity() || !lg.is_finite() {
            return Err(Error::NonFiniteLogDensity(i));
        }
        Ok(T::lit(0.5) * (delta.exp() - T::one()).abs())
    })
    .into_iter()
    .collect::<Result<Vec<T>>>()?;
    let (mean, var) = mean_and_variance(&terms);
    Ok(TvEstimate {
        estimate: mean,
        std_error: (var / T::from_usize_lossy(n_samples)).sqrt(),
        n_samples,
        method: TvMethod::MonteCarlo,
    })
}

/// `½ ∫ |p - g|` by the trapezoid rule on a tensor grid with `points` nodes
/// per axis over the given box; `k ∈ {1, 2}`.
pub fn tv_grid<T, F, G>(true_log_density: F, approx_log_density: G, bounds: &[(T, T)], points: usize) -> Result<TvEstimate<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T>,
    G: Fn(&[T]) -> Result<T>,
{
    if bounds.is_empty() || bounds.len() > 2 || points < 2 {
        return Err(Error::InvalidParameter("grid TV needs 1 or 2 dimensions and at least 2 points".into()));
    }
    let axes: Vec<(T, T)> = bounds
        .iter()
        .map(|(lo, hi)| (*lo, (*hi - *lo) / T::from_usize_lossy(points - 1)))
        .collect();
    let weight = |i: usize| if i == 0 || i == points - 1 { T::lit(0.5) } else { T::one() };
    let diff = |y: &[T]| -> Result<T> {
        let exp = |l: T| if l == T::neg_infinity() { T::zero() } else { l.exp() };
        Ok((exp(true_log_density(y)?) - exp(approx_log_density(y)?)).abs())
    };
    let mut total = T::zero();
    let cell: T = axes.iter().map(|a| a.1).fold(T::one(), |acc, h| acc * h);
    if axes.len() == 1 {
        for i in 0..points {
            let x = axes[0].0 + axes[0].1 * T::from_usize_lossy(i);
            total = total + weight(i) * diff(&[x])?;
        }
    } else {
        for i in 0..points {
            let x = axes[0].0 + axes[0].1 * T::from_usize_lossy(i);
            for j in 0..points {
                let z = axes[1].0 + axes[1].1 * T::from_usize_lossy(j);
                total = total + weight(i) * weight(j) * diff(&[x, z])?;
            }
        }
    }
    let n_samples = points.pow(bounds.len() as u32);
    Ok(TvEstimate { estimate: T::lit(0.5) * total * cell, std_error: T::zero(), n_samples, method: TvMethod::Grid })
}

/// TV between the true law and `approx`: on a grid when a box is supplied
/// and `k ≤ 2`, by Monte Carlo otherwise.
pub fn tv_distance<T, P, F>(
    true_log_density: F,
    approx: &P,
    n_samples: usize,
    seed: u64,
    grid: Option<(&[(T, T)], usize)>,
) -> Result<TvEstimate<T>>
where
    T: Scalar,
    P: PathLaw<T> + ?Sized,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    match grid {
        Some((bounds, points)) if approx.dim() <= 2 => {
            tv_grid(&true_log_density, |y: &[T]| approx.log_density(y), bounds, points)
        }
        _ => tv_monte_carlo(true_log_density, approx, n_samples, seed),
    }
}

/// Sample mean and unbiased variance.
pub(crate) fn mean_and_variance<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let ss: T = xs.iter().map(|x| (*x - mean) * (*x - mean)).sum();
    let var = if xs.len() > 1 { ss / (n - T::one()) } else { T::zero() };
    (mean, var)
}
