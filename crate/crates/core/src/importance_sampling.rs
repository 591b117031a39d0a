//! Importance sampling for `Π_n = P(S_{1,n} ≥ na)`.
//!
//! The proposal `ḡ_n` draws the first `k` coordinates from `G_k` and the
//! remaining `n - k` independently from the components tilted at the `t*`
//! that matches the remaining budget `(na - Σ_{j≤k} y_j) / (n - k)`.

use serde::Serialize;

use crate::conditional_law::{GkSampler, PathLaw, Regime};
use crate::distributions::{Component, DistributionFamily};
use crate::error::{Error, Result};
use crate::oracle::mean_and_variance;
use crate::rng::{map_paths, PathRng};
use crate::scalar::Scalar;
use crate::tilting::{solve_mean_tilt, solve_on_range, TiltOptions};

/// Floor on the estimate in the relative standard error.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-300;

/// Independent components `1..=n` all tilted at one `θ`.
#[derive(Debug, Clone)]
pub struct TiltedProduct<T> {
    pub theta: T,
    components: Vec<Component<T>>,
}

impl<T: Scalar> TiltedProduct<T> {
    pub fn new(family: &DistributionFamily<T>, n: usize, theta: T) -> Result<Self> {
        family.check_theta(theta)?;
        let truncated = family.truncated(n)?;
        Ok(Self { theta, components: truncated.components().iter().map(|c| c.tilted(theta)).collect() })
    }

    /// The untilted law `p_1^n`.
    pub fn untilted(family: &DistributionFamily<T>, n: usize) -> Result<Self> {
        Self::new(family, n, T::zero())
    }
}

impl<T: Scalar> PathLaw<T> for TiltedProduct<T> {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn sample_path(&self, rng: &mut PathRng) -> Result<(Vec<T>, T)> {
        let y: Vec<T> = self.components.iter().map(|c| c.sample(rng)).collect();
        let l = self.components.iter().zip(&y).map(|(c, v)| c.ln_density(*v)).sum();
        Ok((y, l))
    }

    fn log_density(&self, y: &[T]) -> Result<T> {
        if y.len() != self.components.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.components.len(),
                y.len()
            )));
        }
        Ok(self.components.iter().zip(y).map(|(c, v)| c.ln_density(*v)).sum())
    }
}

/// The two-stage proposal `ḡ_n` on `R^n`.
#[derive(Debug, Clone)]
pub struct GBar<'a, T> {
    family: &'a DistributionFamily<T>,
    pub n: usize,
    pub a: T,
    pub k: usize,
    prefix: Option<GkSampler<'a, T>>,
    /// Used when `k = 0`: everything tilted at `θ_n^a`.
    flat: Option<TiltedProduct<T>>,
}

/// Builds `ḡ_n`; `k = 0` gives the product of components tilted at `θ_n^a`.
pub fn build_gbar<T: Scalar>(family: &DistributionFamily<T>, n: usize, a: T, k: usize, regime: Regime) -> Result<GBar<'_, T>> {
    if k == 0 {
        let theta = solve_mean_tilt(family, (1, n), a)?.theta;
        return Ok(GBar { family, n, a, k, prefix: None, flat: Some(TiltedProduct::new(family, n, theta)?) });
    }
    let prefix = GkSampler::new(family, n, a, k, regime)?;
    Ok(GBar { family, n, a, k, prefix: Some(prefix), flat: None })
}

impl<T: Scalar> GBar<'_, T> {
    /// Tail-stage tilt `t*` for a realized prefix sum. When the residual mean
    /// leaves the support (a small-k prefix can overshoot), the tail is tilted
    /// at `θ_n^a` instead.
    pub fn tail_tilt(&self, prefix_sum: T, warm_start: Option<T>) -> Result<T> {
        let view = self.family.range(self.k + 1, self.n)?;
        let target = (T::from_usize_lossy(self.n) * self.a - prefix_sum) / T::from_usize_lossy(self.n - self.k);
        if !self.family.support().contains(target) {
            let prefix = self.prefix.as_ref().expect("k >= 1");
            return Ok(prefix.theta_na.theta);
        }
        Ok(solve_on_range(self.family, &view, target, warm_start, &TiltOptions::default())?.theta)
    }

    fn tail_components(&self, t: T) -> Result<Vec<Component<T>>> {
        (self.k + 1..=self.n).map(|j| Ok(self.family.component(j)?.tilted(t))).collect()
    }
}

impl<T: Scalar> PathLaw<T> for GBar<'_, T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn sample_path(&self, rng: &mut PathRng) -> Result<(Vec<T>, T)> {
        if let Some(flat) = &self.flat {
            return flat.sample_path(rng);
        }
        let prefix = self.prefix.as_ref().expect("k >= 1");
        let path = prefix.sample(rng)?;
        let t = self.tail_tilt(path.y.iter().copied().sum(), Some(path.final_tilt()))?;
        let mut y = path.y;
        let mut log_density = path.log_density;
        for c in self.tail_components(t)? {
            let v = c.sample(rng);
            log_density = log_density + c.ln_density(v);
            y.push(v);
        }
        Ok((y, log_density))
    }

    fn log_density(&self, y: &[T]) -> Result<T> {
        if let Some(flat) = &self.flat {
            return flat.log_density(y);
        }
        if y.len() != self.n {
            return Err(Error::InvalidParameter(format!("expected {} coordinates, got {}", self.n, y.len())));
        }
        let prefix = self.prefix.as_ref().expect("k >= 1");
        let path = prefix.evaluate(&y[..self.k])?;
        let t = self.tail_tilt(path.y.iter().copied().sum(), Some(path.final_tilt()))?;
        let tail: T = self.tail_components(t)?.iter().zip(&y[self.k..]).map(|(c, v)| c.ln_density(*v)).sum();
        Ok(path.log_density + tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ISReport<T> {
    pub estimate: T,
    /// Unbiased sample variance of the weights `w_i`.
    pub variance_of_weights: T,
    pub std_error: T,
    /// `√(variance / N) / max(estimate, 1e-300)`.
    pub relative_std_error: T,
    pub n_samples: usize,
    pub hit_count: usize,
    pub max_weight: T,
}

impl<T: Scalar> ISReport<T> {
    fn from_weights(weights: &[T], hit_count: usize) -> Self {
        let (estimate, variance) = mean_and_variance(weights);
        let n = T::from_usize_lossy(weights.len());
        let std_error = (variance / n).sqrt();
        Self {
            estimate,
            variance_of_weights: variance,
            std_error,
            relative_std_error: std_error / estimate.max(T::lit(RELATIVE_ERROR_FLOOR)),
            n_samples: weights.len(),
            hit_count,
            max_weight: weights.iter().copied().fold(T::zero(), T::max),
        }
    }
}

fn event_threshold<T: Scalar>(n: usize, a: T) -> T {
    T::from_usize_lossy(n) * a
}

/// `Π̂_n(N) = N⁻¹ Σ (p_1^n / q)(Y_i) 1{Σ Y_i ≥ na}` with `Y_i ~ q`, path `i`
/// drawn from stream `i` of `seed`.
pub fn is_estimate<T, P>(family: &DistributionFamily<T>, n: usize, a: T, proposal: &P, n_samples: usize, seed: u64) -> Result<ISReport<T>>
where
    T: Scalar,
    P: PathLaw<T> + ?Sized,
{
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if proposal.dim() != n {
        return Err(Error::InvalidParameter(format!("proposal has dimension {}, expected {n}", proposal.dim())));
    }
    let target = TiltedProduct::untilted(family, n)?;
    let threshold = event_threshold(n, a);
    let draws = map_paths(n_samples, seed, |i, rng| -> Result<(T, bool)> {
        let (y, lq) = proposal.sample_path(rng)?;
        let hit = y.iter().copied().sum::<T>() >= threshold;
        if !hit {
            return Ok((T::zero(), false));
        }
        let lp = target.log_density(&y)?;
        let w = (lp - lq).exp();
        if !w.is_finite() {
            return Err(Error::NonFiniteLogDensity(i));
        }
        Ok((w, true))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let hits = draws.iter().filter(|d| d.1).count();
    let weights: Vec<T> = draws.into_iter().map(|d| d.0).collect();
    if weights.iter().all(|w| *w == T::zero()) {
        return Err(Error::DegenerateWeights);
    }
    Ok(ISReport::from_weights(&weights, hits))
}

/// Frequency of `{S_{1,n} ≥ na}` under direct sampling.
pub fn naive_mc_estimate<T: Scalar>(family: &DistributionFamily<T>, n: usize, a: T, n_samples: usize, seed: u64) -> Result<ISReport<T>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let truncated = family.truncated(n)?;
    let threshold = event_threshold(n, a);
    let weights = map_paths(n_samples, seed, |_, rng| {
        let s: T = truncated.components().iter().map(|c| c.sample(rng)).sum();
        if s >= threshold {
            T::one()
        } else {
            T::zero()
        }
    });
    let hits = weights.iter().filter(|w| **w > T::zero()).count();
    Ok(ISReport::from_weights(&weights, hits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_rng;

    fn std_gauss(n: usize) -> DistributionFamily<f64> {
        DistributionFamily::iid(Component::gaussian(0.0, 1.0).unwrap(), n).unwrap()
    }

    /// `1 - Φ(x)` by `erfc`, from the standard library-free series in statrs.
    fn upper_tail(x: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn k_zero_is_flat_tilt() {
        let f = std_gauss(10);
        let g = build_gbar(&f, 10, 1.0, 0, Regime::SmallK).unwrap();
        let y = vec![0.5; 10];
        let expect: f64 = y.iter().map(|v| Component::gaussian(1.0, 1.0).unwrap().ln_density(*v)).sum();
        assert!((g.log_density(&y).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn proposal_means_follow_the_tilt() {
        let f = std_gauss(40);
        let g = build_gbar(&f, 40, 1.0, 5, Regime::LargeK).unwrap();
        let draws = map_paths(20_000, 8, |_, rng| g.sample_path(rng).unwrap().0);
        for j in [0usize, 4, 5, 39] {
            let m = draws.iter().map(|d| d[j]).sum::<f64>() / draws.len() as f64;
            assert!((m - 1.0).abs() < 0.05, "coordinate {j}: {m}");
        }
    }

    #[test]
    fn proposal_density_is_reproducible() {
        let f = DistributionFamily::iid(Component::exponential(1.0).unwrap(), 30).unwrap();
        let g = build_gbar(&f, 30, 1.4, 6, Regime::LargeK).unwrap();
        let (y, l): (Vec<f64>, f64) = g.sample_path(&mut path_rng(4, 0)).unwrap();
        let (y2, l2) = g.sample_path(&mut path_rng(4, 0)).unwrap();
        assert_eq!((&y, l), (&y2, l2));
        assert!(l.is_finite());
        assert!((g.log_density(&y).unwrap() - l).abs() < 1e-10);
    }

    #[test]
    fn true_density_proposal_gives_frequency() {
        let f = std_gauss(4);
        let p = TiltedProduct::untilted(&f, 4).unwrap();
        let is = is_estimate(&f, 4, 0.5, &p, 5_000, 3).unwrap();
        assert!(is.max_weight <= 1.0 + 1e-12);
        assert_eq!(is.estimate, is.hit_count as f64 / 5_000.0);
    }

    #[test]
    fn unbiased_against_naive() {
        let f = std_gauss(4);
        let p = TiltedProduct::untilted(&f, 4).unwrap();
        let reps: Vec<f64> = (0..100).map(|r| is_estimate(&f, 4, 0.5, &p, 2_000, 100 + r).unwrap().estimate).collect();
        let (m, v) = mean_and_variance(&reps);
        let naive = naive_mc_estimate(&f, 4, 0.5, 200_000, 1).unwrap();
        let se = (v / 100.0 + naive.std_error * naive.std_error).sqrt();
        assert!((m - naive.estimate).abs() < 3.0 * se);
        assert!((m - upper_tail(1.0)).abs() < 3.0 * (v / 100.0).sqrt() + 1e-12);
    }

    #[test]
    fn single_gaussian_tilted() {
        let f = std_gauss(1);
        let q = TiltedProduct::new(&f, 1, 2.0).unwrap();
        let is = is_estimate(&f, 1, 2.0, &q, 10_000, 5).unwrap();
        let naive = naive_mc_estimate(&f, 1, 2.0, 10_000, 5).unwrap();
        let truth = upper_tail(2.0);
        assert!((is.estimate - truth).abs() < 3.0 * is.std_error);
        // Second moment of the tilted weight: e^{θ²} (1 - Φ(θ + a)) at θ = a = 2.
        let exact_var = 4f64.exp() * upper_tail(4.0) - truth * truth;
        assert!((is.variance_of_weights / exact_var - 1.0).abs() < 0.1);
        // Exact relative error ratio is √(Π(1 - Π) / exact_var) ≈ 4.28.
        let ratio = naive.relative_std_error / is.relative_std_error;
        assert!((ratio - (truth * (1.0 - truth) / exact_var).sqrt()).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn naive_binomial_variance() {
        let f = std_gauss(3);
        let r = naive_mc_estimate(&f, 3, -10.0, 1000, 1).unwrap();
        assert_eq!(r.estimate, 1.0);
        let r = naive_mc_estimate(&f, 3, 0.2, 100_000, 2).unwrap();
        let p = upper_tail(0.2 * 3f64.sqrt());
        let n = 100_000.0;
        assert!((r.variance_of_weights - p * (1.0 - p) * n / (n - 1.0)).abs() < 0.01);
    }

    #[test]
    fn degenerate_weights() {
        let f = std_gauss(2);
        let q = TiltedProduct::new(&f, 2, -3.0).unwrap();
        assert!(matches!(is_estimate(&f, 2, 5.0, &q, 100, 1), Err(Error::DegenerateWeights)));
    }

    #[test]
    fn overshooting_prefix_uses_fallback_tail() {
        let n = 10;
        let f = DistributionFamily::iid(Component::exponential(1.0).unwrap(), n).unwrap();
        let q = build_gbar(&f, n, 1.5, 3, Regime::SmallK).unwrap();
        // A prefix already past na leaves no admissible tail mean.
        let theta_na: f64 = 1.0 - 1.0 / 1.5;
        assert!((q.tail_tilt(16.0, None).unwrap() - theta_na).abs() < 1e-9);
        let r = is_estimate(&f, n, 1.5, &q, 40_000, 9).unwrap();
        // P(Gamma(10, 1) >= 15) = Q(10, 15).
        let exact = statrs::function::gamma::gamma_ur(10.0, 15.0);
        assert!((r.estimate - exact).abs() < 4.0 * r.std_error, "{} vs {exact} ± {}", r.estimate, r.std_error);
    }
}
