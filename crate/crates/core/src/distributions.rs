//! Independent, non-identically distributed sequences with closed-form
//! cumulant functions, plus machine checks of the standing regularity
//! assumptions (support, mgf domain, monotone means, bounded variances and
//! sixth moments, integrable density derivatives, mean envelopes).

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, uniform_breaks, QuadOptions};
use crate::scalar::Scalar;

/// Highest cumulant derivative available in closed form.
pub const MAX_CUMULANT_ORDER: usize = 6;

const FACTORIAL: [f64; 7] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn real_line() -> Self {
        Self { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Shrinks finite ends inward by `margin · max(1, |end|)`.
    pub fn shrink(&self, margin: T) -> Self {
        let pull = |end: T| margin * end.abs().max(T::one());
        let lo = if self.lo.is_finite() { self.lo + pull(self.lo) } else { self.lo };
        let hi = if self.hi.is_finite() { self.hi - pull(self.hi) } else { self.hi };
        Self { lo, hi }
    }

    fn bounds_f64(&self) -> (f64, f64) {
        (self.lo.to_f64_lossy(), self.hi.to_f64_lossy())
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// One member of the sequence. Each kind carries its closed-form cumulant
/// function `κ(θ) = log E[exp(θX)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Component<T> {
    Gaussian { mean: T, sd: T },
    Gamma { shape: T, rate: T },
    Exponential { rate: T },
    ShiftedExponential { rate: T, shift: T },
}

impl<T: Scalar> Component<T> {
    pub fn gaussian(mean: T, sd: T) -> Result<Self> {
        let c = Component::Gaussian { mean, sd };
        c.validate()?;
        Ok(c)
    }

    pub fn gamma(shape: T, rate: T) -> Result<Self> {
        let c = Component::Gamma { shape, rate };
        c.validate()?;
        Ok(c)
    }

    pub fn exponential(rate: T) -> Result<Self> {
        let c = Component::Exponential { rate };
        c.validate()?;
        Ok(c)
    }

    pub fn shifted_exponential(rate: T, shift: T) -> Result<Self> {
        let c = Component::ShiftedExponential { rate, shift };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        let legal = match *self {
            Component::Gaussian { mean, sd } => mean.is_finite() && ok(sd),
            Component::Gamma { shape, rate } => ok(shape) && ok(rate),
            Component::Exponential { rate } => ok(rate),
            Component::ShiftedExponential { rate, shift } => ok(rate) && shift.is_finite(),
        };
        if legal {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("illegal component parameters: {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Component::Gaussian { .. } => "gaussian",
            Component::Gamma { .. } => "gamma",
            Component::Exponential { .. } => "exponential",
            Component::ShiftedExponential { .. } => "shifted_exponential",
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Component::Gaussian { .. })
    }

    /// Set of θ where the mgf is finite.
    pub fn theta_domain(&self) -> Interval<T> {
        match *self {
            Component::Gaussian { .. } => Interval::real_line(),
            Component::Gamma { rate, .. }
            | Component::Exponential { rate }
            | Component::ShiftedExponential { rate, .. } => Interval::new(T::neg_infinity(), rate),
        }
    }

    /// Open support of the density.
    pub fn support(&self) -> Interval<T> {
        match *self {
            Component::Gaussian { .. } => Interval::real_line(),
            Component::Gamma { .. } | Component::Exponential { .. } => Interval::new(T::zero(), T::infinity()),
            Component::ShiftedExponential { shift, .. } => Interval::new(shift, T::infinity()),
        }
    }

    /// `κ(θ)`; θ must lie in [`Self::theta_domain`].
    pub fn kappa(&self, theta: T) -> T {
        match *self {
            Component::Gaussian { mean, sd } => mean * theta + sd * sd * theta * theta / T::lit(2.0),
            Component::Gamma { shape, rate } => -shape * (-theta / rate).ln_1p(),
            Component::Exponential { rate } => -(-theta / rate).ln_1p(),
            Component::ShiftedExponential { rate, shift } => shift * theta - (-theta / rate).ln_1p(),
        }
    }

    /// `d^order κ / dθ^order` for `1 <= order <= 6`.
    pub fn kappa_derivative(&self, order: usize, theta: T) -> T {
        debug_assert!((1..=MAX_CUMULANT_ORDER).contains(&order));
        let gamma_like = |shape: T, rate: T| {
            shape * T::lit(FACTORIAL[order - 1]) / (rate - theta).powi(order as i32)
        };
        match *self {
            Component::Gaussian { mean, sd } => match order {
                1 => mean + sd * sd * theta,
                2 => sd * sd,
                _ => T::zero(),
            },
            Component::Gamma { shape, rate } => gamma_like(shape, rate),
            Component::Exponential { rate } => gamma_like(T::one(), rate),
            Component::ShiftedExponential { rate, shift } => {
                let d = gamma_like(T::one(), rate);
                if order == 1 {
                    d + shift
                } else {
                    d
                }
            }
        }
    }

    /// Tilted mean `m(θ) = κ'(θ)`.
    pub fn mean_at(&self, theta: T) -> T {
        self.kappa_derivative(1, theta)
    }

    /// Tilted variance `s²(θ) = κ''(θ)`.
    pub fn variance_at(&self, theta: T) -> T {
        self.kappa_derivative(2, theta)
    }

    /// Centered moment of order 2..=6 of the θ-tilted law, assembled from
    /// cumulants.
    pub fn centered_moment_at(&self, order: usize, theta: T) -> T {
        let k = |l: usize| self.kappa_derivative(l, theta);
        match order {
            2 => k(2),
            3 => k(3),
            4 => k(4) + T::lit(3.0) * k(2) * k(2),
            5 => k(5) + T::lit(10.0) * k(3) * k(2),
            6 => {
                let (k2, k3, k4) = (k(2), k(3), k(4));
                k(6) + T::lit(15.0) * k4 * k2 + T::lit(10.0) * k3 * k3 + T::lit(15.0) * k2 * k2 * k2
            }
            _ => T::nan(),
        }
    }

    pub fn ln_density(&self, x: T) -> T {
        if !self.support().contains(x) {
            return T::neg_infinity();
        }
        match *self {
            Component::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                -z * z / T::lit(2.0) - sd.ln() - T::lit(0.5) * T::TAU().ln()
            }
            Component::Gamma { shape, rate } => {
                shape * rate.ln() + (shape - T::one()) * x.ln() - rate * x - shape.ln_gamma()
            }
            Component::Exponential { rate } => rate.ln() - rate * x,
            Component::ShiftedExponential { rate, shift } => rate.ln() - rate * (x - shift),
        }
    }

    pub fn density(&self, x: T) -> T {
        let l = self.ln_density(x);
        if l == T::neg_infinity() {
            T::zero()
        } else {
            l.exp()
        }
    }

    /// `dp/dx` on the open support (zero outside).
    pub fn density_derivative(&self, x: T) -> T {
        let p = self.density(x);
        if p == T::zero() {
            return T::zero();
        }
        match *self {
            Component::Gaussian { mean, sd } => -(x - mean) / (sd * sd) * p,
            Component::Gamma { shape, rate } => ((shape - T::one()) / x - rate) * p,
            Component::Exponential { rate } | Component::ShiftedExponential { rate, .. } => -rate * p,
        }
    }

    /// The θ-tilted law `exp(θx) p(x) / Φ(θ)`, which stays inside the same
    /// closed-form kind.
    pub fn tilted(&self, theta: T) -> Self {
        match *self {
            Component::Gaussian { mean, sd } => Component::Gaussian { mean: mean + sd * sd * theta, sd },
            Component::Gamma { shape, rate } => Component::Gamma { shape, rate: rate - theta },
            Component::Exponential { rate } => Component::Exponential { rate: rate - theta },
            Component::ShiftedExponential { rate, shift } => {
                Component::ShiftedExponential { rate: rate - theta, shift }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            Component::Gaussian { mean, sd } => mean + sd * T::sample_standard_normal(rng),
            Component::Gamma { shape, rate } => T::sample_unit_gamma(rng, shape) / rate,
            Component::Exponential { rate } => T::sample_standard_exp(rng) / rate,
            Component::ShiftedExponential { rate, shift } => shift + T::sample_standard_exp(rng) / rate,
        }
    }

    /// Points of the support where the density is discontinuous.
    pub fn jump_points(&self) -> Option<T> {
        match *self {
            Component::Gaussian { .. } => None,
            Component::Gamma { shape, .. } if shape > T::one() => None,
            _ => Some(self.support().lo),
        }
    }

    fn key(&self) -> (u8, u64, u64) {
        let b = |v: T| v.to_f64_lossy().to_bits();
        match *self {
            Component::Gaussian { mean, sd } => (0, b(mean), b(sd)),
            Component::Gamma { shape, rate } => (1, b(shape), b(rate)),
            Component::Exponential { rate } => (2, b(rate), 0),
            Component::ShiftedExponential { rate, shift } => (3, b(rate), b(shift)),
        }
    }
}

/// Indices sharing one exact component law.
#[derive(Debug, Clone)]
struct Group<T> {
    component: Component<T>,
    /// Sorted, 1-based.
    indices: Vec<usize>,
}

/// The finite sequence `X_1, ..., X_n` with a shared tilt domain and support.
#[derive(Debug, Clone)]
pub struct DistributionFamily<T> {
    components: Vec<Component<T>>,
    theta_domain: Interval<T>,
    support: Interval<T>,
    groups: Vec<Group<T>>,
}

impl<T: Scalar> DistributionFamily<T> {
    /// Builds a family with explicitly declared Θ and support. Mismatches
    /// between the declaration and the components are reported by
    /// [`Self::validate`], not rejected here.
    pub fn new(components: Vec<Component<T>>, theta_domain: Interval<T>, support: Interval<T>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("family has no components".into()));
        }
        for c in &components {
            c.validate()?;
        }
        if !(theta_domain.lo < theta_domain.hi) || !(theta_domain.lo < T::zero() && T::zero() < theta_domain.hi) {
            return Err(Error::InvalidParameter(format!("theta domain {theta_domain} must contain 0")));
        }
        if !(support.lo < support.hi) {
            return Err(Error::InvalidParameter(format!("empty support {support}")));
        }
        let mut lookup: HashMap<(u8, u64, u64), usize> = HashMap::new();
        let mut groups: Vec<Group<T>> = Vec::new();
        for (i, c) in components.iter().enumerate() {
            let g = *lookup.entry(c.key()).or_insert_with(|| {
                groups.push(Group { component: *c, indices: Vec::new() });
                groups.len() - 1
            });
            groups[g].indices.push(i + 1);
        }
        Ok(Self { components, theta_domain, support, groups })
    }

    /// Derives Θ as the intersection of the component domains and the support
    /// as the hull of the component supports.
    pub fn from_components(components: Vec<Component<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("family has no components".into()))?;
        let (theta, support) = components.iter().fold(
            (first.theta_domain(), first.support()),
            |(t, s), c| (t.intersect(&c.theta_domain()), s.hull(&c.support())),
        );
        Self::new(components, theta, support)
    }

    /// `n` copies of one component.
    pub fn iid(component: Component<T>, n: usize) -> Result<Self> {
        Self::from_components(vec![component; n])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    pub fn theta_domain(&self) -> Interval<T> {
        self.theta_domain
    }

    pub fn support(&self) -> Interval<T> {
        self.support
    }

    pub fn is_all_gaussian(&self) -> bool {
        self.groups.iter().all(|g| g.component.is_gaussian())
    }

    /// First `n` components as a family of their own.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange { index: n, len: self.len() });
        }
        Self::new(self.components[..n].to_vec(), self.theta_domain, self.support)
    }

    /// 1-based component access.
    pub fn component(&self, j: usize) -> Result<&Component<T>> {
        if j == 0 || j > self.len() {
            return Err(Error::IndexOutOfRange { index: j, len: self.len() });
        }
        Ok(&self.components[j - 1])
    }

    pub fn check_theta(&self, theta: T) -> Result<()> {
        if self.theta_domain.contains(theta) {
            Ok(())
        } else {
            let (lo, hi) = self.theta_domain.bounds_f64();
            Err(Error::ThetaOutOfDomain { theta: theta.to_f64_lossy(), lo, hi })
        }
    }

    pub fn kappa(&self, j: usize, theta: T) -> Result<T> {
        let c = self.component(j)?;
        self.check_theta(theta)?;
        Ok(c.kappa(theta))
    }

    /// `(m_j(θ), s_j²(θ), κ_j'''(θ), ...)` up to `max_order`.
    pub fn cumulant_derivatives(&self, j: usize, theta: T, max_order: usize) -> Result<Vec<T>> {
        if max_order == 0 || max_order > MAX_CUMULANT_ORDER {
            return Err(Error::UnsupportedOrder(max_order));
        }
        let c = self.component(j)?;
        self.check_theta(theta)?;
        Ok((1..=max_order).map(|l| c.kappa_derivative(l, theta)).collect())
    }

    pub fn density(&self, j: usize, x: T) -> Result<T> {
        let c = self.component(j)?;
        Ok(if self.support.contains(x) { c.density(x) } else { T::zero() })
    }

    /// The family with every component replaced by its θ-tilted law.
    pub fn tilted(&self, theta: T) -> Result<Self> {
        self.check_theta(theta)?;
        let comps = self.components.iter().map(|c| c.tilted(theta)).collect();
        let domain = Interval::new(self.theta_domain.lo - theta, self.theta_domain.hi - theta);
        Self::new(comps, domain, self.support)
    }

    /// Distinct component laws over the 1-based inclusive range `p..=q`,
    /// each with its multiplicity.
    pub fn range(&self, p: usize, q: usize) -> Result<RangeView<'_, T>> {
        if p == 0 || p > q {
            return Err(Error::EmptyRange { p, q });
        }
        if q > self.len() {
            return Err(Error::IndexOutOfRange { index: q, len: self.len() });
        }
        let groups = self
            .groups
            .iter()
            .filter_map(|g| {
                let start = g.indices.partition_point(|&i| i < p);
                let end = g.indices.partition_point(|&i| i <= q);
                (end > start).then_some((&g.component, end - start))
            })
            .collect();
        Ok(RangeView { p, q, groups })
    }

    /// Runs every assumption check over a θ-grid spanning the closed compact
    /// `[k_lo, k_hi]`.
    pub fn validate(&self, k_lo: T, k_hi: T, grid_size: usize, config: &ValidationConfig<T>) -> Result<AssumptionReport<T>> {
        if grid_size < 3 {
            return Err(Error::InvalidParameter("grid_size must be at least 3".into()));
        }
        if !(k_lo <= k_hi) || !self.theta_domain.contains(k_lo) || !self.theta_domain.contains(k_hi) {
            return Err(Error::CompactOutsideTheta { lo: k_lo.to_f64_lossy(), hi: k_hi.to_f64_lossy() });
        }
        validation::run(self, k_lo, k_hi, grid_size, config)
    }
}

/// Distinct component laws of an index range with multiplicities; all range
/// sums are computed per distinct law, so iid stretches cost O(1).
#[derive(Debug, Clone)]
pub struct RangeView<'a, T> {
    pub p: usize,
    pub q: usize,
    groups: Vec<(&'a Component<T>, usize)>,
}

impl<'a, T: Scalar> RangeView<'a, T> {
    pub fn len(&self) -> usize {
        self.q - self.p + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn groups(&self) -> &[(&'a Component<T>, usize)] {
        &self.groups
    }

    /// `Σ_{j=p}^{q} f(component_j)`.
    pub fn sum_by<F: Fn(&Component<T>) -> T>(&self, f: F) -> T {
        self.groups
            .iter()
            .map(|(c, count)| T::from_usize_lossy(*count) * f(c))
            .sum()
    }

    /// `m̄_{p,q}(θ)`: the average tilted mean over the range.
    pub fn mean_of_means(&self, theta: T) -> T {
        self.sum_by(|c| c.mean_at(theta)) / T::from_usize_lossy(self.len())
    }

    /// Average tilted variance over the range (derivative of `m̄`).
    pub fn mean_of_variances(&self, theta: T) -> T {
        self.sum_by(|c| c.variance_at(theta)) / T::from_usize_lossy(self.len())
    }
}

/// Tunables for [`DistributionFamily::validate`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ValidationConfig<T> {
    /// Minimum acceptable `inf_j inf_K s_j²`.
    pub variance_floor: T,
    /// Values above this are treated as unbounded.
    pub finite_cap: T,
}

impl<T: Scalar> Default for ValidationConfig<T> {
    fn default() -> Self {
        Self { variance_floor: T::lit(1e-6), finite_cap: T::lit(1e12) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Assumption {
    Supp,
    Mgf,
    Hkappa,
    Cv,
    Am6,
    Cf,
    Uf,
}

impl Assumption {
    pub const ALL: [Assumption; 7] = [
        Assumption::Supp,
        Assumption::Mgf,
        Assumption::Hkappa,
        Assumption::Cv,
        Assumption::Am6,
        Assumption::Cf,
        Assumption::Uf,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport<T> {
    pub checks: Vec<AssumptionCheck>,
    pub theta_grid: Vec<T>,
    pub inf_variance: T,
    pub sup_variance: T,
    pub sup_abs_sixth_moment: T,
    /// `sup_j sup_K ∫ |d/dx p̃_j^θ(x)| dx`; infinite when not integrable.
    pub sup_derivative_l1: T,
    /// `min_j m_j(θ)` and `max_j m_j(θ)` along the grid.
    pub envelope_min: Vec<T>,
    pub envelope_max: Vec<T>,
}

impl<T> AssumptionReport<T> {
    pub fn passed(&self, a: Assumption) -> bool {
        self.checks.iter().any(|c| c.assumption == a && c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

mod validation {
    use super::*;

    fn same_interval<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> bool {
        a.lo == b.lo && a.hi == b.hi
    }

    fn strictly_increasing<T: Scalar>(v: &[T]) -> bool {
        v.windows(2).all(|w| w[0] < w[1])
    }

    /// `∫ |d/dx p(x)| dx` over the support, truncated far in the tails.
    fn derivative_l1<T: Scalar>(c: &Component<T>) -> T {
        let mean = c.mean_at(T::zero());
        let sd = c.variance_at(T::zero()).sqrt();
        let support = c.support();
        let width = T::lit(40.0) * sd;
        let lo = (mean - width).max(support.lo);
        let hi = (mean + width).min(support.hi);
        let mut breaks = uniform_breaks(lo, hi, 16);
        if let Component::Gaussian { mean, .. } = c {
            if lo < *mean && *mean < hi {
                breaks.push(*mean);
                breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            }
        }
        let opts = QuadOptions::default().with_rel_tol(T::lit(1e-8));
        match integrate_with_breaks(&mut |x| c.density_derivative(x).abs(), &breaks, opts) {
            Ok(r) => r.value,
            Err(_) => T::infinity(),
        }
    }

    pub(super) fn run<T: Scalar>(
        fam: &DistributionFamily<T>,
        k_lo: T,
        k_hi: T,
        grid_size: usize,
        cfg: &ValidationConfig<T>,
    ) -> Result<AssumptionReport<T>> {
        let grid = uniform_breaks(k_lo, k_hi, grid_size - 1);
        let distinct: Vec<&Component<T>> = fam.groups.iter().map(|g| &g.component).collect();
        let mut checks = Vec::new();

        // (Supp)
        let mut supp_fail = Vec::new();
        for c in &distinct {
            let s = c.support();
            if !same_interval(&s, &fam.support) {
                supp_fail.push(format!("{} support {} differs from declared {}", c.name(), s, fam.support));
                continue;
            }
            let mean = c.mean_at(T::zero());
            let sd = c.variance_at(T::zero()).sqrt();
            let inside = [mean - sd, mean, mean + sd]
                .into_iter()
                .filter(|x| s.contains(*x))
                .all(|x| c.density(x) > T::zero());
            let outside = [s.lo - T::one(), s.hi + T::one()]
                .into_iter()
                .filter(|x| x.is_finite())
                .all(|x| c.density(x) == T::zero());
            if !(inside && outside) {
                supp_fail.push(format!("{} density not positive exactly on its support", c.name()));
            }
        }
        checks.push(AssumptionCheck {
            assumption: Assumption::Supp,
            passed: supp_fail.is_empty(),
            detail: if supp_fail.is_empty() { format!("support {}", fam.support) } else { supp_fail.join("; ") },
        });

        // (Mgf)
        let mut mgf_fail = Vec::new();
        let near_edges = {
            let d = fam.theta_domain.shrink(T::lit(1e-6));
            let mut pts = grid.clone();
            for e in [d.lo, d.hi] {
                pts.push(if e.is_finite() { e } else { e.signum() * T::lit(50.0) });
            }
            pts
        };
        for c in &distinct {
            let dom = c.theta_domain();
            if !same_interval(&dom, &fam.theta_domain) {
                mgf_fail.push(format!("{} mgf domain {} differs from declared {}", c.name(), dom, fam.theta_domain));
                continue;
            }
            if near_edges.iter().any(|&t| !c.kappa(t).is_finite()) {
                mgf_fail.push(format!("{} cumulant function not finite inside Θ", c.name()));
            }
        }
        checks.push(AssumptionCheck {
            assumption: Assumption::Mgf,
            passed: mgf_fail.is_empty(),
            detail: if mgf_fail.is_empty() { format!("Θ = {}", fam.theta_domain) } else { mgf_fail.join("; ") },
        });

        // (Hκ)
        let hk_fail: Vec<String> = distinct
            .iter()
            .filter(|c| !strictly_increasing(&grid.iter().map(|&t| c.mean_at(t)).collect::<Vec<_>>()))
            .map(|c| format!("{} mean not strictly increasing", c.name()))
            .collect();
        checks.push(AssumptionCheck {
            assumption: Assumption::Hkappa,
            passed: hk_fail.is_empty(),
            detail: if hk_fail.is_empty() { "m_j strictly increasing on grid".into() } else { hk_fail.join("; ") },
        });

        // (Cv) and (AM6)
        let mut inf_var = T::infinity();
        let mut sup_var = T::zero();
        let mut sup_m6 = T::zero();
        for c in &distinct {
            for &t in &grid {
                let v = c.variance_at(t);
                inf_var = inf_var.min(v);
                sup_var = sup_var.max(v);
                sup_m6 = sup_m6.max(c.centered_moment_at(6, t).abs());
            }
        }
        let cv_ok = inf_var >= cfg.variance_floor && sup_var.is_finite() && sup_var <= cfg.finite_cap;
        checks.push(AssumptionCheck {
            assumption: Assumption::Cv,
            passed: cv_ok,
            detail: format!(
                "inf s² = {inf_var}, sup s² = {sup_var} (floor {})",
                cfg.variance_floor
            ),
        });
        let am6_ok = sup_m6.is_finite() && sup_m6 <= cfg.finite_cap;
        checks.push(AssumptionCheck {
            assumption: Assumption::Am6,
            passed: am6_ok,
            detail: format!("sup |μ|⁶ = {sup_m6}"),
        });

        // (Cf)
        let mut sup_l1 = T::zero();
        for c in &distinct {
            for &t in &grid {
                sup_l1 = sup_l1.max(derivative_l1(&c.tilted(t)));
            }
        }
        let cf_ok = sup_l1.is_finite() && sup_l1 <= cfg.finite_cap;
        checks.push(AssumptionCheck {
            assumption: Assumption::Cf,
            passed: cf_ok,
            detail: format!("sup ∫|dp̃/dx| = {sup_l1}"),
        });

        // (Uf): empirical envelopes stand in for f₊ and f₋.
        let envelope_min: Vec<T> = grid
            .iter()
            .map(|&t| distinct.iter().map(|c| c.mean_at(t)).fold(T::infinity(), T::min))
            .collect();
        let envelope_max: Vec<T> = grid
            .iter()
            .map(|&t| distinct.iter().map(|c| c.mean_at(t)).fold(T::neg_infinity(), T::max))
            .collect();
        let uf_ok = strictly_increasing(&envelope_min) && strictly_increasing(&envelope_max);
        checks.push(AssumptionCheck {
            assumption: Assumption::Uf,
            passed: uf_ok,
            detail: "empirical envelopes min_j m_j, max_j m_j over the grid".into(),
        });

        Ok(AssumptionReport {
            checks,
            theta_grid: grid,
            inf_variance: inf_var,
            sup_variance: sup_var,
            sup_abs_sixth_moment: sup_m6,
            sup_derivative_l1: sup_l1,
            envelope_min,
            envelope_max,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn gauss(m: f64, s: f64) -> Component<f64> {
        Component::gaussian(m, s).unwrap()
    }

    fn fam(c: Vec<Component<f64>>) -> DistributionFamily<f64> {
        DistributionFamily::from_components(c).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let f = fam(vec![gauss(0.0, 1.0), gauss(2.0, 3.0)]);
        assert_eq!(f.kappa(1, 0.0).unwrap(), 0.0);
        assert!((f.kappa(2, 0.5).unwrap() - 2.125).abs() < 1e-15);
        let e = fam(vec![Component::exponential(1.0).unwrap()]);
        assert!((e.kappa(1, 0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kappa_errors() {
        let e = fam(vec![Component::exponential(1.0).unwrap()]);
        assert!(matches!(e.kappa(1, 1.0), Err(Error::ThetaOutOfDomain { .. })));
        assert!(matches!(e.kappa(2, 0.0), Err(Error::IndexOutOfRange { index: 2, len: 1 })));
        assert!(matches!(e.kappa(0, 0.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn cumulant_derivative_examples() {
        let g = fam(vec![gauss(0.0, 1.0)]);
        assert_eq!(g.cumulant_derivatives(1, 0.7, 6).unwrap(), vec![0.7, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let e = fam(vec![Component::exponential(1.0).unwrap()]);
        assert_eq!(e.cumulant_derivatives(1, 0.0, 3).unwrap(), vec![1.0, 1.0, 2.0]);
        assert!(matches!(e.cumulant_derivatives(1, 0.0, 7), Err(Error::UnsupportedOrder(7))));
        assert!(matches!(e.cumulant_derivatives(1, 0.0, 0), Err(Error::UnsupportedOrder(0))));
    }

    #[test]
    fn density_examples() {
        let f = fam(vec![gauss(0.0, 1.0)]);
        assert!((f.density(1, 0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let e = fam(vec![Component::exponential(1.0).unwrap()]);
        assert_eq!(e.density(1, -1.0).unwrap(), 0.0);
        let g = fam(vec![Component::gamma(2.0, 1.0).unwrap()]);
        assert!((g.density(1, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn illegal_parameters_rejected() {
        assert!(Component::gaussian(0.0, 0.0).is_err());
        assert!(Component::gamma(-1.0, 1.0).is_err());
        assert!(Component::<f64>::exponential(0.0).is_err());
        assert!(Component::shifted_exponential(1.0, f64::NAN).is_err());
        assert!(DistributionFamily::<f64>::from_components(vec![]).is_err());
    }

    fn all_kinds() -> Vec<Component<f64>> {
        vec![
            gauss(0.3, 1.7),
            Component::gamma(2.5, 1.5).unwrap(),
            Component::exponential(2.0).unwrap(),
            Component::shifted_exponential(0.8, -0.4).unwrap(),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for c in all_kinds() {
            let hi = c.theta_domain().hi.min(2.0);
            for t in [-1.0, -0.3, 0.0, 0.4 * hi] {
                let fd1 = (c.kappa(t + h) - c.kappa(t - h)) / (2.0 * h);
                let fd2 = (c.kappa(t + h) - 2.0 * c.kappa(t) + c.kappa(t - h)) / (h * h);
                let m = c.mean_at(t);
                let s2 = c.variance_at(t);
                assert!((fd1 - m).abs() <= 1e-5 * m.abs().max(1.0), "{c:?} θ={t}");
                assert!((fd2 - s2).abs() <= 1e-5 * s2.abs().max(1.0), "{c:?} θ={t}");
                for l in 3..=6 {
                    let fd = (c.kappa_derivative(l - 1, t + h) - c.kappa_derivative(l - 1, t - h)) / (2.0 * h);
                    let exact = c.kappa_derivative(l, t);
                    assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{c:?} order {l}");
                }
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for c in all_kinds() {
            let s = c.support();
            let m = c.mean_at(0.0);
            let sd = c.variance_at(0.0).sqrt();
            let lo = (m - 40.0 * sd).max(s.lo);
            let hi = m + 40.0 * sd;
            let r = integrate(|x| c.density(x), lo, hi, QuadOptions::default()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "{c:?}: {}", r.value);
        }
    }

    #[test]
    fn centered_moments_of_exponential() {
        let e = Component::exponential(1.0_f64).unwrap();
        assert_eq!(e.centered_moment_at(4, 0.0), 9.0);
        assert_eq!(e.centered_moment_at(5, 0.0), 44.0);
        assert_eq!(e.centered_moment_at(6, 0.0), 265.0);
        let g = gauss(1.0, 2.0);
        assert_eq!(g.centered_moment_at(6, 0.3), 15.0 * 64.0);
    }

    #[test]
    fn tilted_family_shifts_domain() {
        let f = fam(vec![Component::exponential(1.0).unwrap(); 3]);
        let t = f.tilted(0.5).unwrap();
        assert_eq!(t.theta_domain().hi, 0.5);
        assert_eq!(t.component(2).unwrap(), &Component::Exponential { rate: 0.5 });
    }

    #[test]
    fn range_view_groups() {
        let f = fam(vec![gauss(0.0, 1.0), gauss(1.0, 1.0), gauss(0.0, 1.0), gauss(0.0, 1.0)]);
        let r = f.range(2, 4).unwrap();
        assert_eq!(r.groups().len(), 2);
        assert!((r.mean_of_means(0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(f.range(3, 2), Err(Error::EmptyRange { .. })));
        assert!(matches!(f.range(1, 5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn validate_homogeneous_gaussian() {
        let f = DistributionFamily::iid(gauss(0.0, 1.0), 10).unwrap();
        let r = f.validate(-1.0, 1.0, 11, &ValidationConfig::default()).unwrap();
        assert!(r.all_passed(), "{:?}", r.checks);
        assert!((r.sup_abs_sixth_moment - 15.0).abs() < 1e-12);
    }

    #[test]
    fn validate_flags_mixed_mgf_domains() {
        let f = DistributionFamily::new(
            vec![gauss(0.0, 1.0), Component::exponential(1.0).unwrap()],
            Interval::real_line(),
            Interval::real_line(),
        )
        .unwrap();
        let r = f.validate(-0.5, 0.5, 5, &ValidationConfig::default()).unwrap();
        assert!(!r.passed(Assumption::Mgf));
        assert!(!r.passed(Assumption::Supp));
    }

    #[test]
    fn validate_variance_floor() {
        let comps: Vec<_> = (1..=50).map(|j| gauss(0.0, 1.0 / j as f64)).collect();
        let f = fam(comps);
        let r = f.validate(-1.0, 1.0, 5, &ValidationConfig::default()).unwrap();
        assert!((r.inf_variance - 1.0 / 2500.0).abs() < 1e-15);
        assert!(r.passed(Assumption::Cv));
        let strict = ValidationConfig { variance_floor: 1e-3, ..ValidationConfig::default() };
        let r = f.validate(-1.0, 1.0, 5, &strict).unwrap();
        assert!(!r.passed(Assumption::Cv));
    }

    #[test]
    fn validate_gamma_below_unit_shape_fails_cf() {
        let f = DistributionFamily::iid(Component::gamma(0.5, 1.0).unwrap(), 3).unwrap();
        let r = f.validate(-0.5, 0.5, 3, &ValidationConfig::default()).unwrap();
        assert!(!r.passed(Assumption::Cf));
        assert!(r.passed(Assumption::Mgf));
    }

    #[test]
    fn validate_rejects_bad_compact() {
        let f = DistributionFamily::iid(Component::exponential(1.0).unwrap(), 3).unwrap();
        assert!(matches!(
            f.validate(-0.5, 1.5, 5, &ValidationConfig::default()),
            Err(Error::CompactOutsideTheta { .. })
        ));
    }
}
