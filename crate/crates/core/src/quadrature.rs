//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-12),
            abs_tol: T::lit(1e-300).max(T::min_positive_value()),
            max_intervals: 4000,
        }
    }
}

impl<T: Scalar> QuadOptions<T> {
    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = half_len * T::lit(XGK[i]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + T::lit(WGK[i]) * (f1 + f2);
        if i % 2 == 1 {
            gauss = gauss + T::lit(WG[i / 2]) * (f1 + f2);
        }
    }
    let value = kronrod * half_len;
    let err = ((kronrod - gauss) * half_len).abs();
    (value, err)
}

/// Integrates `f` over `[a, b]` to the requested tolerance by repeatedly
/// bisecting the segment with the largest error estimate.
pub fn integrate<T, F>(mut f: F, a: T, b: T, opts: QuadOptions<T>) -> Result<Integral<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    integrate_with_breaks(&mut f, &[a, b], opts)
}

/// Like [`integrate`] but starts from the given ordered breakpoints, which is
/// useful when the integrand has kinks or is concentrated in a known region.
pub fn integrate_with_breaks<T, F>(f: &mut F, breaks: &[T], opts: QuadOptions<T>) -> Result<Integral<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if breaks.len() < 2 {
        return Err(Error::InvalidParameter("quadrature needs at least two breakpoints".into()));
    }
    let mut segs: Vec<Segment<T>> = Vec::with_capacity(breaks.len() * 4);
    for w in breaks.windows(2) {
        if !(w[1] >= w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::InvalidParameter("quadrature breakpoints must be finite and ordered".into()));
        }
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = gk15(f, w[0], w[1]);
        segs.push(Segment { a: w[0], b: w[1], value, error });
    }
    let mut evaluations = segs.len() * 15;
    loop {
        let total: T = segs.iter().map(|s| s.value).sum();
        let err: T = segs.iter().map(|s| s.error).sum();
        // Round-off floor for integrals that cancel to (near) zero.
        let floor = T::lit(100.0) * T::epsilon() * segs.iter().map(|s| s.value.abs()).sum::<T>();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: total.to_f64_lossy(),
                error: err.to_f64_lossy(),
            });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()).max(floor) || segs.is_empty() {
            return Ok(Integral { value: total, error: err, evaluations });
        }
        if segs.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure {
                estimate: total.to_f64_lossy(),
                error: err.to_f64_lossy(),
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segs.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Segment cannot be refined further at this precision; it keeps
            // its estimate but no longer contributes to the error budget.
            segs.push(Segment { error: T::zero(), ..seg });
            continue;
        }
        let (v1, e1) = gk15(f, seg.a, mid);
        let (v2, e2) = gk15(f, mid, seg.b);
        evaluations += 30;
        segs.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        segs.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
}

/// Evenly spaced breakpoints `lo, lo + h, ..., hi` with `pieces` segments.
pub fn uniform_breaks<T: Scalar>(lo: T, hi: T, pieces: usize) -> Vec<T> {
    let pieces = pieces.max(1);
    let h = (hi - lo) / T::from_usize_lossy(pieces);
    (0..=pieces)
        .map(|i| if i == pieces { hi } else { lo + h * T::from_usize_lossy(i) })
        .collect()
}
