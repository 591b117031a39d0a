//! Bracketed root finding for monotone scalar equations.
//!
//! The solver is Brent's method: secant and inverse quadratic steps,
//! falling back to bisection whenever an interpolated step leaves the
//! bracket or shrinks it too slowly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    /// Accept as soon as `|f(x)| <= f_tol`.
    pub f_tol: T,
    /// Additional absolute tolerance on the bracket width.
    pub x_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for RootOptions<T> {
    fn default() -> Self {
        Self { f_tol: T::lit(1e-12), x_tol: T::zero(), max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub fx: T,
    pub iterations: usize,
    /// Final bracket `(lo, hi)` with `lo <= x <= hi`.
    pub bracket: (T, T),
}

/// Finds a sign change of `f` inside `[a, b]`, given `fa = f(a)` and `fb = f(b)`
/// of opposite sign (or one of them zero).
pub fn brent<T, F>(mut f: F, a: T, b: T, fa: T, fb: T, opts: RootOptions<T>) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let order = |x: T, y: T| if x <= y { (x, y) } else { (y, x) };
    if fa == T::zero() {
        return Ok(Root { x: a, fx: fa, iterations: 0, bracket: (a, a) });
    }
    if fb == T::zero() {
        return Ok(Root { x: b, fx: fb, iterations: 0, bracket: (b, b) });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidParameter("root not bracketed".into()));
    }

    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let eps = T::epsilon();

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * eps * b.abs() + half * opts.x_tol;
        let m = half * (c - b);
        if fb.abs() <= opts.f_tol || m.abs() <= tol || fb == T::zero() {
            return Ok(Root { x: b, fx: fb, iterations: iter, bracket: order(b, c) });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (three * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::InvalidParameter("non-finite function value inside bracket".into()));
        }
    }
    Ok(Root { x: b, fx: fb, iterations: opts.max_iter, bracket: order(b, c) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = brent(f, 0.0, 2.0, f(0.0), f(2.0), RootOptions::default()).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-12);
        assert!(r.bracket.0 <= r.x && r.x <= r.bracket.1);
    }

    #[test]
    fn rejects_unbracketed() {
        let f = |x: f64| x * x + 1.0;
        assert!(brent(f, -1.0, 1.0, f(-1.0), f(1.0), RootOptions::default()).is_err());
    }

    #[test]
    fn steep_monotone_function() {
        // m(θ) = 1/(1-θ) near the pole
        let f = |t: f64| 1.0 / (1.0 - t) - 1e6;
        let r = brent(f, 0.0, 1.0 - 1e-12, f(0.0), f(1.0 - 1e-12), RootOptions::default()).unwrap();
        assert!((r.x - (1.0 - 1e-6)).abs() < 1e-14);
    }

    #[test]
    fn f32_root() {
        let f = |x: f32| x.exp() - 3.0;
        let opts = RootOptions { f_tol: 1e-6, ..RootOptions::default() };
        let r = brent(f, 0.0, 2.0, f(0.0), f(2.0), opts).unwrap();
        assert!((r.x - 3f32.ln()).abs() < 1e-5);
    }
}
