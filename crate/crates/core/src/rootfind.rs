//! Bracketing scalar root finders.
//!
//! Brent's method (inverse quadratic interpolation guarded by bisection)
//! plus a geometric bracket expansion helper. The objective is fallible so
//! callers can propagate evaluation errors from inside the search.

use crate::error::{NehariError, Result};

/// Termination controls for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct BrentOptions {
    /// Absolute tolerance on the bracket width.
    pub xtol: f64,
    /// Relative tolerance on the bracket width (scaled by |x|).
    pub rtol: f64,
    /// Stop as soon as |f(x)| <= ftol. Zero disables the test.
    pub ftol: f64,
    pub max_iters: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        Self { xtol: 1e-14, rtol: 4.0 * f64::EPSILON, ftol: 0.0, max_iters: 200 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iters: usize,
}

/// Finds a zero of `f` in `[a, b]`, which must bracket a sign change.
pub fn brent<F>(mut f: F, a: f64, b: f64, opts: BrentOptions) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    brent_with_values(f, a, fa, b, fb, opts)
}

/// As [`brent`], reusing already computed endpoint values.
pub fn brent_with_values<F>(
    mut f: F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    opts: BrentOptions,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(NehariError::NonFinite(format!("f({a}) = {fa}, f({b}) = {fb}")));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iters: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iters: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(NehariError::NoBracket { a, b, fa, fb });
    }

    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iters {
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
        let tol = 2.0 * opts.rtol * b.abs() + 0.5 * opts.xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || fb.abs() <= opts.ftol {
            return Ok(Root { x: b, fx: fb, iters: iter });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
        if !fb.is_finite() {
            return Err(NehariError::NonFinite(format!("f({b}) = {fb}")));
        }
    }
    Err(NehariError::RootNotConverged { iters: opts.max_iters, x: b })
}

/// Widens `[lo, hi]` geometrically about its midpoint until `f` changes sign.
/// Returns the bracket with the function values at its ends.
pub fn expand_bracket<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    max_expansions: usize,
) -> Result<(f64, f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut width = (hi - lo).max(f64::EPSILON * (1.0 + lo.abs().max(hi.abs())));
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    for _ in 0..max_expansions {
        if flo == 0.0 || fhi == 0.0 || flo.signum() != fhi.signum() {
            return Ok((lo, flo, hi, fhi));
        }
        width *= 1.6;
        lo -= width;
        hi += width;
        flo = f(lo)?;
        fhi = f(hi)?;
    }
    if flo == 0.0 || fhi == 0.0 || flo.signum() != fhi.signum() {
        return Ok((lo, flo, hi, fhi));
    }
    Err(NehariError::NoBracket { a: lo, b: hi, fa: flo, fb: fhi })
}
