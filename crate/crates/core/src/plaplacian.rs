//! The one-dimensional p-Laplacian J(u) = -(|u'|^{p-2}u')' on W_0^{1,p}(0,1),
//! its inverse, the first eigenpair and a shooting oracle.
//!
//! The inverse does not solve a discretized nonlinear system. Integrating
//! J(u) = h once gives φ_p(u'(t)) = C - H(t) with H(t) = ∫_0^t h, hence
//! u(t) = ∫_0^t φ_q(C - H(s)) ds with q = p/(p-1). The constant C is the
//! unique root of the increasing map C ↦ ∫_0^1 φ_q(C - H(s)) ds, which
//! enforces u(1) = 0.

use serde::Serialize;

use crate::error::{NehariError, Result};
use crate::grid::{derivative, integrate, norm_lp, norm_w1p, Grid, SampledFunction};
use crate::nonlinearity::NonlinearitySpec;
use crate::quad::gauss_legendre8;
use crate::rootfind::{brent, brent_with_values, expand_bracket, BrentOptions};

/// φ_p(s) = |s|^{p-2} s, with φ_p(0) = 0.
#[inline]
pub fn phi_p(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(p - 1.0).copysign(s)
    }
}

/// Conjugate exponent p/(p-1).
#[inline]
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(NehariError::InvalidArgument(format!("exponent p must be > 1, got {p}")))
    }
}

/// Samples of a density h acting on W_0^{1,p} through ⟨h, u⟩ = ∫ h u.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDensity {
    grid: Grid,
    values: Vec<f64>,
}

impl DualDensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NehariError::GridMismatch { expected: grid.len(), actual: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: Grid, f: F) -> Self {
        let s = SampledFunction::from_fn(grid, f);
        Self { grid, values: s.into_values() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn as_sampled(&self) -> SampledFunction {
        SampledFunction::new(self.grid, self.values.clone()).expect("lengths match")
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol)
    }

    /// Worst |h(t) - h(1-t)| over node pairs.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2).map(|i| (self.values[i] - self.values[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// Pairing ∫ h u.
    pub fn pair(&self, u: &SampledFunction) -> Result<f64> {
        Ok(integrate(&self.as_sampled().product(u)?))
    }
}

impl From<SampledFunction> for DualDensity {
    fn from(s: SampledFunction) -> Self {
        let grid = s.grid();
        Self { grid, values: s.into_values() }
    }
}

/// J(u) = -(φ_p(u'))' by repeated finite differences.
pub fn apply_j(u: &SampledFunction, p: f64) -> DualDensity {
    let flux = derivative(u).map(|d| phi_p(d, p));
    let values = derivative(&flux).into_values().into_iter().map(|v| -v).collect();
    DualDensity { grid: u.grid(), values }
}

// ---------------------------------------------------------------------------
// inversion

/// Per-cell cubic representation of H(t) = ∫_0^t h.
struct Primitive {
    h: f64,
    /// H at the nodes.
    nodal: Vec<f64>,
    /// Monomial coefficients (in the local variable x ∈ [0,1]) of the
    /// interpolant of h on each cell.
    cells: Vec<[f64; 4]>,
}

impl Primitive {
    fn new(density: &DualDensity) -> Self {
        let grid = density.grid;
        let n = grid.len();
        let h = grid.spacing();
        let v = &density.values;
        let width = n.min(4);
        let mut cells = Vec::with_capacity(n - 1);
        let mut nodal = Vec::with_capacity(n);
        nodal.push(0.0);
        let mut basis_cache: Vec<(isize, [[f64; 4]; 4])> = Vec::new();
        for k in 0..n - 1 {
            let start = (k as isize - 1).clamp(0, (n - width) as isize) as usize;
            let shift = start as isize - k as isize;
            let basis = match basis_cache.iter().find(|(s, _)| *s == shift) {
                Some((_, b)) => *b,
                None => {
                    let b = lagrange_monomials(shift, width);
                    basis_cache.push((shift, b));
                    b
                }
            };
            let mut c = [0.0; 4];
            for (j, bj) in basis.iter().enumerate().take(width) {
                let val = v[start + j];
                for m in 0..4 {
                    c[m] += val * bj[m];
                }
            }
            let inc = h * antiderivative(&c, 1.0);
            let last = *nodal.last().expect("nonempty");
            nodal.push(last + inc);
            cells.push(c);
        }
        Self { h, nodal, cells }
    }

    #[inline]
    fn at(&self, k: usize, x: f64) -> f64 {
        self.nodal[k] + self.h * antiderivative(&self.cells[k], x)
    }

    fn bounds(&self) -> (f64, f64) {
        self.nodal.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Cell integrals of φ_q(C - H) in order; `out` receives them if given.
    fn flux_integrals(&self, c: f64, q: f64, mut out: Option<&mut Vec<f64>>) -> f64 {
        let mut total = 0.0;
        if let Some(o) = out.as_deref_mut() {
            o.clear();
        }
        for k in 0..self.cells.len() {
            let y = |x: f64| c - self.at(k, x);
            let val = self.h * integrate_signed_power(&y, q);
            total += val;
            if let Some(o) = out.as_deref_mut() {
                o.push(val);
            }
        }
        total
    }
}

/// Monomial coefficients of the Lagrange basis on nodes `shift..shift+width`.
fn lagrange_monomials(shift: isize, width: usize) -> [[f64; 4]; 4] {
    let nodes: Vec<f64> = (0..width).map(|j| (shift + j as isize) as f64).collect();
    let mut out = [[0.0; 4]; 4];
    for j in 0..width {
        let mut poly = [0.0f64; 4];
        poly[0] = 1.0;
        let mut denom = 1.0;
        let mut deg = 0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m == j {
                continue;
            }
            // poly *= (x - xm)
            for d in (0..=deg).rev() {
                poly[d + 1] += poly[d];
                poly[d] *= -xm;
            }
            deg += 1;
            denom *= nodes[j] - xm;
        }
        for d in 0..4 {
            out[j][d] = poly[d] / denom;
        }
    }
    out
}

#[inline]
fn antiderivative(c: &[f64; 4], x: f64) -> f64 {
    x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)))
}

/// ∫_0^1 φ_q(y(x)) dx for a smooth y on one cell.
///
/// Zeros of y are located and the pieces next to a zero are integrated
/// after the substitution x = a + L v², which removes the |y|^{q-1}
/// endpoint singularity when q < 2.
fn integrate_signed_power<Y: Fn(f64) -> f64>(y: &Y, q: f64) -> f64 {
    const PROBES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    let vals: [f64; 5] = PROBES.map(y);
    let mut breaks: Vec<(f64, bool)> = Vec::with_capacity(6);
    breaks.push((0.0, vals[0] == 0.0));
    for i in 0..4 {
        let (a, b) = (PROBES[i], PROBES[i + 1]);
        let (ya, yb) = (vals[i], vals[i + 1]);
        if ya != 0.0 && yb != 0.0 && ya.signum() != yb.signum() {
            let opts = BrentOptions { xtol: 1e-15, ..Default::default() };
            let r = brent_with_values(|x| Ok(y(x)), a, ya, b, yb, opts).map(|r| r.x).unwrap_or(0.5 * (a + b));
            breaks.push((r, true));
        }
        breaks.push((b, yb == 0.0));
    }
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let ((a, ra), (b, rb)) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        total += piece(y, q, a, ra, b, rb);
    }
    total
}

fn piece<Y: Fn(f64) -> f64>(y: &Y, q: f64, a: f64, ra: bool, b: f64, rb: bool) -> f64 {
    let len = b - a;
    match (ra, rb) {
        (false, false) => gauss_legendre8(|x| phi_p(y(x), q), a, b),
        (true, false) => gauss_legendre8(|v| phi_p(y(a + len * v * v), q) * 2.0 * len * v, 0.0, 1.0),
        (false, true) => gauss_legendre8(|v| phi_p(y(b - len * v * v), q) * 2.0 * len * v, 0.0, 1.0),
        (true, true) => {
            let m = 0.5 * (a + b);
            piece(y, q, a, true, m, false) + piece(y, q, m, false, b, true)
        }
    }
}

/// The unique u with J(u) = h and u(0) = u(1) = 0.
///
/// Symmetric densities use C = H(1/2) directly. Otherwise C is bracketed by
/// [min H, max H] (expanded if needed) and located by Brent's method.
pub fn invert_j(density: &DualDensity, p: f64) -> Result<SampledFunction> {
    check_exponent(p)?;
    if let Some(bad) = density.values.iter().find(|v| !v.is_finite()) {
        return Err(NehariError::NonFinite(format!("density value {bad}")));
    }
    let grid = density.grid;
    let q = conjugate(p);
    let prim = Primitive::new(density);
    let (lo, hi) = prim.bounds();
    let scale = lo.abs().max(hi.abs());

    let mut u = SampledFunction::zeros(grid);
    if scale == 0.0 {
        return Ok(u);
    }

    let max_h = density.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let symmetric = density.symmetry_defect() <= 1e-14 * max_h;
    let c = if symmetric {
        prim.nodal[grid.mid()]
    } else {
        let objective = |c: f64| Ok(prim.flux_integrals(c, q, None));
        let (a, fa, b, fb) = expand_bracket(objective, lo, hi, 60)?;
        let opts = BrentOptions { xtol: 1e-16 * scale, rtol: 2.0 * f64::EPSILON, ftol: 0.0, max_iters: 300 };
        brent_with_values(objective, a, fa, b, fb, opts)?.x
    };

    let mut cells = Vec::with_capacity(grid.len() - 1);
    prim.flux_integrals(c, q, Some(&mut cells));
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    for inc in cells {
        acc += inc;
        values.push(acc);
    }
    u = SampledFunction::new(grid, values)?;
    u.pin_dirichlet();
    Ok(u)
}

// ---------------------------------------------------------------------------
// first eigenpair

pub const EIGEN_MAX_ITERS: usize = 500;
pub const EIGEN_TOL: f64 = 1e-10;

/// First eigenvalue λ_p of the Rayleigh quotient |u|_{1,p}^p / |u|_p^p,
/// the embedding constant c_p = λ_p^{-1/p} and the normalized eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub p: f64,
    pub lambda_p: f64,
    pub c_p: f64,
    pub eigenfunction: SampledFunction,
    pub iterations: usize,
}

/// JSON layout of an [`EigenPair`] (the eigenfunction goes to CSV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSummary {
    pub p: f64,
    pub lambda_p: f64,
    pub c_p: f64,
}

impl EigenPair {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary { p: self.p, lambda_p: self.lambda_p, c_p: self.c_p }
    }
}

pub fn rayleigh_quotient(u: &SampledFunction, p: f64) -> f64 {
    norm_w1p(u, p).powf(p) / norm_lp(u, p).powf(p)
}

/// Inverse iteration u ← J^{-1}(φ_p(u)), renormalized, until the Rayleigh
/// quotient changes by at most `tol` (relative to max(1, λ)).
pub fn eigen_p(p: f64, tol: f64, grid: Grid) -> Result<EigenPair> {
    eigen_p_with_limit(p, tol, grid, EIGEN_MAX_ITERS)
}

pub fn eigen_p_with_limit(p: f64, tol: f64, grid: Grid, max_iters: usize) -> Result<EigenPair> {
    check_exponent(p)?;
    let mut u = SampledFunction::from_fn(grid, |t| (std::f64::consts::PI * t).sin());
    u.pin_dirichlet();
    let mut quotient = rayleigh_quotient(&u, p);
    for iter in 1..=max_iters {
        let density = DualDensity::from(u.map(|v| phi_p(v, p)));
        let next = invert_j(&density, p)?;
        let norm = norm_w1p(&next, p);
        u = &next * (1.0 / norm);
        let new_quotient = rayleigh_quotient(&u, p);
        let change = (new_quotient - quotient).abs();
        quotient = new_quotient;
        if change <= tol * quotient.max(1.0) {
            return Ok(EigenPair {
                p,
                lambda_p: quotient,
                c_p: quotient.powf(-1.0 / p),
                eigenfunction: u,
                iterations: iter,
            });
        }
    }
    Err(NehariError::EigenNotConverged { iters: max_iters, quotient })
}

// ---------------------------------------------------------------------------
// shooting

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// |u| above this aborts the integration.
    pub blow_up_cap: f64,
    /// Relative tolerance on u(1) accepted by [`shoot_solve`].
    pub endpoint_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { blow_up_cap: 1e150, endpoint_tol: 1e-10 }
    }
}

/// Integrates u(0) = 0, φ_p(u')(0) = m, (φ_p(u'))' = -f(u) with classical RK4
/// on the grid, using the system u' = φ_q(v), v' = -f(u). Negative u uses the
/// extension f(u) = f(0).
pub fn shoot(
    f: &NonlinearitySpec,
    p: f64,
    m: f64,
    grid: Grid,
    opts: &ShootOptions,
) -> Result<SampledFunction> {
    check_exponent(p)?;
    if !(m > 0.0) {
        return Err(NehariError::InvalidArgument(format!("initial flux must be > 0, got {m}")));
    }
    let q = conjugate(p);
    let h = grid.spacing();
    let rhs = |u: f64, v: f64| -> Result<(f64, f64)> { Ok((phi_p(v, q), -f.eval_f_extended(u)?)) };
    let mut values = Vec::with_capacity(grid.len());
    let (mut u, mut v) = (0.0f64, m);
    values.push(u);
    for i in 1..grid.len() {
        let (k1u, k1v) = rhs(u, v)?;
        let (k2u, k2v) = rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v)?;
        let (k3u, k3v) = rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v)?;
        let (k4u, k4v) = rhs(u + h * k3u, v + h * k3v)?;
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(u.abs() <= opts.blow_up_cap && v.abs() <= opts.blow_up_cap) {
            return Err(NehariError::BlowUp { t: grid.node(i), value: u.abs().max(v.abs()), cap: opts.blow_up_cap });
        }
        values.push(u);
    }
    SampledFunction::new(grid, values)
}

/// A Dirichlet solution produced by shooting.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub flux: f64,
    /// u(1) before pinning, relative to max |u|.
    pub endpoint_residual: f64,
    pub solution: SampledFunction,
}

/// Brent's method on m ↦ u(1; m) over a sign-changing bracket.
pub fn shoot_solve(
    f: &NonlinearitySpec,
    p: f64,
    bracket: (f64, f64),
    grid: Grid,
    opts: &ShootOptions,
) -> Result<OracleSolution> {
    let (m1, m2) = bracket;
    let last = grid.len() - 1;
    let endpoint = |m: f64| -> Result<f64> { Ok(shoot(f, p, m, grid, opts)?.values()[last]) };
    let scale = m1.abs().max(m2.abs());
    let bopts = BrentOptions { xtol: 1e-15 * scale, rtol: 2.0 * f64::EPSILON, ftol: 0.0, max_iters: 300 };
    let root = brent(endpoint, m1, m2, bopts)?;
    let solution = shoot(f, p, root.x, grid, opts)?;
    let endpoint_residual = solution.values()[last].abs() / solution.max_abs().max(f64::MIN_POSITIVE);
    if endpoint_residual > opts.endpoint_tol {
        return Err(NehariError::RootNotConverged { iters: root.iters, x: root.x });
    }
    Ok(OracleSolution { flux: root.x, endpoint_residual, solution })
}

/// First sign change of u(1; m) from positive to nonpositive over the
/// increasing candidate fluxes.
pub fn find_flux_bracket(
    f: &NonlinearitySpec,
    p: f64,
    candidates: &[f64],
    grid: Grid,
    opts: &ShootOptions,
) -> Result<(f64, f64)> {
    let last = grid.len() - 1;
    let mut prev: Option<(f64, f64)> = None;
    for &m in candidates {
        let end = shoot(f, p, m, grid, opts)?.values()[last];
        if let Some((pm, pe)) = prev {
            if pe > 0.0 && end <= 0.0 {
                return Ok((pm, m));
            }
        }
        prev = Some((m, end));
    }
    Err(NehariError::NoFluxBracket { m_max: candidates.last().copied().unwrap_or(0.0) })
}

/// Uniform scan of (0, m_max] with `samples` fluxes.
pub fn scan_flux_bracket(
    f: &NonlinearitySpec,
    p: f64,
    m_max: f64,
    samples: usize,
    grid: Grid,
    opts: &ShootOptions,
) -> Result<(f64, f64)> {
    let candidates: Vec<f64> = (1..=samples).map(|k| m_max * k as f64 / samples as f64).collect();
    find_flux_bracket(f, p, &candidates, grid, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(401).unwrap()
    }

    fn sup(a: &SampledFunction, b: &SampledFunction) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn phi_examples() {
        for x in [-3.0, 0.0, 0.7] {
            assert_eq!(phi_p(x, 2.0), x);
        }
        assert_eq!(phi_p(2.0, 3.0), 4.0);
        assert_eq!(phi_p(-2.0, 3.0), -4.0);
        let p = 1.5;
        for s in [-2.0, 0.3, 5.0] {
            assert!((phi_p(phi_p(s, p), conjugate(p)) - s).abs() < 1e-14);
        }
    }

    #[test]
    fn apply_j_linear_cases() {
        let g = grid();
        let s = SampledFunction::from_fn(g, |t| (PI * t).sin());
        let j = apply_j(&s, 2.0);
        let err = g.nodes().zip(j.values()).map(|(t, v)| (v - PI * PI * (PI * t).sin()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-2, "err {err}");
        let u = SampledFunction::from_fn(g, |t| t * (1.0 - t) / 2.0);
        let j = apply_j(&u, 2.0);
        for v in &j.values()[1..g.len() - 1] {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn apply_j_torsion_profile() {
        let g = grid();
        for p in [1.5, 3.0] {
            let q = conjugate(p);
            let u = SampledFunction::from_fn(g, |t| (0.5f64.powf(q) - (0.5 - t).abs().powf(q)) / q);
            let j = apply_j(&u, p);
            for (t, v) in g.nodes().zip(j.values()) {
                if (t - 0.5).abs() > 0.05 {
                    assert!((v - 1.0).abs() < 1e-3, "p {p} t {t} v {v}");
                }
            }
        }
    }

    #[test]
    fn invert_constant_density() {
        let g = grid();
        let one = DualDensity::from_fn(g, |_| 1.0);
        let u = invert_j(&one, 2.0).unwrap();
        let exact = SampledFunction::from_fn(g, |t| t * (1.0 - t) / 2.0);
        assert!(sup(&u, &exact) < 1e-8);
        assert!((u.values()[g.mid()] - 0.125).abs() < 1e-12);
        for p in [1.5, 3.0] {
            let q = conjugate(p);
            let u = invert_j(&one, p).unwrap();
            let exact = SampledFunction::from_fn(g, |t| (0.5f64.powf(q) - (0.5 - t).abs().powf(q)) / q);
            assert!(sup(&u, &exact) < 1e-6, "p {p}: {}", sup(&u, &exact));
        }
    }

    #[test]
    fn invert_sine_density() {
        let g = grid();
        let h = DualDensity::from_fn(g, |t| PI * PI * (PI * t).sin());
        let u = invert_j(&h, 2.0).unwrap();
        assert!(sup(&u, &SampledFunction::from_fn(g, |t| (PI * t).sin())) < 1e-4);
        assert!(u.is_dirichlet());
    }

    #[test]
    fn invert_asymmetric_density_solves_the_equation() {
        let g = grid();
        // h = 1 + t, p = 2: u'' = -(1 + t), u = -t^2/2 - t^3/6 + c t with u(1) = 0
        let h = DualDensity::from_fn(g, |t| 1.0 + t);
        let u = invert_j(&h, 2.0).unwrap();
        let c = 0.5 + 1.0 / 6.0;
        let exact = SampledFunction::from_fn(g, |t| -t * t / 2.0 - t * t * t / 6.0 + c * t);
        assert!(sup(&u, &exact) < 1e-10, "{}", sup(&u, &exact));
    }

    #[test]
    fn invert_zero_density() {
        let g = grid();
        let u = invert_j(&DualDensity::from_fn(g, |_| 0.0), 3.0).unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn invert_rejects_nan() {
        let g = Grid::new(11).unwrap();
        let h = DualDensity::from_fn(g, |t| if t > 0.5 { f64::NAN } else { 1.0 });
        assert!(invert_j(&h, 2.0).is_err());
    }

    #[test]
    fn eigen_p2_is_pi_squared() {
        let e = eigen_p(2.0, EIGEN_TOL, grid()).unwrap();
        assert!((e.lambda_p - PI * PI).abs() < 1e-4, "{}", e.lambda_p);
        assert!((e.c_p - 1.0 / PI).abs() < 1e-5);
        assert!((e.c_p - e.lambda_p.powf(-0.5)).abs() < 1e-12);
        assert!((norm_w1p(&e.eigenfunction, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_rejects_bad_p() {
        assert!(eigen_p(1.0, EIGEN_TOL, grid()).is_err());
    }

    #[test]
    fn eigen_reports_non_convergence() {
        let err = eigen_p_with_limit(3.0, 1e-30, Grid::new(41).unwrap(), 3).unwrap_err();
        assert!(matches!(err, NehariError::EigenNotConverged { iters: 3, .. }));
    }

    #[test]
    fn shoot_free_motion_and_torsion() {
        let g = grid();
        let opts = ShootOptions::default();
        let u = shoot(&NonlinearitySpec::zero(), 2.0, 1.0, g, &opts).unwrap();
        for (t, v) in g.nodes().zip(u.values()) {
            assert!((v - t).abs() < 1e-13);
        }
        let u = shoot(&NonlinearitySpec::constant(1.0), 2.0, 0.5, g, &opts).unwrap();
        for (t, v) in g.nodes().zip(u.values()) {
            assert!((v - t * (1.0 - t) / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn shoot_rejects_nonpositive_flux() {
        let g = grid();
        assert!(shoot(&NonlinearitySpec::zero(), 2.0, 0.0, g, &ShootOptions::default()).is_err());
    }

    #[test]
    fn shoot_reports_blow_up() {
        let g = grid();
        let opts = ShootOptions { blow_up_cap: 0.1, ..Default::default() };
        let err = shoot(&NonlinearitySpec::zero(), 2.0, 1.0, g, &opts).unwrap_err();
        assert!(matches!(err, NehariError::BlowUp { .. }));
    }

    #[test]
    fn shoot_solve_constant_forcing() {
        let g = grid();
        let opts = ShootOptions::default();
        let sol = shoot_solve(&NonlinearitySpec::constant(1.0), 2.0, (0.1, 1.0), g, &opts).unwrap();
        assert!((sol.flux - 0.5).abs() < 1e-12);
        assert!((norm_w1p(&sol.solution, 2.0) - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn shoot_solve_sub_eigenvalue_linear_has_no_bracket() {
        let g = grid();
        let f = NonlinearitySpec::power(0.8 * PI * PI, 1.0);
        let opts = ShootOptions::default();
        assert!(matches!(
            scan_flux_bracket(&f, 2.0, 100.0, 50, g, &opts),
            Err(NehariError::NoFluxBracket { .. })
        ));
        assert!(matches!(shoot_solve(&f, 2.0, (1.0, 10.0), g, &opts), Err(NehariError::NoBracket { .. })));
    }

    #[test]
    fn shoot_solve_cubic() {
        let g = grid();
        let f = NonlinearitySpec::power(1.0, 3.0);
        let opts = ShootOptions::default();
        let bracket = scan_flux_bracket(&f, 2.0, 100.0, 200, g, &opts).unwrap();
        let sol = shoot_solve(&f, 2.0, bracket, g, &opts).unwrap();
        let u = &sol.solution;
        assert!(u.values()[1..g.len() - 1].iter().all(|&v| v > 0.0));
        let n = g.len();
        let asym = (0..n).map(|i| (u.values()[i] - u.values()[n - 1 - i]).abs()).fold(0.0, f64::max);
        assert!(asym < 1e-6 * u.max_abs());
        let j = apply_j(u, 2.0);
        let res = (2..n - 2).map(|i| (j.values()[i] - u.values()[i].powi(3)).abs()).fold(0.0, f64::max);
        assert!(res < 1e-3, "residual {res}");
    }
}
