//! Energy functional, fiber maps along rays, Nehari projection and the
//! fixed-point operator T = J^{-1} N_f.

use serde::Serialize;

use crate::error::{NehariError, Result};
use crate::grid::{integrate, norm_w1p, SampledFunction};
use crate::hypotheses::Annulus;
use crate::nonlinearity::NonlinearitySpec;
use crate::plaplacian::{invert_j, DualDensity};
use crate::rootfind::{brent_with_values, BrentOptions};

/// N_f(u) = f∘u, with f extended by f(0) below zero.
pub fn nemytskii(u: &SampledFunction, f: &NonlinearitySpec) -> Result<SampledFunction> {
    u.try_map(|v| f.eval_f_extended(v))
}

/// E(u) = |u|_{1,p}^p / p - ∫ F(u).
pub fn energy_e(u: &SampledFunction, f: &NonlinearitySpec, p: f64) -> Result<f64> {
    let potential = u.try_map(|v| f.eval_big_f(v.max(0.0)))?;
    Ok(norm_w1p(u, p).powf(p) / p - integrate(&potential))
}

/// The ray through a fixed u with its norm cached.
#[derive(Debug, Clone)]
pub struct Fiber<'a> {
    u: &'a SampledFunction,
    f: &'a NonlinearitySpec,
    p: f64,
    norm: f64,
}

impl<'a> Fiber<'a> {
    pub fn new(u: &'a SampledFunction, f: &'a NonlinearitySpec, p: f64) -> Self {
        Self { u, f, p, norm: norm_w1p(u, p) }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// α'_u(σ) = σ^{p-1}|u|^p - ∫ f(σu) u.
    pub fn alpha_prime(&self, sigma: f64) -> Result<f64> {
        let forcing = self.u.try_map(|v| self.f.eval_f_extended(sigma * v))?;
        Ok(sigma.powf(self.p - 1.0) * self.norm.powf(self.p) - integrate(&forcing.product(self.u)?))
    }

    /// ∫ f(γ w) w with w = u/|u|.
    fn weighted_forcing(&self, gamma: f64) -> Result<f64> {
        let w = self.u * (1.0 / self.norm);
        let forcing = w.try_map(|v| self.f.eval_f_extended(gamma * v))?;
        Ok(integrate(&forcing.product(&w)?))
    }

    /// h(γ) = 1 - ∫ f(γw) w / γ^{p-1}.
    pub fn h(&self, gamma: f64) -> Result<f64> {
        Ok(1.0 - self.weighted_forcing(gamma)? / gamma.powf(self.p - 1.0))
    }

    /// h̃(γ) = γ^{p-1} - ∫ f(γw) w.
    pub fn htilde(&self, gamma: f64) -> Result<f64> {
        Ok(gamma.powf(self.p - 1.0) - self.weighted_forcing(gamma)?)
    }
}

pub fn alpha_prime(u: &SampledFunction, sigma: f64, f: &NonlinearitySpec, p: f64) -> Result<f64> {
    Fiber::new(u, f, p).alpha_prime(sigma)
}

pub fn h_diagnostic(u: &SampledFunction, gamma: f64, f: &NonlinearitySpec, p: f64) -> Result<f64> {
    nonzero(u, p)?;
    Fiber::new(u, f, p).h(gamma)
}

pub fn htilde_diagnostic(u: &SampledFunction, gamma: f64, f: &NonlinearitySpec, p: f64) -> Result<f64> {
    nonzero(u, p)?;
    Fiber::new(u, f, p).htilde(gamma)
}

fn nonzero(u: &SampledFunction, p: f64) -> Result<f64> {
    let norm = norm_w1p(u, p);
    if norm > 0.0 && norm.is_finite() {
        Ok(norm)
    } else {
        Err(NehariError::InvalidArgument(format!("u must be nonzero with finite norm, |u| = {norm}")))
    }
}

/// The scalar s(u) placing s(u)·u on the Nehari manifold of the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariProjection {
    pub s_value: f64,
    pub sigma_bracket: (f64, f64),
    pub alpha_prime_at_ends: (f64, f64),
    pub alpha_prime_at_root: f64,
    pub tol_root: f64,
    pub bisection_iters: usize,
}

/// Brent search for the zero of α'_u inside (r/|u|, R/|u|).
///
/// Fails without widening the bracket when α'_u(r/|u|) <= 0 or
/// α'_u(R/|u|) >= 0. Terminates on a σ-bracket of relative width 1e-12;
/// |α'_u(s)| <= 1e-10 (1 + |u|^p) is verified afterwards.
pub fn nehari_project(
    u: &SampledFunction,
    f: &NonlinearitySpec,
    p: f64,
    annulus: &Annulus,
) -> Result<NehariProjection> {
    let fiber = Fiber::new(u, f, p);
    let norm = fiber.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(NehariError::InvalidArgument(format!("cannot project u with |u| = {norm}")));
    }
    let lo = annulus.inner() / norm;
    let hi = annulus.outer() / norm;
    let a_lo = fiber.alpha_prime(lo)?;
    let a_hi = fiber.alpha_prime(hi)?;
    if !(a_lo > 0.0 && a_hi < 0.0) {
        return Err(NehariError::ProjectionBracket { alpha_low: a_lo, alpha_high: a_hi });
    }
    let tol_root = 1e-10 * (1.0 + norm.powf(p));
    let opts = BrentOptions { xtol: 0.0, rtol: 0.5e-12, ftol: 0.0, max_iters: 200 };
    let root = brent_with_values(|s| fiber.alpha_prime(s), lo, a_lo, hi, a_hi, opts)?;
    if root.fx.abs() > tol_root {
        return Err(NehariError::RootNotConverged { iters: root.iters, x: root.x });
    }
    Ok(NehariProjection {
        s_value: root.x,
        sigma_bracket: (lo, hi),
        alpha_prime_at_ends: (a_lo, a_hi),
        alpha_prime_at_root: root.fx,
        tol_root,
        bisection_iters: root.iters,
    })
}

/// T(u) = J^{-1}(f∘u).
pub fn apply_t(u: &SampledFunction, f: &NonlinearitySpec, p: f64) -> Result<SampledFunction> {
    invert_j(&DualDensity::from(nemytskii(u, f)?), p)
}

/// |u - T(u)|_{1,p}.
pub fn critical_residual(u: &SampledFunction, f: &NonlinearitySpec, p: f64) -> Result<f64> {
    let tu = apply_t(u, f, p)?;
    Ok(norm_w1p(&(u - &tu), p))
}

/// ⟨E'(u), u⟩ = |u|^p - ∫ f(u) u, i.e. α'_u(1).
pub fn nehari_residual(u: &SampledFunction, f: &NonlinearitySpec, p: f64) -> Result<f64> {
    alpha_prime(u, 1.0, f, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(401).unwrap()
    }

    fn sine() -> SampledFunction {
        let mut u = SampledFunction::from_fn(grid(), |t| (PI * t).sin());
        u.pin_dirichlet();
        u
    }

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::power(1.0, 3.0)
    }

    fn wide() -> Annulus {
        Annulus::new(1e-3, 1e3, 0.2).unwrap()
    }

    #[test]
    fn energy_examples() {
        let z = SampledFunction::zeros(grid());
        assert_eq!(energy_e(&z, &cubic(), 2.0).unwrap(), 0.0);
        let u = sine();
        let e0 = energy_e(&u, &NonlinearitySpec::zero(), 3.0).unwrap();
        assert!((e0 - norm_w1p(&u, 3.0).powi(3) / 3.0).abs() < 1e-14);
        let e = energy_e(&u, &cubic(), 2.0).unwrap();
        assert!((e - (PI * PI / 4.0 - 3.0 / 32.0)).abs() < 1e-5);
    }

    #[test]
    fn alpha_prime_zero_forcing() {
        let u = sine();
        let a = alpha_prime(&u, 2.0, &NonlinearitySpec::zero(), 2.0).unwrap();
        assert!((a - 2.0 * norm_w1p(&u, 2.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn alpha_prime_matches_energy_difference() {
        let u = sine();
        let f = cubic();
        for sigma in [0.5, 1.3, 3.0] {
            let eps = 1e-5;
            let plus = energy_e(&(&u * (sigma * (1.0 + eps))), &f, 2.0).unwrap();
            let minus = energy_e(&(&u * (sigma * (1.0 - eps))), &f, 2.0).unwrap();
            let fd = (plus - minus) / (2.0 * eps * sigma);
            let a = alpha_prime(&u, sigma, &f, 2.0).unwrap();
            assert!((fd - a).abs() <= 1e-5 * a.abs().max(1.0), "σ {sigma}: {fd} vs {a}");
        }
    }

    #[test]
    fn projection_closed_form_for_cubic() {
        let u = sine();
        let proj = nehari_project(&u, &cubic(), 2.0, &wide()).unwrap();
        assert!((proj.s_value - 2.0 * PI / 3f64.sqrt()).abs() < 1e-6);
        assert!(proj.sigma_bracket.0 < proj.s_value && proj.s_value < proj.sigma_bracket.1);
        assert!(proj.alpha_prime_at_ends.0 > 0.0 && proj.alpha_prime_at_ends.1 < 0.0);
        assert!(proj.alpha_prime_at_root.abs() <= proj.tol_root);
    }

    #[test]
    fn projection_ray_property() {
        let u = sine();
        let s = nehari_project(&u, &cubic(), 2.0, &wide()).unwrap().s_value;
        for c in [0.5, 2.0] {
            let sc = nehari_project(&(&u * c), &cubic(), 2.0, &wide()).unwrap().s_value;
            assert!((sc - s / c).abs() <= 1e-10 * s / c);
        }
    }

    #[test]
    fn projection_fails_without_forcing() {
        let err = nehari_project(&sine(), &NonlinearitySpec::zero(), 2.0, &wide()).unwrap_err();
        match err {
            NehariError::ProjectionBracket { alpha_low, alpha_high } => {
                assert!(alpha_low > 0.0 && alpha_high > 0.0)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projection_rejects_zero() {
        let z = SampledFunction::zeros(grid());
        assert!(nehari_project(&z, &cubic(), 2.0, &wide()).is_err());
    }

    #[test]
    fn t_examples() {
        let g = grid();
        let one = NonlinearitySpec::constant(1.0);
        let tu = apply_t(&sine(), &one, 2.0).unwrap();
        let exact = SampledFunction::from_fn(g, |t| t * (1.0 - t) / 2.0);
        assert!((&tu - &exact).max_abs() < 1e-10);
        let z = SampledFunction::zeros(g);
        assert_eq!(apply_t(&z, &cubic(), 2.0).unwrap().max_abs(), 0.0);
        assert_eq!(critical_residual(&z, &cubic(), 2.0).unwrap(), 0.0);
        let r = critical_residual(&sine(), &NonlinearitySpec::zero(), 2.0).unwrap();
        assert!((r - PI / 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn h_diagnostics() {
        let u = sine();
        let zero = NonlinearitySpec::zero();
        assert_eq!(h_diagnostic(&u, 2.0, &zero, 3.0).unwrap(), 1.0);
        assert!((htilde_diagnostic(&u, 2.0, &zero, 3.0).unwrap() - 4.0).abs() < 1e-14);
        let f = cubic();
        for gamma in [0.5, 1.0, 4.0, 11.0] {
            let h = h_diagnostic(&u, gamma, &f, 2.0).unwrap();
            let ht = htilde_diagnostic(&u, gamma, &f, 2.0).unwrap();
            assert!((ht - gamma * h).abs() <= 1e-12 * ht.abs().max(1.0));
        }
        assert!(h_diagnostic(&SampledFunction::zeros(grid()), 1.0, &f, 2.0).is_err());
    }

    #[test]
    fn alpha_prime_factorizations() {
        let u = sine();
        let f = cubic();
        let p = 2.0;
        let fiber = Fiber::new(&u, &f, p);
        let norm = fiber.norm();
        for sigma in [0.3, 1.0, 2.7] {
            let a = fiber.alpha_prime(sigma).unwrap();
            let via_h = sigma.powf(p - 1.0) * norm.powf(p) * fiber.h(sigma * norm).unwrap();
            let via_ht = norm * fiber.htilde(sigma * norm).unwrap();
            assert!((a - via_h).abs() <= 1e-8 * a.abs());
            assert!((a - via_ht).abs() <= 1e-8 * a.abs());
        }
    }
}
