//! Nehari-projected fixed-point iteration inside one conical annulus, and
//! the driver running it over a family of disjoint annuli.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{check_cone, default_tolerance, ConeReport};
use crate::energy::{apply_t, nehari_project};
use crate::error::{NehariError, Result};
use crate::grid::{norm_w1p, Grid, SampledFunction};
use crate::hypotheses::{check_all, Annulus, CheckOptions, HypothesisContext, HypothesisReport};
use crate::nonlinearity::NonlinearitySpec;
use crate::plaplacian::{invert_j, DualDensity};

/// Starting profile, rescaled to norm √(rR) before the first projection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Solution of J(u) = 1.
    #[default]
    Torsion,
    /// sin(πt).
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop when |u - T(u)|_{1,p} <= tol_residual |u|_{1,p}.
    pub tol_residual: f64,
    /// θ in u <- (1 - θ) u + θ s(T(u)) T(u).
    pub damping: f64,
    pub initial_guess: InitialGuess,
    pub grid: Grid,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol_residual: 1e-8,
            damping: 1.0,
            initial_guess: InitialGuess::Torsion,
            grid: Grid::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(NehariError::InvalidArgument(format!("tol_residual must be > 0, got {}", self.tol_residual)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(NehariError::InvalidArgument(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// The bracket condition for s failed at iterate `iter`.
    ProjectionFailed { iter: usize, alpha_low: f64, alpha_high: f64, message: String },
    ConeViolation { iter: usize },
    /// Residual reached tolerance but the norm sits on the annulus boundary.
    NotLocalized { iter: usize },
    NumericFailure { iter: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iter: usize,
    pub residual: f64,
    pub s_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: SampledFunction,
    /// Path of the persisted solution CSV, when written.
    pub solution_csv: Option<String>,
    pub p: f64,
    pub annulus: Annulus,
    pub grid_nodes: usize,
    pub norm_1p: f64,
    /// |u - T(u)|_{1,p} / |u|_{1,p} at the final iterate.
    pub residual: f64,
    pub projection_factors: Vec<f64>,
    /// |T(u)|_{1,p} / |u|_{1,p} at the final iterate.
    pub lambda_estimate: f64,
    pub localized: bool,
    /// min(|u| - r, R - |u|).
    pub localization_margin: f64,
    pub cone: ConeReport,
    pub iters: usize,
    pub converged: bool,
    pub status: SolveStatus,
    #[serde(skip)]
    pub history: Vec<HistoryEntry>,
}

impl SolveReport {
    pub fn final_projection_factor(&self) -> Option<f64> {
        self.projection_factors.last().copied()
    }

    /// "iter,residual,s_value" rows.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iter,residual,s_value\n");
        for h in &self.history {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", h.iter, h.residual, h.s_value);
        }
        out
    }
}

pub fn initial_guess(kind: InitialGuess, p: f64, grid: Grid, norm: f64) -> Result<SampledFunction> {
    let mut u = match kind {
        InitialGuess::Torsion => invert_j(&DualDensity::from_fn(grid, |_| 1.0), p)?,
        InitialGuess::Sine => SampledFunction::from_fn(grid, |t| (std::f64::consts::PI * t).sin()),
    };
    u.pin_dirichlet();
    let scale = norm / norm_w1p(&u, p);
    Ok(&u * scale)
}

pub fn solve_annulus(f: &NonlinearitySpec, p: f64, annulus: &Annulus, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let u0 = initial_guess(opts.initial_guess, p, opts.grid, (annulus.inner() * annulus.outer()).sqrt())?;
    solve_annulus_from(f, p, annulus, opts, u0)
}

/// Runs the iteration from a caller-supplied start. Only argument errors
/// are returned as `Err`; numerical trouble is carried in the report.
pub fn solve_annulus_from(
    f: &NonlinearitySpec,
    p: f64,
    annulus: &Annulus,
    opts: &SolveOptions,
    u0: SampledFunction,
) -> Result<SolveReport> {
    opts.validate()?;
    f.validate()?;
    if u0.grid() != opts.grid {
        return Err(NehariError::GridMismatch { expected: opts.grid.len(), actual: u0.grid().len() });
    }
    let mut run = Run { f, p, annulus, opts, factors: Vec::new(), history: Vec::new() };
    let mut u = u0;

    // place the start on the Nehari manifold
    match nehari_project(&u, f, p, annulus) {
        Ok(proj) => {
            run.factors.push(proj.s_value);
            u = &u * proj.s_value;
        }
        Err(e) => return Ok(run.finish(u, None, 0, failure(0, e))),
    }

    for iter in 0..=opts.max_iters {
        let cone = check_cone(&u, p, default_tolerance(&u, p));
        if !cone.member {
            return Ok(run.finish(u, None, iter, SolveStatus::ConeViolation { iter }));
        }
        let v = match apply_t(&u, f, p) {
            Ok(v) => v,
            Err(e) => return Ok(run.finish(u, None, iter, failure(iter, e))),
        };
        let norm = norm_w1p(&u, p);
        let residual = norm_w1p(&(&u - &v), p) / norm;
        let proj = match nehari_project(&v, f, p, annulus) {
            Ok(proj) => proj,
            Err(e) => {
                run.history.push(HistoryEntry { iter, residual, s_value: f64::NAN });
                return Ok(run.finish(u, Some(v), iter, failure(iter, e)));
            }
        };
        run.factors.push(proj.s_value);
        run.history.push(HistoryEntry { iter, residual, s_value: proj.s_value });
        if !residual.is_finite() {
            let status = SolveStatus::NumericFailure { iter, message: "non-finite residual".into() };
            return Ok(run.finish(u, Some(v), iter, status));
        }
        if residual <= opts.tol_residual {
            let status = if annulus.contains_strictly(norm) {
                SolveStatus::Converged
            } else {
                SolveStatus::NotLocalized { iter }
            };
            return Ok(run.finish(u, Some(v), iter, status));
        }
        if iter == opts.max_iters {
            return Ok(run.finish(u, Some(v), iter, SolveStatus::MaxIters));
        }
        let theta = opts.damping;
        u = SampledFunction::combine(&u, 1.0 - theta, &v, theta * proj.s_value)?;
    }
    unreachable!("loop returns on its last pass")
}

struct Run<'a> {
    f: &'a NonlinearitySpec,
    p: f64,
    annulus: &'a Annulus,
    opts: &'a SolveOptions,
    factors: Vec<f64>,
    history: Vec<HistoryEntry>,
}

fn failure(iter: usize, e: NehariError) -> SolveStatus {
    match e {
        NehariError::ProjectionBracket { alpha_low, alpha_high } => SolveStatus::ProjectionFailed {
            iter,
            alpha_low,
            alpha_high,
            message: e.to_string(),
        },
        other => SolveStatus::NumericFailure { iter, message: other.to_string() },
    }
}

impl Run<'_> {
    fn finish(self, u: SampledFunction, tu: Option<SampledFunction>, iters: usize, status: SolveStatus) -> SolveReport {
        let p = self.p;
        let norm = norm_w1p(&u, p);
        let tu = tu.or_else(|| apply_t(&u, self.f, p).ok());
        let (residual, lambda_estimate) = match &tu {
            Some(v) if norm > 0.0 => (norm_w1p(&(&u - v), p) / norm, norm_w1p(v, p) / norm),
            _ => (f64::NAN, f64::NAN),
        };
        let cone = check_cone(&u, p, default_tolerance(&u, p));
        let localized = self.annulus.contains_strictly(norm);
        let converged = matches!(status, SolveStatus::Converged)
            && residual <= self.opts.tol_residual
            && localized
            && cone.member;
        SolveReport {
            solution: u,
            solution_csv: None,
            p,
            annulus: *self.annulus,
            grid_nodes: self.opts.grid.len(),
            norm_1p: norm,
            residual,
            projection_factors: self.factors,
            lambda_estimate,
            localized,
            localization_margin: (norm - self.annulus.inner()).min(self.annulus.outer() - norm),
            cone,
            iters,
            converged,
            status,
            history: self.history,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Separation {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    /// r_j - R_i.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityReport {
    pub reports: Vec<SolveReport>,
    pub hypotheses: Vec<HypothesisReport>,
    pub separations: Vec<Separation>,
    pub successes: usize,
    /// Every pair of converged solutions satisfies its separation bound.
    pub distinct: bool,
}

/// Solves in each annulus independently; reports come back in annulus order.
pub fn solve_multiplicity(
    f: &NonlinearitySpec,
    ctx: &HypothesisContext,
    annuli: &[(f64, f64)],
    opts: &SolveOptions,
    checks: &CheckOptions,
) -> Result<MultiplicityReport> {
    for w in annuli.windows(2) {
        if !(w[0].1 < w[1].0) {
            return Err(NehariError::InvalidArgument(format!(
                "annuli must be ordered and disjoint, got {:?} then {:?}",
                w[0], w[1]
            )));
        }
    }
    let annuli: Vec<Annulus> =
        annuli.iter().map(|&(r, big_r)| Annulus::new(r, big_r, ctx.beta)).collect::<Result<_>>()?;
    let p = ctx.p;
    let runs: Vec<(SolveReport, HypothesisReport)> = annuli
        .par_iter()
        .map(|a| Ok((solve_annulus(f, p, a, opts)?, check_all(ctx, f, a.inner(), a.outer(), checks)?)))
        .collect::<Result<_>>()?;
    let (reports, hypotheses): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let mut separations = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            if reports[i].converged && reports[j].converged {
                let distance = norm_w1p(&(&reports[i].solution - &reports[j].solution), p);
                let bound = annuli[j].inner() - annuli[i].outer();
                separations.push(Separation { i, j, distance, bound, holds: distance >= bound && bound > 0.0 });
            }
        }
    }
    let successes = reports.iter().filter(|r| r.converged).count();
    let distinct = separations.iter().all(|s| s.holds);
    Ok(MultiplicityReport { reports, hypotheses, separations, successes, distinct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::nehari_residual;
    use crate::plaplacian::{shoot_solve, ShootOptions};

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::power(1.0, 3.0)
    }

    fn acceptance_annulus() -> Annulus {
        Annulus::new(1.0, 120.0, 0.25).unwrap()
    }

    #[test]
    fn cubic_converges_and_matches_shooting() {
        let opts = SolveOptions::default();
        let rep = solve_annulus(&cubic(), 2.0, &acceptance_annulus(), &opts).unwrap();
        assert!(rep.converged, "{:?}", rep.status);
        assert!(rep.residual <= 1e-8);
        assert!(rep.localized && rep.cone.member);
        assert!((rep.final_projection_factor().unwrap() - 1.0).abs() < 1e-6);
        let oracle = shoot_solve(&cubic(), 2.0, (1.0, 100.0), opts.grid, &ShootOptions::default()).unwrap();
        let diff = norm_w1p(&(&rep.solution - &oracle.solution), 2.0);
        assert!(diff < 1e-4, "oracle distance {diff}");
    }

    #[test]
    fn constant_forcing_fixed_point_but_no_bracket() {
        let c = 2.0;
        let f = NonlinearitySpec::constant(c);
        let grid = Grid::default();
        let exact = SampledFunction::from_fn(grid, |t| c * t * (1.0 - t) / 2.0);
        assert!((norm_w1p(&exact, 2.0) - c / (2.0 * 3f64.sqrt())).abs() < 1e-12);
        let tu = apply_t(&exact, &f, 2.0).unwrap();
        assert!(norm_w1p(&(&tu - &exact), 2.0) < 1e-12);
        // α' increases along every ray when f is constant, so the bracket
        // signs are reversed and the solver reports it at the first iterate
        let rep = solve_annulus(&f, 2.0, &Annulus::new(0.1, 10.0, 0.2).unwrap(), &SolveOptions::default()).unwrap();
        match rep.status {
            SolveStatus::ProjectionFailed { iter: 0, alpha_low, alpha_high, .. } => {
                assert!(alpha_low < 0.0 && alpha_high > 0.0)
            }
            other => panic!("unexpected status {other:?}"),
        }
    }

    #[test]
    fn zero_forcing_fails_projection() {
        let rep = solve_annulus(&NonlinearitySpec::zero(), 2.0, &acceptance_annulus(), &SolveOptions::default()).unwrap();
        assert!(!rep.converged);
        assert!(matches!(rep.status, SolveStatus::ProjectionFailed { iter: 0, .. }));
    }

    #[test]
    fn iterates_stay_on_nehari_manifold() {
        let opts = SolveOptions { max_iters: 3, tol_residual: 1e-300, ..SolveOptions::default() };
        let rep = solve_annulus(&cubic(), 2.0, &acceptance_annulus(), &opts).unwrap();
        assert_eq!(rep.status, SolveStatus::MaxIters);
        let u = &rep.solution;
        let scale = 1.0 + norm_w1p(u, 2.0).powi(2);
        assert!(nehari_residual(u, &cubic(), 2.0).unwrap().abs() <= 1e-9 * scale);
        assert_eq!(rep.history_csv().lines().count(), 5);
    }

    #[test]
    fn options_validation() {
        let mut opts = SolveOptions { damping: 0.0, ..SolveOptions::default() };
        assert!(solve_annulus(&cubic(), 2.0, &acceptance_annulus(), &opts).is_err());
        opts.damping = 1.0;
        opts.tol_residual = 0.0;
        assert!(opts.validate().is_err());
    }

    #[test]
    fn damped_iteration_converges() {
        let opts = SolveOptions { damping: 0.7, ..SolveOptions::default() };
        let rep = solve_annulus(&cubic(), 2.0, &acceptance_annulus(), &opts).unwrap();
        assert!(rep.converged, "{:?}", rep.status);
    }

    #[test]
    fn multiplicity_independence() {
        let ctx = HypothesisContext::new(2.0, 0.2, Grid::default()).unwrap();
        // the cubic solution has norm about 6.4; only the first annulus holds it
        let rep = solve_multiplicity(&cubic(), &ctx, &[(1.0, 50.0), (60.0, 100.0)], &SolveOptions::default(), &CheckOptions::default())
            .unwrap();
        assert_eq!(rep.reports.len(), 2);
        assert!(rep.reports[0].converged);
        assert!(!rep.reports[1].converged);
        assert_eq!(rep.successes, 1);
        assert!(rep.separations.is_empty() && rep.distinct);
        assert!(solve_multiplicity(&cubic(), &ctx, &[(1.0, 5.0), (4.0, 9.0)], &SolveOptions::default(), &CheckOptions::default()).is_err());
    }
}
