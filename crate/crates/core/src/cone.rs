//! The cone of nonnegative, symmetric functions that are nondecreasing on
//! [0, 1/2] and bounded below by the Harnack profile φ(t)|u|_{1,p}.

use serde::Serialize;

use crate::grid::{norm_w1p, SampledFunction};
use crate::plaplacian::{apply_j, DualDensity};

/// Harnack profile φ(t) = t (1 - 2t)^{1/(p-1)} on [0, 1/2].
pub fn harnack_phi(t: f64, p: f64) -> f64 {
    t * (1.0 - 2.0 * t).max(0.0).powf(1.0 / (p - 1.0))
}

/// Maximizer of φ on (0, 1/2).
pub fn harnack_phi_argmax(p: f64) -> f64 {
    (p - 1.0) / (2.0 * p)
}

/// Default membership tolerance 1e-8 (1 + |u|_{1,p}).
pub fn default_tolerance(u: &SampledFunction, p: f64) -> f64 {
    1e-8 * (1.0 + norm_w1p(u, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Largest violation; zero when nothing is violated.
    pub worst: f64,
}

impl Check {
    fn new(worst: f64, tol: f64) -> Self {
        Self { pass: worst <= tol, worst }
    }
}

/// Nodal cone membership report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeReport {
    pub nonneg: Check,
    pub symmetric: Check,
    pub monotone_half: Check,
    pub harnack: Check,
    pub member: bool,
    pub tol: f64,
    pub norm_1p: f64,
}

pub fn check_cone(u: &SampledFunction, p: f64, tol: f64) -> ConeReport {
    let v = u.values();
    let n = v.len();
    let mid = u.grid().mid();
    let norm = norm_w1p(u, p);

    let neg = v.iter().fold(0.0f64, |m, &x| if -x > m { -x } else { m });
    let asym = (0..n / 2).map(|i| (v[i] - v[n - 1 - i]).abs()).fold(0.0, f64::max);
    let decrease = (0..mid).map(|i| v[i] - v[i + 1]).fold(0.0, f64::max);
    let deficit = (0..=mid)
        .map(|i| harnack_phi(u.grid().node(i), p) * norm - v[i])
        .fold(0.0, f64::max);

    let nonneg = Check::new(neg, tol);
    let symmetric = Check::new(asym, tol);
    let monotone_half = Check::new(decrease, tol);
    let harnack = Check::new(deficit, tol);
    ConeReport {
        member: nonneg.pass && symmetric.pass && monotone_half.pass && harnack.pass,
        nonneg,
        symmetric,
        monotone_half,
        harnack,
        tol,
        norm_1p: norm,
    }
}

/// Outcome of checking the energetic Harnack inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HarnackOutcome {
    /// The lemma applies and u(t) >= φ(t)|u|_{1,p} - tol at every node of
    /// (0, 1/2). `min_margin` is the smallest u(t) - φ(t)|u|_{1,p}.
    Holds { min_margin: f64 },
    /// The lemma applies but the inequality is violated.
    Fails { min_margin: f64, worst_node: usize },
    /// J(u) is not nonnegative and nondecreasing on the half interval.
    NotApplicable { reason: String },
}

impl HarnackOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds { .. })
    }
}

/// Harnack check with J(u) computed by finite differences.
pub fn harnack_lemma_check(u: &SampledFunction, p: f64, tol: f64) -> HarnackOutcome {
    let ju = apply_j(u, p);
    harnack_lemma_check_with_density(u, &ju, p, tol)
}

/// Harnack check when J(u) is already known, e.g. for u = J^{-1}(h).
///
/// The hypothesis is tested on the open half interval with tolerance
/// tol (1 + max |J(u)|).
pub fn harnack_lemma_check_with_density(
    u: &SampledFunction,
    ju: &DualDensity,
    p: f64,
    tol: f64,
) -> HarnackOutcome {
    let grid = u.grid();
    let mid = grid.mid();
    let v = u.values();
    let n = v.len();

    if v.iter().any(|&x| x < -tol) {
        return HarnackOutcome::NotApplicable { reason: "u takes negative values".into() };
    }
    let asym = (0..n / 2).map(|i| (v[i] - v[n - 1 - i]).abs()).fold(0.0, f64::max);
    if asym > tol {
        return HarnackOutcome::NotApplicable { reason: format!("u is not symmetric (defect {asym:e})") };
    }

    let jv = ju.values();
    let jtol = tol * (1.0 + jv.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    if let Some(i) = (1..mid).find(|&i| jv[i] < -jtol) {
        return HarnackOutcome::NotApplicable {
            reason: format!("J(u) is negative at t = {} ({:e})", grid.node(i), jv[i]),
        };
    }
    if let Some(i) = (1..mid - 1).find(|&i| jv[i + 1] < jv[i] - jtol) {
        return HarnackOutcome::NotApplicable {
            reason: format!("J(u) decreases after t = {}", grid.node(i)),
        };
    }

    let norm = norm_w1p(u, p);
    let (worst_node, min_margin) = (1..mid)
        .map(|i| (i, v[i] - harnack_phi(grid.node(i), p) * norm))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let min_margin = if min_margin.is_finite() { min_margin } else { 0.0 };
    if min_margin >= -tol {
        HarnackOutcome::Holds { min_margin }
    } else {
        HarnackOutcome::Fails { min_margin, worst_node }
    }
}
