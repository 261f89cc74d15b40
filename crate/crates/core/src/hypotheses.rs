//! Constants Φ, Ψ, c_p and the sufficient conditions for a positive
//! solution in an annulus: (h1) on f(r), f(Rφ(β)); (h2) monotonicity of
//! g(t) = f(t)/t^{p-1}; (h2') a lower bound on f'.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::harnack_phi;
use crate::error::{NehariError, Result};
use crate::grid::Grid;
use crate::nonlinearity::NonlinearitySpec;
use crate::plaplacian::{eigen_p, EigenPair, EIGEN_TOL};
use crate::quad::adaptive_simpson;

/// Conical annulus r <= |u|_{1,p} <= R together with the Harnack window [β, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    r: f64,
    #[serde(rename = "R")]
    big_r: f64,
    beta: f64,
}

impl Annulus {
    pub fn new(r: f64, big_r: f64, beta: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(NehariError::InvalidArgument(format!(
                "annulus needs 0 < r < R < inf, got r = {r}, R = {big_r}"
            )));
        }
        if !(beta > 0.0 && beta <= 0.25) {
            return Err(NehariError::InvalidArgument(format!("beta must lie in (0, 1/4], got {beta}")));
        }
        Ok(Self { r, big_r, beta })
    }

    pub fn inner(&self) -> f64 {
        self.r
    }

    pub fn outer(&self) -> f64 {
        self.big_r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Open-interval membership r < x < R.
    pub fn contains_strictly(&self, x: f64) -> bool {
        self.r < x && x < self.big_r
    }
}

/// Φ = ∫_β^{1/2} φ.
pub fn capital_phi(beta: f64, p: f64) -> f64 {
    adaptive_simpson(|t| harnack_phi(t, p), beta, 0.5, 1e-12)
}

/// Ψ = ∫_β^{1/2} φ².
pub fn capital_psi(beta: f64, p: f64) -> f64 {
    adaptive_simpson(|t| harnack_phi(t, p).powi(2), beta, 0.5, 1e-12)
}

/// Constants for one (p, β): the single source of c_p, Φ and Ψ used by
/// every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisContext {
    pub p: f64,
    pub beta: f64,
    pub lambda_p: f64,
    pub c_p: f64,
    #[serde(rename = "Phi")]
    pub phi_cap: f64,
    #[serde(rename = "Psi")]
    pub psi_cap: f64,
}

impl HypothesisContext {
    pub fn new(p: f64, beta: f64, grid: Grid) -> Result<Self> {
        let eigen = eigen_p(p, EIGEN_TOL, grid)?;
        Self::from_eigen(&eigen, beta)
    }

    pub fn from_eigen(eigen: &EigenPair, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(NehariError::InvalidArgument(format!("beta must lie in (0, 1/2), got {beta}")));
        }
        let p = eigen.p;
        Ok(Self {
            p,
            beta,
            lambda_p: eigen.lambda_p,
            c_p: eigen.c_p,
            phi_cap: capital_phi(beta, p),
            psi_cap: capital_psi(beta, p),
        })
    }

    pub fn phi_beta(&self) -> f64 {
        harnack_phi(self.beta, self.p)
    }

    /// Slope demanded by (h2') on an annulus with outer radius R.
    pub fn h2prime_threshold(&self, big_r: f64) -> f64 {
        (self.p - 1.0) * big_r.powf(self.p - 2.0) / (2.0 * self.psi_cap)
    }

    /// Lower and upper levels the oscillation criteria ask g to cross:
    /// 1/c_p and 1/(2Φφ(β)^{p-1}).
    pub fn oscillation_levels(&self) -> (f64, f64) {
        (1.0 / self.c_p, 1.0 / (2.0 * self.phi_cap * self.phi_beta().powf(self.p - 1.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Relative safety margin on the (h1) and (h2') thresholds.
    pub safety_margin: f64,
    pub h2_samples: usize,
    pub h2prime_samples: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { safety_margin: 0.0, h2_samples: 2000, h2prime_samples: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H1Check {
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub first_pass: bool,
    pub second_pass: bool,
    pub pass: bool,
}

/// f(r)/r^{p-1} < 1/c_p and f(Rφ(β))/R^{p-1} > 1/(2Φ).
pub fn check_h1(ctx: &HypothesisContext, f: &NonlinearitySpec, r: f64, big_r: f64, margin: f64) -> Result<H1Check> {
    let p = ctx.p;
    let first_lhs = f.eval_f(r)? / r.powf(p - 1.0);
    let first_rhs = 1.0 / ctx.c_p;
    let second_lhs = f.eval_f(big_r * ctx.phi_beta())? / big_r.powf(p - 1.0);
    let second_rhs = 1.0 / (2.0 * ctx.phi_cap);
    let first_pass = first_lhs < first_rhs * (1.0 - margin);
    let second_pass = second_lhs > second_rhs * (1.0 + margin);
    Ok(H1Check {
        first_lhs,
        first_rhs,
        second_lhs,
        second_rhs,
        first_pass,
        second_pass,
        pass: first_pass && second_pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H2Check {
    pub pass: bool,
    /// Always "sampled": monotonicity is checked on a finite grid only.
    pub method: &'static str,
    pub samples: usize,
    pub lower: f64,
    pub upper: f64,
    /// Smallest successive difference g(t_{k+1}) - g(t_k).
    pub min_increment: f64,
    pub at: f64,
}

/// Geometric grid of `samples` points on (R·1e-6, R].
pub fn h2_sample_points(big_r: f64, samples: usize) -> Vec<f64> {
    let lo = big_r * 1e-6;
    let span = (big_r / lo).ln();
    (1..=samples).map(|k| lo * (span * k as f64 / samples as f64).exp()).collect()
}

/// Strict increase of g = f/t^{p-1} on a geometric sample of (0, R].
pub fn check_h2(f: &NonlinearitySpec, p: f64, big_r: f64, samples: usize) -> Result<H2Check> {
    if samples < 1000 {
        return Err(NehariError::InvalidArgument(format!("(h2) needs at least 1000 samples, got {samples}")));
    }
    let mut pts = h2_sample_points(big_r, samples);
    *pts.last_mut().expect("nonempty") = big_r;
    check_h2_at(f, p, &pts)
}

/// Strict increase of g over the given points (sorted internally).
pub fn check_h2_at(f: &NonlinearitySpec, p: f64, points: &[f64]) -> Result<H2Check> {
    let mut pts: Vec<f64> = points.iter().copied().filter(|t| *t > 0.0).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(NehariError::InvalidArgument("(h2) needs at least two positive sample points".into()));
    }
    let g: Vec<f64> = pts.iter().map(|&t| f.eval_g(t, p)).collect::<Result<_>>()?;
    let (k, min_increment) = g
        .windows(2)
        .map(|w| w[1] - w[0])
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, d)| if d < acc.1 { (k, d) } else { acc });
    Ok(H2Check {
        pass: min_increment > 0.0,
        method: "sampled",
        samples: pts.len(),
        lower: pts[0],
        upper: pts[pts.len() - 1],
        min_increment,
        at: pts[k],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H2PrimeCheck {
    pub pass: bool,
    pub min_slope: f64,
    pub argmin: f64,
    pub threshold: f64,
    pub margin: f64,
}

/// min over [rφ(β), R] of f' against (p-1)R^{p-2}/(2Ψ).
pub fn check_h2prime(
    ctx: &HypothesisContext,
    f: &NonlinearitySpec,
    r: f64,
    big_r: f64,
    samples: usize,
    margin: f64,
) -> Result<H2PrimeCheck> {
    if !f.has_derivative() {
        return Err(NehariError::DerivativeUnavailable);
    }
    let lo = r * ctx.phi_beta();
    let samples = samples.max(2);
    let geometric = lo > 0.0 && big_r / lo > 10.0;
    let mut min_slope = f64::INFINITY;
    let mut argmin = lo;
    for k in 0..samples {
        let s = k as f64 / (samples - 1) as f64;
        let t = if geometric { lo * (big_r / lo).powf(s) } else { lo + (big_r - lo) * s };
        let d = f.eval_fprime(t)?;
        if d < min_slope {
            min_slope = d;
            argmin = t;
        }
    }
    let threshold = ctx.h2prime_threshold(big_r);
    Ok(H2PrimeCheck {
        pass: min_slope > threshold * (1.0 + margin),
        min_slope,
        argmin,
        threshold,
        margin: min_slope - threshold,
    })
}

/// Proof that (h1) and (h2') cannot hold together on an annulus.
///
/// With m = min f' on [rφ(β), R] and f >= 0, f(r) >= m r (1 - φ(β)). If the
/// slope demanded by (h2') already gives r (1 - φ(β)) · slope >= r^{p-1}/c_p,
/// then (h2') forces f(r)/r^{p-1} >= 1/c_p, contradicting (h1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfeasibilityCertificate {
    pub slope_threshold: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub chain: String,
}

pub fn h1_h2prime_infeasibility(ctx: &HypothesisContext, r: f64, big_r: f64) -> Option<InfeasibilityCertificate> {
    let slope = ctx.h2prime_threshold(big_r);
    let lhs = slope * r * (1.0 - ctx.phi_beta());
    let rhs = r.powf(ctx.p - 1.0) / ctx.c_p;
    (lhs >= rhs).then(|| InfeasibilityCertificate {
        slope_threshold: slope,
        lhs,
        rhs,
        chain: format!(
            "f(r) >= f(r phi(beta)) + min f' * r (1 - phi(beta)) > {slope:.6e} * r (1 - phi(beta)) = {lhs:.6e} \
             >= r^(p-1)/c_p = {rhs:.6e}, so (h2') forces f(r)/r^(p-1) >= 1/c_p and (h1) fails"
        ),
    })
}

/// Full hypothesis report for one (f, p, β, r, R).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub nonlinearity_index: usize,
    pub p: f64,
    pub beta: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub c_p: f64,
    #[serde(rename = "Phi")]
    pub phi_cap: f64,
    #[serde(rename = "Psi")]
    pub psi_cap: f64,
    pub h1_first_lhs: f64,
    pub h1_first_rhs: f64,
    pub h1_second_lhs: f64,
    pub h1_second_rhs: f64,
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub h2: H2Check,
    /// `None` when f' is unavailable.
    pub h2prime_pass: Option<bool>,
    pub h2prime: Option<H2PrimeCheck>,
    pub infeasibility: Option<InfeasibilityCertificate>,
    pub margins: BTreeMap<String, f64>,
}

impl HypothesisReport {
    /// (h1) together with (h2) or (h2').
    pub fn existence_certified(&self) -> bool {
        self.h1_pass && (self.h2_pass || self.h2prime_pass == Some(true))
    }
}

pub fn check_all(
    ctx: &HypothesisContext,
    f: &NonlinearitySpec,
    r: f64,
    big_r: f64,
    opts: &CheckOptions,
) -> Result<HypothesisReport> {
    let h1 = check_h1(ctx, f, r, big_r, opts.safety_margin)?;
    let h2 = check_h2(f, ctx.p, big_r, opts.h2_samples.max(1000))?;
    let h2prime = match check_h2prime(ctx, f, r, big_r, opts.h2prime_samples, opts.safety_margin) {
        Ok(c) => Some(c),
        Err(NehariError::DerivativeUnavailable) => None,
        Err(e) => return Err(e),
    };
    let infeasibility = h1_h2prime_infeasibility(ctx, r, big_r);

    let mut margins = BTreeMap::new();
    margins.insert("h1_first".to_string(), h1.first_rhs - h1.first_lhs);
    margins.insert("h1_second".to_string(), h1.second_lhs - h1.second_rhs);
    margins.insert("h2_min_increment".to_string(), h2.min_increment);
    if let Some(c) = &h2prime {
        margins.insert("h2prime".to_string(), c.margin);
        if !(h1.pass && c.pass) {
            // the condition furthest from holding, relative to its threshold
            let rel = [
                ("h1_first", (h1.first_rhs - h1.first_lhs) / h1.first_rhs),
                ("h1_second", (h1.second_lhs - h1.second_rhs) / h1.second_rhs),
                ("h2prime", c.margin / c.threshold),
            ];
            let (name, value) = rel.iter().fold(rel[0], |a, b| if b.1 < a.1 { *b } else { a });
            margins.insert(format!("binding_{name}"), value);
        }
    }

    Ok(HypothesisReport {
        nonlinearity_index: 0,
        p: ctx.p,
        beta: ctx.beta,
        r,
        big_r,
        c_p: ctx.c_p,
        phi_cap: ctx.phi_cap,
        psi_cap: ctx.psi_cap,
        h1_first_lhs: h1.first_lhs,
        h1_first_rhs: h1.first_rhs,
        h1_second_lhs: h1.second_lhs,
        h1_second_rhs: h1.second_rhs,
        h1_pass: h1.pass,
        h2_pass: h2.pass,
        h2,
        h2prime_pass: h2prime.map(|c| c.pass),
        h2prime,
        infeasibility,
        margins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConsistency {
    /// At most one pair satisfies (h1).
    Consistent,
    /// f fails (h2) on (0, R2], so the remark does not apply.
    ConsistentVacuously,
    /// Both pairs pass (h1) and f passes (h2): impossible for exact data.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub outcome: PairConsistency,
    pub first: H1Check,
    pub second: H1Check,
    pub h2: H2Check,
}

/// Checks that (h1)+(h2) are never certified on two ordered pairs.
///
/// The (h2) sample includes r1, R1φ(β), R1, r2, R2φ(β) and R2, the points
/// the contradiction argument compares.
pub fn check_pair_consistency(
    ctx: &HypothesisContext,
    f: &NonlinearitySpec,
    first: (f64, f64),
    second: (f64, f64),
    samples: usize,
) -> Result<PairReport> {
    let (r1, big_r1) = first;
    let (r2, big_r2) = second;
    if !(0.0 < r1 && r1 < big_r1 && big_r1 < r2 && r2 < big_r2) {
        return Err(NehariError::InvalidArgument(format!(
            "pairs must satisfy 0 < r1 < R1 < r2 < R2, got ({r1}, {big_r1}), ({r2}, {big_r2})"
        )));
    }
    let h1_first = check_h1(ctx, f, r1, big_r1, 0.0)?;
    let h1_second = check_h1(ctx, f, r2, big_r2, 0.0)?;
    let phi_b = ctx.phi_beta();
    let mut pts = h2_sample_points(big_r2, samples.max(1000));
    let floor = (r1 * phi_b).min(big_r2 * 1e-6) * 0.5;
    pts.extend(h2_sample_points(r1 * phi_b, 200).into_iter().filter(|t| *t > floor));
    pts.extend([r1, big_r1 * phi_b, big_r1, r2, big_r2 * phi_b, big_r2]);
    let h2 = check_h2_at(f, ctx.p, &pts)?;
    let outcome = if !h2.pass {
        PairConsistency::ConsistentVacuously
    } else if h1_first.pass && h1_second.pass {
        PairConsistency::Contradiction
    } else {
        PairConsistency::Consistent
    };
    Ok(PairReport { outcome, first: h1_first, second: h1_second, h2 })
}

/// Parameter grid for [`feasibility_sweep`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub nonlinearities: Vec<NonlinearitySpec>,
    pub p_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub annuli: Vec<(f64, f64)>,
}

/// Evaluates every hypothesis over the grid. Ordering is nonlinearity,
/// then p, then β, then annulus, regardless of evaluation order.
pub fn feasibility_sweep(grid: &SweepGrid, mesh: Grid, opts: &CheckOptions) -> Result<Vec<HypothesisReport>> {
    for &(r, big_r) in &grid.annuli {
        if !(r > 0.0 && r < big_r) {
            return Err(NehariError::InvalidArgument(format!("sweep annulus ({r}, {big_r}) is invalid")));
        }
    }
    if grid.nonlinearities.is_empty() || grid.p_values.is_empty() || grid.beta_values.is_empty() || grid.annuli.is_empty() {
        return Ok(Vec::new());
    }
    let eigen: Vec<EigenPair> =
        grid.p_values.par_iter().map(|&p| eigen_p(p, EIGEN_TOL, mesh)).collect::<Result<_>>()?;
    let mut contexts = Vec::new();
    for e in &eigen {
        for &beta in &grid.beta_values {
            contexts.push(HypothesisContext::from_eigen(e, beta)?);
        }
    }
    let mut jobs = Vec::new();
    for (fi, f) in grid.nonlinearities.iter().enumerate() {
        for ctx in &contexts {
            for &(r, big_r) in &grid.annuli {
                jobs.push((fi, f, ctx, r, big_r));
            }
        }
    }
    jobs.par_iter()
        .map(|&(fi, f, ctx, r, big_r)| {
            let mut rep = check_all(ctx, f, r, big_r, opts)?;
            rep.nonlinearity_index = fi;
            Ok(rep)
        })
        .collect()
}

/// Largest family of pairwise disjoint annuli passing (h1) for one
/// (f, p, β), ordered by radius (earliest-outer-radius greedy choice).
pub fn disjoint_h1_annuli(reports: &[HypothesisReport], nonlinearity_index: usize, p: f64, beta: f64) -> Vec<(f64, f64)> {
    let mut passing: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.nonlinearity_index == nonlinearity_index && r.p == p && r.beta == beta && r.h1_pass)
        .map(|r| (r.r, r.big_r))
        .collect();
    passing.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut chosen: Vec<(f64, f64)> = Vec::new();
    for (r, big_r) in passing {
        if chosen.last().is_none_or(|&(_, prev)| r > prev) {
            chosen.push((r, big_r));
        }
    }
    chosen
}

/// One CSV row per configuration.
pub fn sweep_csv(reports: &[HypothesisReport]) -> String {
    let mut out = String::from(
        "nonlinearity,p,beta,r,R,c_p,Phi,Psi,h1_first_lhs,h1_first_rhs,h1_second_lhs,h1_second_rhs,h1_pass,h2_pass,h2prime_pass,h1_h2prime_infeasible\n",
    );
    for r in reports {
        let h2p = match r.h2prime_pass {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        };
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{}",
            r.nonlinearity_index,
            r.p,
            r.beta,
            r.r,
            r.big_r,
            r.c_p,
            r.phi_cap,
            r.psi_cap,
            r.h1_first_lhs,
            r.h1_first_rhs,
            r.h1_second_lhs,
            r.h1_second_rhs,
            r.h1_pass,
            r.h2_pass,
            h2p,
            r.infeasibility.is_some()
        );
    }
    out
}
