//! The right-hand side f of -(|u'|^{p-2}u')' = f(u), with its primitive F
//! and derivative f'.

use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};
use crate::quad::adaptive_simpson_rel;

/// Relative tolerance for numeric primitives.
const PRIMITIVE_TOL: f64 = 1e-10;

/// An evaluable nonlinearity.
///
/// Serialized with a `variant` tag, e.g.
/// `{"variant": "power_sum", "terms": [[1.0, 3.0]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// f(t) = Σ a_i t^{μ_i}. A term with μ = 0 is a constant.
    PowerSum { terms: Vec<(f64, f64)> },
    /// f(t) = t^{p-1} (A + B sin(ω ln(1 + t))), A > B >= 0.
    LogOscillator { p: f64, a: f64, b: f64, omega: f64 },
    /// Piecewise-linear interpolation of `(t, f)` points, starting at t = 0.
    Table { points: Vec<(f64, f64)> },
}

/// Result of the dense-sampling shape checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    pub t_max: f64,
    pub samples: usize,
    pub nonnegative: bool,
    pub worst_negative: f64,
    pub nondecreasing: bool,
    pub worst_decrease: f64,
    pub primitive_at_zero: f64,
}

impl NonlinearitySpec {
    pub fn power(a: f64, mu: f64) -> Self {
        Self::PowerSum { terms: vec![(a, mu)] }
    }

    pub fn constant(c: f64) -> Self {
        Self::PowerSum { terms: vec![(c, 0.0)] }
    }

    pub fn zero() -> Self {
        Self::PowerSum { terms: Vec::new() }
    }

    /// Structural validation of parameters.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NehariError::InvalidArgument(msg));
        match self {
            Self::PowerSum { terms } => {
                for &(a, mu) in terms {
                    if !(a.is_finite() && a >= 0.0) {
                        return bad(format!("power_sum coefficient must be >= 0, got {a}"));
                    }
                    if !(mu.is_finite() && mu >= 0.0) {
                        return bad(format!("power_sum exponent must be >= 0, got {mu}"));
                    }
                }
            }
            Self::LogOscillator { p, a, b, omega } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return bad(format!("log_oscillator needs p > 1, got {p}"));
                }
                if !(a > b && *b >= 0.0 && a.is_finite()) {
                    return bad(format!("log_oscillator needs A > B >= 0, got A = {a}, B = {b}"));
                }
                if !omega.is_finite() {
                    return bad(format!("log_oscillator omega must be finite, got {omega}"));
                }
            }
            Self::Table { points } => {
                if points.len() < 2 {
                    return bad("table needs at least two points".into());
                }
                if points[0].0 != 0.0 {
                    return bad(format!("table must start at t = 0, starts at {}", points[0].0));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return bad("table abscissae must be strictly increasing".into());
                    }
                    if w[1].1 < w[0].1 {
                        return bad("table values must be nondecreasing".into());
                    }
                }
                if points.iter().any(|&(t, v)| !(t.is_finite() && v.is_finite() && v >= 0.0)) {
                    return bad("table values must be finite and nonnegative".into());
                }
            }
        }
        Ok(())
    }

    pub fn has_closed_form_primitive(&self) -> bool {
        !matches!(self, Self::LogOscillator { .. })
    }

    pub fn has_derivative(&self) -> bool {
        !matches!(self, Self::Table { .. })
    }

    /// f(t) for t >= 0.
    pub fn eval_f(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(NehariError::InvalidArgument(format!("f evaluated at negative t = {t}")));
        }
        Ok(match self {
            Self::PowerSum { terms } => terms.iter().map(|&(a, mu)| a * pow0(t, mu)).sum(),
            Self::LogOscillator { p, a, b, omega } => {
                t.powf(p - 1.0) * (a + b * (omega * t.ln_1p()).sin())
            }
            Self::Table { points } => table_eval(points, t)?,
        })
    }

    /// The extension of f to the whole real line used by the operators:
    /// f(t) for t >= 0 and f(0) for t < 0.
    pub fn eval_f_extended(&self, t: f64) -> Result<f64> {
        self.eval_f(t.max(0.0))
    }

    /// F(ξ) = ∫_0^ξ f.
    pub fn eval_big_f(&self, xi: f64) -> Result<f64> {
        if xi < 0.0 {
            return Err(NehariError::InvalidArgument(format!("F evaluated at negative ξ = {xi}")));
        }
        match self {
            Self::PowerSum { terms } => {
                Ok(terms.iter().map(|&(a, mu)| a * xi.powf(mu + 1.0) / (mu + 1.0)).sum())
            }
            Self::LogOscillator { .. } => {
                if xi == 0.0 {
                    return Ok(0.0);
                }
                Ok(adaptive_simpson_rel(
                    |s| self.eval_f(s).unwrap_or(f64::NAN),
                    0.0,
                    xi,
                    PRIMITIVE_TOL,
                ))
            }
            Self::Table { points } => {
                let hi = points[points.len() - 1].0;
                if xi > hi {
                    return Err(NehariError::TableOutOfRange { t: xi, lo: 0.0, hi });
                }
                let mut acc = 0.0;
                for w in points.windows(2) {
                    let (t0, f0) = w[0];
                    let (t1, f1) = w[1];
                    if xi <= t0 {
                        break;
                    }
                    let end = xi.min(t1);
                    let f_end = f0 + (f1 - f0) * (end - t0) / (t1 - t0);
                    acc += 0.5 * (f0 + f_end) * (end - t0);
                }
                Ok(acc)
            }
        }
    }

    /// g(t) = f(t)/t^{p-1}, t > 0.
    pub fn eval_g(&self, t: f64, p: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(NehariError::SingularRatio);
        }
        Ok(self.eval_f(t)? / t.powf(p - 1.0))
    }

    /// f'(t); unavailable for tables.
    pub fn eval_fprime(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(NehariError::InvalidArgument(format!("f' evaluated at negative t = {t}")));
        }
        match self {
            Self::PowerSum { terms } => Ok(terms
                .iter()
                .filter(|&&(_, mu)| mu != 0.0)
                .map(|&(a, mu)| a * mu * pow0(t, mu - 1.0))
                .sum()),
            Self::LogOscillator { p, a, b, omega } => {
                let theta = omega * t.ln_1p();
                let modulation = a + b * theta.sin();
                let dmod = b * omega * theta.cos() / (1.0 + t);
                Ok((p - 1.0) * pow0(t, p - 2.0) * modulation + pow0(t, p - 1.0) * dmod)
            }
            Self::Table { .. } => Err(NehariError::DerivativeUnavailable),
        }
    }

    /// Samples f on [0, t_max] and reports sign and monotonicity violations.
    ///
    /// The sample set is the union of a uniform and a geometric grid, each
    /// with `samples` points, so both scales of a wide range are covered.
    pub fn check_shape(&self, t_max: f64, samples: usize) -> Result<ShapeReport> {
        let ts = shape_samples(t_max, samples);
        let mut worst_negative = 0.0f64;
        let mut worst_decrease = 0.0f64;
        let mut prev: Option<f64> = None;
        for &t in &ts {
            let v = self.eval_f(t)?;
            if -v > worst_negative {
                worst_negative = -v;
            }
            if let Some(pv) = prev {
                worst_decrease = worst_decrease.max(pv - v);
            }
            prev = Some(v);
        }
        Ok(ShapeReport {
            t_max,
            samples: ts.len(),
            nonnegative: worst_negative <= 0.0,
            worst_negative,
            nondecreasing: worst_decrease <= 0.0,
            worst_decrease,
            primitive_at_zero: self.eval_big_f(0.0)?,
        })
    }
}

/// t^e with 0^0 = 1.
#[inline]
fn pow0(t: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        t.powf(e)
    }
}

fn table_eval(points: &[(f64, f64)], t: f64) -> Result<f64> {
    let lo = points[0].0;
    let hi = points[points.len() - 1].0;
    if t < lo || t > hi {
        return Err(NehariError::TableOutOfRange { t, lo, hi });
    }
    let k = points.partition_point(|&(x, _)| x <= t).clamp(1, points.len() - 1);
    let (t0, f0) = points[k - 1];
    let (t1, f1) = points[k];
    Ok(f0 + (f1 - f0) * (t - t0) / (t1 - t0))
}

fn shape_samples(t_max: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(2);
    let mut ts: Vec<f64> = (0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect();
    let lo = t_max * 1e-12;
    let ratio = (t_max / lo).ln();
    ts.extend((0..samples).map(|i| lo * (ratio * i as f64 / (samples - 1) as f64).exp()));
    ts.retain(|t| *t <= t_max);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> NonlinearitySpec {
        NonlinearitySpec::power(1.0, 3.0)
    }

    fn oscillator() -> NonlinearitySpec {
        NonlinearitySpec::LogOscillator { p: 2.0, a: 2.0, b: 1.0, omega: 5.0 }
    }

    #[test]
    fn power_sum_values() {
        assert_eq!(cubic().eval_f(2.0).unwrap(), 8.0);
        assert_eq!(cubic().eval_f(0.0).unwrap(), 0.0);
        assert_eq!(cubic().eval_big_f(2.0).unwrap(), 4.0);
        assert_eq!(cubic().eval_fprime(2.0).unwrap(), 12.0);
        assert!((cubic().eval_g(3.0, 2.0).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(NonlinearitySpec::zero().eval_big_f(3.0).unwrap(), 0.0);
        assert_eq!(NonlinearitySpec::zero().eval_f(3.0).unwrap(), 0.0);
        let lin = NonlinearitySpec::power(2.5, 1.0);
        assert_eq!(lin.eval_fprime(0.0).unwrap(), 2.5);
        assert_eq!(lin.eval_fprime(7.0).unwrap(), 2.5);
    }

    #[test]
    fn g_constant_for_homogeneous_power() {
        for p in [1.5, 2.0, 3.0] {
            let f = NonlinearitySpec::power(1.0, p - 1.0);
            for t in [0.1, 1.0, 17.0] {
                assert!((f.eval_g(t, p).unwrap() - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(cubic().eval_g(0.0, 2.0), Err(NehariError::SingularRatio));
    }

    #[test]
    fn oscillator_values() {
        let f = oscillator();
        assert_eq!(f.eval_f(0.0).unwrap(), 0.0);
        for t in [1e-6, 0.5, 3.0, 1e4] {
            assert!(f.eval_f(t).unwrap() > 0.0);
            let g = f.eval_g(t, 2.0).unwrap();
            assert!((g - (2.0 + (5.0 * t.ln_1p()).sin())).abs() < 1e-12);
        }
        assert!((f.eval_g(1e-12, 2.0).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn oscillator_derivative_matches_central_differences() {
        let f = oscillator();
        for t in [0.2, 1.0, 2.5, 10.0] {
            let eps = 1e-5;
            let fd = (f.eval_f(t + eps).unwrap() - f.eval_f(t - eps).unwrap()) / (2.0 * eps);
            assert!((fd - f.eval_fprime(t).unwrap()).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn oscillator_primitive_against_refined_quadrature() {
        let f = oscillator();
        let numeric = f.eval_big_f(1.0).unwrap();
        // composite Gauss on 2000 panels as the reference
        let panels = 2000;
        let reference: f64 = (0..panels)
            .map(|k| {
                let a = k as f64 / panels as f64;
                let b = (k + 1) as f64 / panels as f64;
                crate::quad::gauss_legendre8(|s| f.eval_f(s).unwrap(), a, b)
            })
            .sum();
        assert!((numeric - reference).abs() < 1e-8);
    }

    #[test]
    fn table_behaviour() {
        let f = NonlinearitySpec::Table { points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)] };
        f.validate().unwrap();
        assert_eq!(f.eval_f(0.5).unwrap(), 1.0);
        assert_eq!(f.eval_f(2.0).unwrap(), 2.0);
        assert!(matches!(f.eval_f(2.5), Err(NehariError::TableOutOfRange { .. })));
        assert_eq!(f.eval_fprime(0.5), Err(NehariError::DerivativeUnavailable));
        assert!((f.eval_big_f(1.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(f.eval_big_f(3.0), Err(NehariError::TableOutOfRange { .. })));
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(NonlinearitySpec::power(-1.0, 2.0).validate().is_err());
        assert!(NonlinearitySpec::LogOscillator { p: 2.0, a: 1.0, b: 1.0, omega: 1.0 }.validate().is_err());
        assert!(NonlinearitySpec::Table { points: vec![(0.0, 1.0), (1.0, 0.5)] }.validate().is_err());
        assert!(NonlinearitySpec::Table { points: vec![(0.5, 1.0), (1.0, 1.5)] }.validate().is_err());
    }

    #[test]
    fn shape_check() {
        let rep = cubic().check_shape(10.0, 10_000).unwrap();
        assert!(rep.nonnegative && rep.nondecreasing);
        assert_eq!(rep.primitive_at_zero, 0.0);
        // strong modulation breaks monotonicity
        let wild = NonlinearitySpec::LogOscillator { p: 2.0, a: 1.1, b: 1.0, omega: 20.0 };
        let rep = wild.check_shape(100.0, 10_000).unwrap();
        assert!(rep.nonnegative);
        assert!(!rep.nondecreasing);
    }

    #[test]
    fn serde_layout() {
        let json = serde_json::to_string(&cubic()).unwrap();
        assert_eq!(json, r#"{"variant":"power_sum","terms":[[1.0,3.0]]}"#);
        let back: NonlinearitySpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cubic());
        let bad = r#"{"variant":"power_sum","terms":[[1.0,3.0]],"extra":1}"#;
        assert!(serde_json::from_str::<NonlinearitySpec>(bad).is_err());
    }
}
