//! Strict TOML run configuration.
//!
//! ```toml
//! p = 2.0
//! beta = 0.2
//! grid = 401
//! annuli = [[1.0, 120.0]]
//!
//! [nonlinearity]
//! variant = "power_sum"
//! terms = [[1.0, 3.0]]
//!
//! [solver]
//! max_iters = 500
//! tol_residual = 1e-8
//! damping = 1.0
//! initial_guess = "torsion"
//! ```
//!
//! Optional sections: `[checks]`, `[sweep]`, `[eig]`, `[harnack]`, `[oracle]`.
//! Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::grid::{Grid, DEFAULT_NODES};
use crate::hypotheses::{Annulus, CheckOptions, SweepGrid};
use crate::nonlinearity::NonlinearitySpec;
use crate::plaplacian::EIGEN_TOL;
use crate::solver::{InitialGuess, SolveOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("missing key `{key}` (required by `{command}`)")]
    Missing { key: &'static str, command: &'static str },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub tol_residual: Option<f64>,
    pub damping: Option<f64>,
    pub initial_guess: Option<InitialGuess>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    pub safety_margin: Option<f64>,
    pub h2_samples: Option<usize>,
    pub h2prime_samples: Option<usize>,
    /// Upper end of the f shape check; defaults to 2 R of the largest annulus.
    pub shape_t_max: Option<f64>,
    pub shape_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub nonlinearities: Option<Vec<NonlinearitySpec>>,
    pub p_values: Option<Vec<f64>>,
    pub beta_values: Option<Vec<f64>>,
    pub annuli: Option<Vec<(f64, f64)>>,
    /// Every pair r < R drawn from this list is added to the annuli.
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigSection {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackSection {
    /// h(t) = Σ a s^e with s = 2 min(t, 1 - t); default h = 1.
    pub density_terms: Option<Vec<(f64, f64)>>,
    /// Check a stored solution instead of J^{-1}(h).
    pub solution_csv: Option<PathBuf>,
    pub tol: Option<f64>,
    /// Extra randomized densities, seeded from NEHARI_SEED.
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub flux_bracket: Option<(f64, f64)>,
    /// Scan (0, m_max] when no bracket is given.
    pub m_max: Option<f64>,
    pub scan_samples: Option<usize>,
    pub blow_up_cap: Option<f64>,
    pub endpoint_tol: Option<f64>,
}

/// The file as written; see [`RunConfig`] for the validated form.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub p: f64,
    pub grid: Option<usize>,
    pub beta: Option<f64>,
    pub nonlinearity: Option<NonlinearitySpec>,
    #[serde(default)]
    pub annuli: Vec<(f64, f64)>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub eig: EigSection,
    #[serde(default)]
    pub harnack: HarnackSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: f64,
    pub grid: Grid,
    pub beta: Option<f64>,
    pub nonlinearity: Option<NonlinearitySpec>,
    pub annuli: Vec<(f64, f64)>,
    pub out: Option<PathBuf>,
    pub solve: SolveOptions,
    pub checks: CheckOptions,
    pub shape_t_max: Option<f64>,
    pub shape_samples: usize,
    pub sweep: SweepSection,
    pub eig: EigSection,
    pub harnack: HarnackSection,
    pub oracle: OracleSection,
    /// Directory of the config file, for resolving relative paths.
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path, grid_override: Option<usize>) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, grid_override, base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_path_buf(), message },
            other => other,
        })
    }

    pub fn parse(text: &str, grid_override: Option<usize>, base_dir: PathBuf) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: PathBuf::from("<config>"), message: e.to_string() })?;
        Self::from_raw(raw, grid_override, base_dir)
    }

    pub fn from_raw(raw: RawConfig, grid_override: Option<usize>, base_dir: PathBuf) -> Result<Self, ConfigError> {
        if !(raw.p > 1.0 && raw.p.is_finite()) {
            return Err(invalid("p", format!("must be a finite number > 1, got {}", raw.p)));
        }
        let n = grid_override.or(raw.grid).unwrap_or(DEFAULT_NODES);
        let grid = Grid::new(n).map_err(|e| invalid("grid", e.to_string()))?;
        if let Some(beta) = raw.beta {
            if !(beta > 0.0 && beta <= 0.25) {
                return Err(invalid("beta", format!("must lie in (0, 1/4], got {beta}")));
            }
        }
        if let Some(f) = &raw.nonlinearity {
            f.validate().map_err(|e| invalid("nonlinearity", e.to_string()))?;
        }
        for (k, &(r, big_r)) in raw.annuli.iter().enumerate() {
            if !(r > 0.0 && r < big_r && big_r.is_finite()) {
                return Err(invalid(&format!("annuli[{k}]"), format!("needs 0 < r < R, got [{r}, {big_r}]")));
            }
        }

        let defaults = SolveOptions::default();
        let solve = SolveOptions {
            max_iters: raw.solver.max_iters.unwrap_or(defaults.max_iters),
            tol_residual: raw.solver.tol_residual.unwrap_or(defaults.tol_residual),
            damping: raw.solver.damping.unwrap_or(defaults.damping),
            initial_guess: raw.solver.initial_guess.unwrap_or(defaults.initial_guess),
            grid,
        };
        solve.validate().map_err(|e| invalid("solver", e.to_string()))?;

        let cdef = CheckOptions::default();
        let checks = CheckOptions {
            safety_margin: raw.checks.safety_margin.unwrap_or(cdef.safety_margin),
            h2_samples: raw.checks.h2_samples.unwrap_or(cdef.h2_samples),
            h2prime_samples: raw.checks.h2prime_samples.unwrap_or(cdef.h2prime_samples),
        };
        if !(checks.safety_margin >= 0.0 && checks.safety_margin < 1.0) {
            return Err(invalid("checks.safety_margin", "must lie in [0, 1)"));
        }
        if checks.h2_samples < 1000 {
            return Err(invalid("checks.h2_samples", "must be at least 1000"));
        }
        if checks.h2prime_samples < 2 {
            return Err(invalid("checks.h2prime_samples", "must be at least 2"));
        }

        if let Some(list) = &raw.sweep.nonlinearities {
            for (k, f) in list.iter().enumerate() {
                f.validate().map_err(|e| invalid(&format!("sweep.nonlinearities[{k}]"), e.to_string()))?;
            }
        }
        if let Some(tol) = raw.eig.tol {
            if !(tol > 0.0) {
                return Err(invalid("eig.tol", "must be > 0"));
            }
        }
        if let Some(terms) = &raw.harnack.density_terms {
            if terms.iter().any(|&(a, e)| !(a >= 0.0 && e >= 0.0)) || terms.is_empty() {
                return Err(invalid("harnack.density_terms", "needs at least one [a, e] with a >= 0 and e >= 0"));
            }
        }
        if let Some((m1, m2)) = raw.oracle.flux_bracket {
            if !(m1 > 0.0 && m1 < m2) {
                return Err(invalid("oracle.flux_bracket", format!("needs 0 < m1 < m2, got [{m1}, {m2}]")));
            }
        }

        Ok(Self {
            p: raw.p,
            grid,
            beta: raw.beta,
            nonlinearity: raw.nonlinearity,
            annuli: raw.annuli,
            out: raw.out,
            solve,
            checks,
            shape_t_max: raw.checks.shape_t_max,
            shape_samples: raw.checks.shape_samples.unwrap_or(10_000),
            sweep: raw.sweep,
            eig: raw.eig,
            harnack: raw.harnack,
            oracle: raw.oracle,
            base_dir,
        })
    }

    pub fn require_beta(&self, command: &'static str) -> Result<f64, ConfigError> {
        self.beta.ok_or(ConfigError::Missing { key: "beta", command })
    }

    pub fn require_nonlinearity(&self, command: &'static str) -> Result<&NonlinearitySpec, ConfigError> {
        self.nonlinearity.as_ref().ok_or(ConfigError::Missing { key: "nonlinearity", command })
    }

    pub fn annulus_list(&self, command: &'static str) -> Result<Vec<Annulus>, ConfigError> {
        let beta = self.require_beta(command)?;
        if self.annuli.is_empty() {
            return Err(ConfigError::Missing { key: "annuli", command });
        }
        self.annuli
            .iter()
            .map(|&(r, big_r)| Annulus::new(r, big_r, beta).map_err(|e| invalid("annuli", e.to_string())))
            .collect()
    }

    pub fn eig_tol(&self) -> f64 {
        self.eig.tol.unwrap_or(EIGEN_TOL)
    }

    /// Sweep grid; missing lists fall back to the top-level values.
    pub fn sweep_grid(&self) -> Result<SweepGrid, ConfigError> {
        let s = &self.sweep;
        let nonlinearities = match &s.nonlinearities {
            Some(list) => list.clone(),
            None => self.nonlinearity.iter().cloned().collect(),
        };
        let p_values = s.p_values.clone().unwrap_or_else(|| vec![self.p]);
        let beta_values = match &s.beta_values {
            Some(list) => list.clone(),
            None => self.beta.into_iter().collect(),
        };
        for &p in &p_values {
            if !(p > 1.0 && p.is_finite()) {
                return Err(invalid("sweep.p_values", format!("every p must be > 1, got {p}")));
            }
        }
        for &b in &beta_values {
            if !(b > 0.0 && b <= 0.25) {
                return Err(invalid("sweep.beta_values", format!("every beta must lie in (0, 1/4], got {b}")));
            }
        }
        let mut annuli = s.annuli.clone().unwrap_or_else(|| if s.radii.is_some() { Vec::new() } else { self.annuli.clone() });
        if let Some(radii) = &s.radii {
            let mut sorted = radii.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            if sorted.first().is_some_and(|&r| r <= 0.0) {
                return Err(invalid("sweep.radii", "radii must be > 0"));
            }
            for (i, &r) in sorted.iter().enumerate() {
                for &big_r in &sorted[i + 1..] {
                    annuli.push((r, big_r));
                }
            }
        }
        for (k, &(r, big_r)) in annuli.iter().enumerate() {
            if !(r > 0.0 && r < big_r) {
                return Err(invalid(&format!("sweep.annuli[{k}]"), format!("needs 0 < r < R, got [{r}, {big_r}]")));
            }
        }
        Ok(SweepGrid { nonlinearities, p_values, beta_values, annuli })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"
p = 2.0
beta = 0.2
annuli = [[1.0, 120.0]]

[nonlinearity]
variant = "power_sum"
terms = [[1.0, 3.0]]
"#;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(text, None, PathBuf::new())
    }

    #[test]
    fn minimal_config() {
        let cfg = parse(SOLVE).unwrap();
        assert_eq!(cfg.grid.len(), DEFAULT_NODES);
        assert_eq!(cfg.nonlinearity, Some(NonlinearitySpec::power(1.0, 3.0)));
        assert_eq!(cfg.solve.max_iters, 500);
        assert_eq!(cfg.annulus_list("solve").unwrap().len(), 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        for bad in [
            format!("{SOLVE}\nextra = 1\n"),
            format!("{SOLVE}\n[solver]\nmax_iter = 3\n"),
            SOLVE.replace("terms = [[1.0, 3.0]]", "terms = [[1.0, 3.0]]\nscale = 2.0"),
        ] {
            assert!(matches!(parse(&bad), Err(ConfigError::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let msg = parse("p = 2.0\nbeta = \n").unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(parse(&SOLVE.replace("[[1.0, 120.0]]", "[[120.0, 1.0]]")), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse(&SOLVE.replace("beta = 0.2", "beta = 0.3")), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse(&SOLVE.replace("p = 2.0", "p = 1.0")), Err(ConfigError::Invalid { .. })));
        assert!(parse(&format!("{SOLVE}\n[solver]\ndamping = 1.5\n")).is_err());
        assert!(RunConfig::parse(SOLVE, Some(400), PathBuf::new()).is_err());
    }

    #[test]
    fn grid_override_wins() {
        let cfg = RunConfig::parse(&format!("grid = 201\n{SOLVE}"), Some(101), PathBuf::new()).unwrap();
        assert_eq!(cfg.grid.len(), 101);
        assert_eq!(cfg.solve.grid.len(), 101);
    }

    #[test]
    fn sweep_defaults_and_radii() {
        let cfg = parse(&format!("{SOLVE}\n[sweep]\nradii = [1.0, 10.0, 100.0]\n")).unwrap();
        let g = cfg.sweep_grid().unwrap();
        assert_eq!(g.nonlinearities.len(), 1);
        assert_eq!(g.p_values, vec![2.0]);
        assert_eq!(g.beta_values, vec![0.2]);
        assert_eq!(g.annuli, vec![(1.0, 10.0), (1.0, 100.0), (10.0, 100.0)]);
    }

    #[test]
    fn missing_command_keys() {
        let cfg = parse("p = 3.0\n").unwrap();
        assert!(matches!(cfg.require_beta("solve"), Err(ConfigError::Missing { key: "beta", .. })));
        assert!(cfg.require_nonlinearity("solve").is_err());
        assert!(cfg.sweep_grid().unwrap().nonlinearities.is_empty());
    }
}
