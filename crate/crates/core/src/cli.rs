//! Command-line front end: `nehari <solve|check|sweep|eig|harnack|oracle> --config PATH`.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{check_cone, default_tolerance, harnack_lemma_check, harnack_lemma_check_with_density, ConeReport, HarnackOutcome};
use crate::config::{ConfigError, RunConfig};
use crate::error::NehariError;
use crate::grid::{norm_w1p, SampledFunction};
use crate::hypotheses::{
    check_all, check_pair_consistency, feasibility_sweep, sweep_csv, HypothesisContext, HypothesisReport,
    PairConsistency, PairReport,
};
use crate::nonlinearity::{NonlinearitySpec, ShapeReport};
use crate::plaplacian::{eigen_p_with_limit, invert_j, scan_flux_bracket, shoot_solve, ShootOptions, EIGEN_MAX_ITERS};
use crate::sampling::{seed_from_env, trial_rng, DensityShape};
use crate::solver::{solve_annulus, solve_multiplicity, SolveReport};

#[derive(Debug, Parser)]
#[command(name = "nehari", version, about = "Positive solutions of the 1-D Dirichlet p-Laplacian in conical annuli")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory [default: ./out, or `out` from the config].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override the grid node count.
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check hypotheses, then solve in each configured annulus.
    Solve(CommonArgs),
    /// Evaluate (h1), (h2), (h2') and pair consistency.
    Check(CommonArgs),
    /// Hypothesis sweep over nonlinearities, p, beta and annuli.
    Sweep(CommonArgs),
    /// First eigenpair of the p-Laplacian.
    Eig(CommonArgs),
    /// Harnack inequality for J^{-1}(h) or a stored solution.
    Harnack(CommonArgs),
    /// Shooting solution of the boundary value problem.
    Oracle(CommonArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Self::Solve(a) | Self::Check(a) | Self::Sweep(a) | Self::Eig(a) | Self::Harnack(a) | Self::Oracle(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Success = 0,
    Config = 1,
    Hypothesis = 2,
    NonConvergence = 3,
    Numeric = 4,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] NehariError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            Self::Config(_) => Exit::Config,
            Self::Numeric(
                NehariError::EigenNotConverged { .. } | NehariError::NoFluxBracket { .. } | NehariError::RootNotConverged { .. },
            ) => Exit::NonConvergence,
            Self::Numeric(_) | Self::Io { .. } => Exit::Numeric,
        }
    }
}

struct Output {
    dir: PathBuf,
    quiet: bool,
}

impl Output {
    fn new(dir: PathBuf, quiet: bool) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(Self { dir, quiet })
    }

    fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value).expect("report types serialize");
        body.push('\n');
        self.text(name, &body)
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Config.code() } else { Exit::Success.code() };
        }
    };
    match run(&cli.command) {
        Ok(exit) => exit.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().code()
        }
    }
}

pub fn run(command: &Command) -> Result<Exit, CliError> {
    let args = command.common();
    let cfg = RunConfig::load(&args.config, args.grid)?;
    let dir = args.out.clone().or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p))).unwrap_or_else(|| PathBuf::from("./out"));
    let out = Output::new(dir, args.quiet)?;
    match command {
        Command::Solve(_) => cmd_solve(&cfg, &out),
        Command::Check(_) => cmd_check(&cfg, &out),
        Command::Sweep(_) => cmd_sweep(&cfg, &out),
        Command::Eig(_) => cmd_eig(&cfg, &out),
        Command::Harnack(_) => cmd_harnack(&cfg, &out),
        Command::Oracle(_) => cmd_oracle(&cfg, &out),
    }
}

fn shape_check(cfg: &RunConfig, f: &NonlinearitySpec) -> Result<ShapeReport, CliError> {
    let largest = cfg.annuli.iter().map(|a| a.1).fold(0.0, f64::max);
    let t_max = cfg.shape_t_max.unwrap_or(if largest > 0.0 { 2.0 * largest } else { 1.0 });
    Ok(f.check_shape(t_max, cfg.shape_samples)?)
}

#[derive(Serialize)]
struct HypothesisFile<'a> {
    shape: &'a ShapeReport,
    reports: &'a [HypothesisReport],
    pairs: &'a [PairReport],
}

#[derive(Serialize)]
struct MultiplicityFile<'a> {
    reports: &'a [SolveReport],
    separations: &'a [crate::solver::Separation],
    successes: usize,
    distinct: bool,
}

fn cmd_solve(cfg: &RunConfig, out: &Output) -> Result<Exit, CliError> {
    let f = cfg.require_nonlinearity("solve")?;
    let annuli = cfg.annulus_list("solve")?;
    let beta = cfg.require_beta("solve")?;
    let shape = shape_check(cfg, f)?;
    let ctx = HypothesisContext::new(cfg.p, beta, cfg.grid)?;

    let (mut reports, hyps, separations, distinct) = if annuli.len() == 1 {
        let a = &annuli[0];
        let hyp = check_all(&ctx, f, a.inner(), a.outer(), &cfg.checks)?;
        (vec![solve_annulus(f, cfg.p, a, &cfg.solve)?], vec![hyp], Vec::new(), true)
    } else {
        let pairs: Vec<(f64, f64)> = annuli.iter().map(|a| (a.inner(), a.outer())).collect();
        let m = solve_multiplicity(f, &ctx, &pairs, &cfg.solve, &cfg.checks)?;
        (m.reports, m.hypotheses, m.separations, m.distinct)
    };

    let single = reports.len() == 1;
    for (k, rep) in reports.iter_mut().enumerate() {
        let (csv, hist) = if single {
            ("solution.csv".to_string(), "residual_history.csv".to_string())
        } else {
            (format!("solution_{k}.csv"), format!("residual_history_{k}.csv"))
        };
        out.text(&csv, &rep.solution.to_csv_string())?;
        out.text(&hist, &rep.history_csv())?;
        rep.solution_csv = Some(csv);
    }
    out.json("hypotheses.json", &HypothesisFile { shape: &shape, reports: &hyps, pairs: &[] })?;
    if single {
        out.json("solve.json", &reports[0])?;
    } else {
        let successes = reports.iter().filter(|r| r.converged).count();
        out.json("multiplicity.json", &MultiplicityFile { reports: &reports, separations: &separations, successes, distinct })?;
    }

    let certified = shape.nonnegative && shape.nondecreasing && hyps.iter().all(HypothesisReport::existence_certified);
    for (rep, hyp) in reports.iter().zip(&hyps) {
        out.say(format!(
            "annulus ({:e}, {:e}): hypotheses {}, {:?} after {} iterations, |u| = {:.10e}, residual {:.3e}",
            rep.annulus.inner(),
            rep.annulus.outer(),
            if hyp.existence_certified() { "certified" } else { "not certified" },
            rep.status,
            rep.iters,
            rep.norm_1p,
            rep.residual
        ));
    }
    Ok(if !certified {
        Exit::Hypothesis
    } else if !(reports.iter().all(|r| r.converged) && distinct) {
        Exit::NonConvergence
    } else {
        Exit::Success
    })
}

fn cmd_check(cfg: &RunConfig, out: &Output) -> Result<Exit, CliError> {
    let f = cfg.require_nonlinearity("check")?;
    let annuli = cfg.annulus_list("check")?;
    let beta = cfg.require_beta("check")?;
    let shape = shape_check(cfg, f)?;
    let ctx = HypothesisContext::new(cfg.p, beta, cfg.grid)?;
    let reports: Vec<HypothesisReport> = annuli
        .iter()
        .map(|a| check_all(&ctx, f, a.inner(), a.outer(), &cfg.checks))
        .collect::<Result<_, _>>()?;
    let mut pairs = Vec::new();
    for w in annuli.windows(2) {
        if w[0].outer() < w[1].inner() {
            pairs.push(check_pair_consistency(
                &ctx,
                f,
                (w[0].inner(), w[0].outer()),
                (w[1].inner(), w[1].outer()),
                cfg.checks.h2_samples,
            )?);
        }
    }
    out.json("hypotheses.json", &HypothesisFile { shape: &shape, reports: &reports, pairs: &pairs })?;
    out.text("hypotheses.csv", &sweep_csv(&reports))?;
    for r in &reports {
        out.say(format!(
            "annulus ({:e}, {:e}): h1 {} h2 {} h2' {}",
            r.r,
            r.big_r,
            r.h1_pass,
            r.h2_pass,
            r.h2prime_pass.map_or("n/a".to_string(), |b| b.to_string())
        ));
    }
    if pairs.iter().any(|p| p.outcome == PairConsistency::Contradiction) {
        out.say("pair consistency: contradiction (numerical inconsistency in the inputs)");
        return Ok(Exit::Numeric);
    }
    let ok = shape.nonnegative && shape.nondecreasing && reports.iter().all(HypothesisReport::existence_certified);
    Ok(if ok { Exit::Success } else { Exit::Hypothesis })
}

fn cmd_sweep(cfg: &RunConfig, out: &Output) -> Result<Exit, CliError> {
    let grid = cfg.sweep_grid()?;
    let reports = feasibility_sweep(&grid, cfg.grid, &cfg.checks)?;
    out.json("sweep.json", &reports)?;
    out.text("sweep.csv", &sweep_csv(&reports))?;
    let certified = reports.iter().filter(|r| r.existence_certified()).count();
    let h1 = reports.iter().filter(|r| r.h1_pass).count();
    out.say(format!("{} configurations, {h1} pass (h1), {certified} certified", reports.len()));
    Ok(Exit::Success)
}

fn cmd_eig(cfg: &RunConfig, out: &Output) -> Result<Exit, CliError> {
    let eig = eigen_p_with_limit(cfg.p, cfg.eig_tol(), cfg.grid, cfg.eig.max_iters.unwrap_or(EIGEN_MAX_ITERS))?;
    out.json("eigen.json", &eig.summary())?;
    out.text("eigenfunction.csv", &eig.eigenfunction.to_csv_string())?;
    out.say(format!("p = {}: lambda_p = {:.12e}, c_p = {:.12e}", eig.p, eig.lambda_p, eig.c_p));
    Ok(Exit::Success)
}

#[derive(Serialize)]
struct HarnackTrial {
    index: usize,
    holds: bool,
    outcome: HarnackOutcome,
}

#[derive(Serialize)]
struct HarnackFile {
    p: f64,
    source: String,
    tol: f64,
    outcome: HarnackOutcome,
    cone: ConeReport,
    seed: Option<u64>,
    trials: Vec<HarnackTrial>,
}

fn cmd_harnack(cfg: &RunConfig, out: &Output) -> Result<Exit, CliError> {
    let p = cfg.p;
    let h = &cfg.harnack;
    let (u, source, outcome_for) = match &h.solution_csv {
        Some(path) => {
            let path = cfg.resolve(path);
            let file = fs::File::open(&path).map_err(|e| ConfigError::Io { path: path.clone(), source: e })?;
            let u = SampledFunction::read_csv(BufReader::new(file))
                .map_err(|e| ConfigError::Invalid { key: "harnack.solution_csv".into(), message: e.to_string() })?;
            (u, path.display().to_string(), None)
        }
        None => {
            let terms = h.density_terms.clone().unwrap_or_else(|| vec![(1.0, 0.0)]);
            let shape = DensityShape { constant: 0.0, terms };
            let density = shape.density(cfg.grid);
            let u = invert_j(&density, p)?;
            (u, "inverse of configured density".to_string(), Some(density))
        }
    };
    let tol = h.tol.unwrap_or_else(|| default_tolerance(&u, p));
    let outcome = match &outcome_for {
        Some(density) => harnack_lemma_check_with_density(&u, density, p, tol),
        None => harnack_lemma_check(&u, p, tol),
    };
    let cone = check_cone(&u, p, tol);

    let count = h.trials.unwrap_or(0);
    let seed = (count > 0).then(seed_from_env);
    let mut trials = Vec::with_capacity(count);
    if let Some(seed) = seed {
        let mut rng = trial_rng(seed, 3);
        for index in 0..count {
            let density = DensityShape::random(&mut rng).density(cfg.grid);
            let v = invert_j(&density, p)?;
            let outcome = harnack_lemma_check_with_density(&v, &density, p, default_tolerance(&v, p));
            trials.push(HarnackTrial { index, holds: outcome.holds(), outcome });
        }
    }
    let all = outcome.holds() && trials.iter().all(|t| t.holds);
    out.text("harnack_solution.csv", &u.to_csv_string())?;
    out.say(format!(
        "harnack: {}, cone member {}, {} of {} random trials hold",
        if outcome.holds() { "holds" } else { "does not hold" },
        cone.member,
        trials.iter().filter(|t| t.holds).count(),
        trials.len()
    ));
    out.json("harnack.json", &HarnackFile { p, source, tol, outcome, cone, seed, trials })?;
    Ok(if all { Exit::Success } else { Exit::Hypothesis })
}

#[derive(Serialize)]
struct OracleFile {
    p: f64,
    bracket: (f64, f64),
    flux: f64,
    endpoint_residual: f64,
    norm_1p: f64,
    solution_csv: String,
}

fn cmd_oracle(cfg: &RunConfig, out: &Output) -> Result<Exit, CliError> {
    let f = cfg.require_nonlinearity("oracle")?;
    let o = &cfg.oracle;
    let defaults = ShootOptions::default();
    let opts = ShootOptions {
        blow_up_cap: o.blow_up_cap.unwrap_or(defaults.blow_up_cap),
        endpoint_tol: o.endpoint_tol.unwrap_or(defaults.endpoint_tol),
    };
    let bracket = match (o.flux_bracket, o.m_max) {
        (Some(b), _) => b,
        (None, Some(m_max)) => scan_flux_bracket(f, cfg.p, m_max, o.scan_samples.unwrap_or(200), cfg.grid, &opts)?,
        (None, None) => return Err(ConfigError::Missing { key: "oracle.flux_bracket", command: "oracle" }.into()),
    };
    let sol = shoot_solve(f, cfg.p, bracket, cfg.grid, &opts)?;
    let norm = norm_w1p(&sol.solution, cfg.p);
    out.text("oracle_solution.csv", &sol.solution.to_csv_string())?;
    out.json(
        "oracle.json",
        &OracleFile {
            p: cfg.p,
            bracket,
            flux: sol.flux,
            endpoint_residual: sol.endpoint_residual,
            norm_1p: norm,
            solution_csv: "oracle_solution.csv".into(),
        },
    )?;
    out.say(format!("flux {:.12e}, |u| = {:.12e}, endpoint residual {:.3e}", sol.flux, norm, sol.endpoint_residual));
    Ok(Exit::Success)
}

/// Loads a solution CSV written by `solve`.
pub fn load_solution(path: &Path) -> Result<SampledFunction, CliError> {
    let file = fs::File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(SampledFunction::read_csv(BufReader::new(file))?)
}
