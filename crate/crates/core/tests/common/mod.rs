#![allow(dead_code)]

use nehari::grid::{derivative, norm_w1p, Grid, SampledFunction};
use nehari::hypotheses::{disjoint_h1_annuli, feasibility_sweep, CheckOptions, HypothesisReport, SweepGrid};
use nehari::nonlinearity::NonlinearitySpec;
use nehari::plaplacian::{find_flux_bracket, phi_p, shoot_solve, OracleSolution, ShootOptions};

pub const OSC_BETA: f64 = 0.15;

/// t (82.5 + 80 sin(0.25 ln(1 + t))): nondecreasing, with g swinging
/// between 2.5 < π and 162.5 > 1/(2Φφ(β)) at β = 0.15.
pub fn oscillator() -> NonlinearitySpec {
    NonlinearitySpec::LogOscillator { p: 2.0, a: 82.5, b: 80.0, omega: 0.25 }
}

/// Half-decade radii 10^lo .. 10^hi.
pub fn radii(lo: i32, hi: i32) -> Vec<f64> {
    (2 * lo..=2 * hi).map(|k| 10f64.powf(k as f64 / 2.0)).collect()
}

pub fn all_pairs(radii: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        for &big_r in &radii[i + 1..] {
            out.push((r, big_r));
        }
    }
    out
}

/// Sweeps the oscillator over all radius pairs and keeps a maximal
/// disjoint family of (h1)-passing annuli.
pub fn oscillator_annuli(lo: i32, hi: i32) -> (Vec<HypothesisReport>, Vec<(f64, f64)>) {
    let grid = SweepGrid {
        nonlinearities: vec![oscillator()],
        p_values: vec![2.0],
        beta_values: vec![OSC_BETA],
        annuli: all_pairs(&radii(lo, hi)),
    };
    let opts = CheckOptions { h2prime_samples: 200, ..CheckOptions::default() };
    let reports = feasibility_sweep(&grid, Grid::default(), &opts).unwrap();
    let chain = disjoint_h1_annuli(&reports, 0, 2.0, OSC_BETA);
    (reports, chain)
}

/// Shooting solution whose initial flux is bracketed near that of `u`.
pub fn oracle_near(u: &SampledFunction, f: &NonlinearitySpec, p: f64) -> OracleSolution {
    let m0 = phi_p(derivative(u).values()[0], p);
    let candidates: Vec<f64> = (0..=200).map(|k| m0 * 0.8 * 1.5f64.powf(k as f64 / 200.0)).collect();
    let opts = ShootOptions::default();
    let bracket = find_flux_bracket(f, p, &candidates, u.grid(), &opts).unwrap();
    shoot_solve(f, p, bracket, u.grid(), &opts).unwrap()
}

/// |u - oracle|_{1,p} / |oracle|_{1,p}.
pub fn relative_oracle_distance(u: &SampledFunction, f: &NonlinearitySpec, p: f64) -> f64 {
    let o = oracle_near(u, f, p);
    norm_w1p(&(u - &o.solution), p) / norm_w1p(&o.solution, p)
}
