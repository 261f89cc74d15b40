mod common;

use common::{oscillator, oscillator_annuli, relative_oracle_distance, OSC_BETA};
use nehari::grid::Grid;
use nehari::hypotheses::{CheckOptions, HypothesisContext};
use nehari::solver::{solve_multiplicity, SolveOptions};

#[test]
fn oscillator_is_admissible() {
    let shape = oscillator().check_shape(1e40, 20_000).unwrap();
    assert!(shape.nonnegative && shape.nondecreasing);
}

#[test]
fn two_annuli_two_solutions() {
    let (reports, chain) = oscillator_annuli(-3, 27);
    assert!(chain.len() >= 2, "sweep found {chain:?}");
    assert!(reports.iter().all(|r| r.infeasibility.is_some()));
    let ctx = HypothesisContext::new(2.0, OSC_BETA, Grid::default()).unwrap();
    let f = oscillator();
    let m = solve_multiplicity(&f, &ctx, &chain[..2], &SolveOptions::default(), &CheckOptions::default()).unwrap();
    assert_eq!(m.successes, 2);
    assert!(m.distinct);
    assert_eq!(m.separations.len(), 1);
    for (rep, hyp) in m.reports.iter().zip(&m.hypotheses) {
        assert!(rep.converged && rep.localized && rep.cone.member);
        assert!(hyp.h1_pass);
        assert!(relative_oracle_distance(&rep.solution, &f, 2.0) < 1e-3);
    }
}

#[test]
fn three_annuli_strictly_increasing_norms() {
    let (_, chain) = oscillator_annuli(-3, 40);
    assert!(chain.len() >= 3, "sweep found {chain:?}");
    let ctx = HypothesisContext::new(2.0, OSC_BETA, Grid::default()).unwrap();
    let m = solve_multiplicity(&oscillator(), &ctx, &chain[..3], &SolveOptions::default(), &CheckOptions::default())
        .unwrap();
    assert_eq!(m.successes, 3);
    assert!(m.distinct);
    let norms: Vec<f64> = m.reports.iter().map(|r| r.norm_1p).collect();
    assert!(norms.windows(2).all(|w| w[0] < w[1]), "{norms:?}");
}
