//! Seeded random densities and cone members for randomized trials.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Grid, SampledFunction};
use crate::plaplacian::{invert_j, DualDensity};

pub const SEED_ENV: &str = "NEHARI_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seed from `NEHARI_SEED`, or [`DEFAULT_SEED`] when unset or unparsable.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Independent generator for one trial family.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Parameters of h(t) = c0 + Σ a_k s^{e_k} with s = 2 min(t, 1 - t).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityShape {
    pub constant: f64,
    pub terms: Vec<(f64, f64)>,
}

impl DensityShape {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let constant = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) };
        let count = rng.gen_range(1..=3);
        let mut terms: Vec<(f64, f64)> =
            (0..count).map(|_| (rng.gen_range(0.0..3.0), rng.gen_range(0.2..4.0))).collect();
        if constant == 0.0 && terms.iter().all(|t| t.0 < 1e-3) {
            terms[0].0 = 1.0;
        }
        Self { constant, terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = 2.0 * t.min(1.0 - t);
        self.constant + self.terms.iter().map(|&(a, e)| a * s.powf(e)).sum::<f64>()
    }

    /// Nonnegative, symmetric and nondecreasing on [0, 1/2].
    pub fn density(&self, grid: Grid) -> DualDensity {
        DualDensity::from_fn(grid, |t| self.eval(t))
    }
}

/// J^{-1}(h) for a random admissible h, scaled by a random factor in
/// [0.1, 10]; such functions lie in the cone.
pub fn random_cone_member<R: Rng>(rng: &mut R, p: f64, grid: Grid) -> Result<SampledFunction> {
    let u = invert_j(&DensityShape::random(rng).density(grid), p)?;
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    Ok(&u * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{check_cone, default_tolerance};

    #[test]
    fn densities_are_admissible() {
        let mut rng = trial_rng(1, 0);
        let grid = Grid::new(101).unwrap();
        for _ in 0..50 {
            let h = DensityShape::random(&mut rng).density(grid);
            assert!(h.is_nonnegative(0.0));
            assert!(h.symmetry_defect() < 1e-14);
            let v = h.values();
            assert!((0..50).all(|i| v[i] <= v[i + 1]));
            assert!(v.iter().any(|&x| x > 0.0));
        }
    }

    #[test]
    fn members_lie_in_cone() {
        let mut rng = trial_rng(2, 0);
        for p in [1.5, 2.0, 3.0] {
            for _ in 0..10 {
                let u = random_cone_member(&mut rng, p, Grid::default()).unwrap();
                assert!(check_cone(&u, p, default_tolerance(&u, p)).member);
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).gen()).collect();
        let b: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).gen()).collect();
        assert_eq!(a, b);
        assert_ne!(trial_rng(7, 3).gen::<u64>(), trial_rng(7, 4).gen::<u64>());
    }
}
