//! Randomized checks shared by the test suites: operator symmetry, positive
//! definiteness, and small dense helpers.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Outcome of the randomized symmetry / positivity probe.
#[derive(Debug, Clone)]
pub struct SpdProbe {
    pub max_symmetry_violation: f64,
    pub min_quadratic_form: f64,
}

/// Probes `op` (expected symmetric positive definite) with `pairs` random
/// vector pairs: checks `⟨Bu, v⟩ = ⟨u, Bv⟩` relatively and `⟨Bu, u⟩ > 0`.
pub fn probe_spd<F>(dim: usize, op: F, pairs: usize, seed: u64) -> SpdProbe
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_sym = 0.0f64;
    let mut min_quad = f64::INFINITY;
    for _ in 0..pairs {
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bu = op(&u);
        let bv = op(&v);
        let buv: f64 = bu.iter().zip(&v).map(|(a, b)| a * b).sum();
        let ubv: f64 = u.iter().zip(&bv).map(|(a, b)| a * b).sum();
        let scale = buv.abs().max(ubv.abs()).max(1e-300);
        max_sym = max_sym.max((buv - ubv).abs() / scale);
        let buu: f64 = bu.iter().zip(&u).map(|(a, b)| a * b).sum();
        min_quad = min_quad.min(buu);
    }
    SpdProbe { max_symmetry_violation: max_sym, min_quadratic_form: min_quad }
}

/// Asserts the probe with the tolerances used throughout the crate.
pub fn assert_spd<F>(dim: usize, op: F, pairs: usize, seed: u64, sym_tol: f64)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let probe = probe_spd(dim, op, pairs, seed);
    assert!(
        probe.max_symmetry_violation <= sym_tol,
        "symmetry violation {} exceeds {}",
        probe.max_symmetry_violation,
        sym_tol
    );
    assert!(
        probe.min_quadratic_form > 0.0,
        "quadratic form not positive: {}",
        probe.min_quadratic_form
    );
}

/// Uniform random vector in `[-1, 1]^dim` from a seeded generator.
pub fn random_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
