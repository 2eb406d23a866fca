//! Random marginals for sweeps and benchmarks.

use rand::Rng;
use rand_distr::Exp1;

use crate::marginal::MarginalDistribution;

/// A draw from the flat Dirichlet on `len` atoms.
///
/// # Panics
/// If `len == 0`.
pub fn random_marginal<R: Rng + ?Sized>(rng: &mut R, len: usize) -> MarginalDistribution {
    assert!(len > 0, "marginal needs at least one atom");
    loop {
        let w: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            let mut probs: Vec<f64> = w.iter().map(|v| v / total).collect();
            // Put the rounding residue on the largest atom.
            let drift = 1.0 - probs.iter().sum::<f64>();
            let top = (0..len).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).expect("nonempty");
            probs[top] += drift;
            return MarginalDistribution::new(probs).expect("normalized draw");
        }
    }
}

/// A pair of marginals with sizes drawn uniformly from `1..=max_rows` and
/// `1..=max_cols`.
pub fn random_pair<R: Rng + ?Sized>(
    rng: &mut R,
    max_rows: usize,
    max_cols: usize,
) -> (MarginalDistribution, MarginalDistribution) {
    let m = rng.random_range(1..=max_rows.max(1));
    let n = rng.random_range(1..=max_cols.max(1));
    (random_marginal(rng, m), random_marginal(rng, n))
}

/// `count` pairs drawn in sequence from `rng`.
pub fn random_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    max_rows: usize,
    max_cols: usize,
) -> Vec<(MarginalDistribution, MarginalDistribution)> {
    (0..count).map(|_| random_pair(rng, max_rows, max_cols)).collect()
}
