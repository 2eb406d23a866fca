//! Seeded inputs shared by the benchmarks.

use entropy_wb::instances::random_marginal;
use entropy_wb::MarginalDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A marginal pair of exact sizes, reproducible from `seed`.
pub fn seeded_pair(seed: u64, rows: usize, cols: usize) -> (MarginalDistribution, MarginalDistribution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_marginal(&mut rng, rows), random_marginal(&mut rng, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_reproducible() {
        let (a, b) = seeded_pair(3, 5, 7);
        let (c, d) = seeded_pair(3, 5, 7);
        assert_eq!((a.len(), b.len()), (5, 7));
        assert_eq!(a.probs(), c.probs());
        assert_eq!(b.probs(), d.probs());
    }
}
