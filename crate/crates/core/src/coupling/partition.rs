use std::collections::HashSet;

use crate::entropy::entropy;
use crate::error::{Error, Result};
use crate::marginal::{MarginalDistribution, DEFAULT_TOL};
use crate::sum::compensated_sum;
use crate::table::{CouplingTable, Provenance};

/// Exhaustive search is attempted only up to this many fine atoms.
pub const EXHAUSTIVE_CAP: usize = 20;

/// Blocks of atoms of the finer marginal, each summing to one atom of the
/// coarser marginal.
///
/// Normally the rows are split and `targets[k]` is the column fed by
/// `blocks[k]`. When `transposed` is set the roles are swapped: the blocks
/// hold column indices and the targets are rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionWitness {
    pub blocks: Vec<Vec<usize>>,
    pub targets: Vec<usize>,
    pub transposed: bool,
}

/// Looks for a partition of the higher-entropy marginal's atoms into blocks
/// matching the other marginal's atoms.
///
/// Tries the consecutive split of both marginals sorted in decreasing order
/// first; if that fails and there are at most [`EXHAUSTIVE_CAP`] positive
/// fine atoms, runs a full block assignment search. `None` means nothing was
/// found, which is only conclusive within the exhaustive regime.
pub fn exact_partition_check(x: &MarginalDistribution, y: &MarginalDistribution) -> Option<PartitionWitness> {
    let transposed = entropy(y) > entropy(x);
    let (fine, coarse) = if transposed { (y, x) } else { (x, y) };
    let blocks = consecutive_split(fine, coarse).or_else(|| {
        let positive = fine.probs().iter().filter(|&&p| p > 0.0).count();
        (positive <= EXHAUSTIVE_CAP).then(|| exhaustive_split(fine, coarse)).flatten()
    })?;
    let witness = PartitionWitness { targets: (0..coarse.len()).collect(), blocks, transposed };
    validate_witness(x, y, &witness).ok()?;
    Some(witness)
}

fn consecutive_split(fine: &MarginalDistribution, coarse: &MarginalDistribution) -> Option<Vec<Vec<usize>>> {
    let f = fine.probs();
    let items: Vec<usize> = fine.descending_order().into_iter().filter(|&i| f[i] > 0.0).collect();
    let mut blocks = vec![Vec::new(); coarse.len()];
    let mut next = 0;
    for s in coarse.descending_order() {
        let target = coarse.probs()[s];
        let mut acc = 0.0;
        while next < items.len() && acc + f[items[next]] <= target + DEFAULT_TOL {
            acc += f[items[next]];
            blocks[s].push(items[next]);
            next += 1;
        }
        if (acc - target).abs() > DEFAULT_TOL {
            return None;
        }
    }
    if next != items.len() {
        return None;
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    Some(blocks)
}

fn exhaustive_split(fine: &MarginalDistribution, coarse: &MarginalDistribution) -> Option<Vec<Vec<usize>>> {
    let f = fine.probs();
    let items: Vec<usize> = fine.descending_order().into_iter().filter(|&i| f[i] > 0.0).collect();
    let mut search = Search {
        masses: items.iter().map(|&i| f[i]).collect(),
        capacity: coarse.probs().to_vec(),
        assignment: vec![usize::MAX; items.len()],
        dead: HashSet::new(),
    };
    if !search.run(0) {
        return None;
    }
    let mut blocks = vec![Vec::new(); coarse.len()];
    for (k, &block) in search.assignment.iter().enumerate() {
        blocks[block].push(items[k]);
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    Some(blocks)
}

struct Search {
    masses: Vec<f64>,
    capacity: Vec<f64>,
    assignment: Vec<usize>,
    /// Failed `(next item, sorted remaining capacities)` states.
    dead: HashSet<(usize, Vec<i64>)>,
}

impl Search {
    fn key(&self, i: usize) -> (usize, Vec<i64>) {
        let mut caps: Vec<i64> = self.capacity.iter().map(|c| (c / DEFAULT_TOL).round() as i64).collect();
        caps.sort_unstable();
        (i, caps)
    }

    fn run(&mut self, i: usize) -> bool {
        if i == self.masses.len() {
            return self.capacity.iter().all(|c| c.abs() <= DEFAULT_TOL);
        }
        let key = self.key(i);
        if self.dead.contains(&key) {
            return false;
        }
        let mass = self.masses[i];
        let mut tried: Vec<f64> = Vec::new();
        for k in 0..self.capacity.len() {
            let cap = self.capacity[k];
            if cap + DEFAULT_TOL < mass || tried.iter().any(|t| (t - cap).abs() <= DEFAULT_TOL) {
                continue;
            }
            tried.push(cap);
            self.capacity[k] -= mass;
            self.assignment[i] = k;
            if self.run(i + 1) {
                return true;
            }
            self.capacity[k] += mass;
        }
        self.dead.insert(key);
        false
    }
}

fn validate_witness(x: &MarginalDistribution, y: &MarginalDistribution, w: &PartitionWitness) -> Result<()> {
    let (fine, coarse) = if w.transposed { (y, x) } else { (x, y) };
    if w.blocks.len() != w.targets.len() {
        return Err(Error::InvalidWitness(format!(
            "{} blocks but {} targets",
            w.blocks.len(),
            w.targets.len()
        )));
    }
    let mut target_seen = vec![false; coarse.len()];
    let mut covered = vec![false; fine.len()];
    for (block, &target) in w.blocks.iter().zip(&w.targets) {
        if target >= coarse.len() || std::mem::replace(&mut target_seen[target], true) {
            return Err(Error::InvalidWitness(format!("target {target} out of range or repeated")));
        }
        for &i in block {
            if i >= fine.len() || std::mem::replace(&mut covered[i], true) {
                return Err(Error::InvalidWitness(format!("index {i} out of range or in two blocks")));
            }
        }
        let sum = compensated_sum(block.iter().map(|&i| fine.probs()[i]));
        let want = coarse.probs()[target];
        if (sum - want).abs() > DEFAULT_TOL {
            return Err(Error::InvalidWitness(format!("block for {target} sums to {sum}, expected {want}")));
        }
    }
    if let Some(i) = (0..fine.len()).find(|&i| !covered[i] && fine.probs()[i] > 0.0) {
        return Err(Error::InvalidWitness(format!("index {i} carries mass but is in no block")));
    }
    if let Some(t) = (0..coarse.len()).find(|&t| !target_seen[t] && coarse.probs()[t] > DEFAULT_TOL) {
        return Err(Error::InvalidWitness(format!("target {t} carries mass but has no block")));
    }
    Ok(())
}

/// Table that sends every atom of a block wholly to the block's target, so
/// the joint entropy equals the entropy of the finer marginal.
pub fn partition_coupling(
    x: &MarginalDistribution,
    y: &MarginalDistribution,
    w: &PartitionWitness,
) -> Result<CouplingTable> {
    validate_witness(x, y, w)?;
    let (m, n) = (x.len(), y.len());
    let mut cells = vec![0.0; m * n];
    for (block, &target) in w.blocks.iter().zip(&w.targets) {
        for &i in block {
            if w.transposed {
                cells[target * n + i] = y.probs()[i];
            } else {
                cells[i * n + target] = x.probs()[i];
            }
        }
    }
    Ok(CouplingTable::from_raw(m, n, cells, x.clone(), y.clone(), Provenance::Partition))
}

/// `K_k`, the binary entropy of `1/k`: how far the greedy table of a
/// geometric law of ratio `1/k` against the uniform law on `k` atoms stays
/// below the independence entropy.
pub fn geometric_gap(k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::OutOfRange { what: "k", value: k as f64 });
    }
    let k = k as f64;
    let a = 1.0 / k;
    let b = (k - 1.0) / k;
    Ok(-a * a.ln() - b * b.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::joint_entropy;
    use approx::assert_abs_diff_eq;

    fn m(p: &[f64]) -> MarginalDistribution {
        MarginalDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn finds_paired_blocks() {
        let w = exact_partition_check(&m(&[0.3, 0.3, 0.2, 0.2]), &m(&[0.6, 0.4])).unwrap();
        assert_eq!(w.blocks, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(w.targets, vec![0, 1]);
        assert!(!w.transposed);
    }

    #[test]
    fn equal_marginals_give_singletons() {
        let x = m(&[0.1, 0.4, 0.2, 0.3]);
        let w = exact_partition_check(&x, &x).unwrap();
        assert_eq!(w.blocks, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn absent_when_no_subset_matches() {
        assert_eq!(exact_partition_check(&m(&[0.5, 0.5]), &m(&[0.7, 0.3])), None);
    }

    #[test]
    fn exhaustive_search_beats_consecutive_split() {
        // Sorted consecutive split fails (0.4 + 0.3 > 0.5) but {0.4, 0.1} / {0.3, 0.2} works.
        let x = m(&[0.1, 0.2, 0.3, 0.4]);
        let y = m(&[0.5, 0.5]);
        let w = exact_partition_check(&x, &y).unwrap();
        let t = partition_coupling(&x, &y, &w).unwrap();
        t.check_invariants(1e-12).unwrap();
        assert_abs_diff_eq!(joint_entropy(&t), x.entropy(), epsilon = 1e-12);
    }

    #[test]
    fn transposes_when_columns_are_finer() {
        let x = m(&[0.6, 0.4]);
        let y = m(&[0.3, 0.3, 0.2, 0.2]);
        let w = exact_partition_check(&x, &y).unwrap();
        assert!(w.transposed);
        let t = partition_coupling(&x, &y, &w).unwrap();
        t.check_invariants(1e-12).unwrap();
        assert_abs_diff_eq!(joint_entropy(&t), y.entropy(), epsilon = 1e-12);
    }

    #[test]
    fn partition_table_entropy() {
        let x = m(&[0.3, 0.3, 0.2, 0.2]);
        let y = m(&[0.6, 0.4]);
        let w = exact_partition_check(&x, &y).unwrap();
        let t = partition_coupling(&x, &y, &w).unwrap();
        // mpmath: 1.36615884756920175441708543802
        assert_abs_diff_eq!(joint_entropy(&t), 1.366158847569202, epsilon = 1e-12);
        assert_abs_diff_eq!(joint_entropy(&t), x.entropy(), epsilon = 1e-9);
    }

    #[test]
    fn identity_partition_is_diagonal() {
        let x = m(&[0.5, 0.3, 0.2]);
        let w = PartitionWitness { blocks: vec![vec![0], vec![1], vec![2]], targets: vec![0, 1, 2], transposed: false };
        let t = partition_coupling(&x, &x, &w).unwrap();
        assert_eq!(t.support(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn rejects_mismatched_witness() {
        let x = m(&[0.3, 0.3, 0.2, 0.2]);
        let y = m(&[0.6, 0.4]);
        let bad = PartitionWitness { blocks: vec![vec![0, 2], vec![1, 3]], targets: vec![0, 1], transposed: false };
        assert!(matches!(partition_coupling(&x, &y, &bad), Err(Error::InvalidWitness(_))));
        let overlap = PartitionWitness { blocks: vec![vec![0, 1], vec![1, 2, 3]], targets: vec![0, 1], transposed: false };
        assert!(matches!(partition_coupling(&x, &y, &overlap), Err(Error::InvalidWitness(_))));
        let missing = PartitionWitness { blocks: vec![vec![0, 1]], targets: vec![0], transposed: false };
        assert!(matches!(partition_coupling(&x, &y, &missing), Err(Error::InvalidWitness(_))));
    }

    #[test]
    fn gap_constant() {
        assert_abs_diff_eq!(geometric_gap(2).unwrap(), 2f64.ln(), epsilon = 1e-15);
        // mpmath: 0.325082973391448239506550028224
        assert_abs_diff_eq!(geometric_gap(10).unwrap(), 0.325082973391448, epsilon = 1e-14);
        assert!(matches!(geometric_gap(1), Err(Error::OutOfRange { .. })));
        let mut prev = f64::INFINITY;
        for k in 2..200 {
            let g = geometric_gap(k).unwrap();
            assert!(g > 0.0 && g < prev);
            prev = g;
        }
        assert!(geometric_gap(1_000_000).unwrap() < 1e-4);
    }
}
