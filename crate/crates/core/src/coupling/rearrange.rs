use crate::error::Result;
use crate::frechet::cograduation_table;
use crate::support::staircase_order;
use crate::table::CouplingTable;

use super::greedy::GreedyTrace;

/// Outcome of comparing a permuted greedy table with the NW table of the
/// permuted marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    /// Greedy table with rows and columns reordered.
    pub permuted: CouplingTable,
    /// NW table of the reordered marginals.
    pub northwest: CouplingTable,
    pub max_abs_diff: f64,
}

impl Rearrangement {
    pub fn matches(&self, tol: f64) -> bool {
        self.max_abs_diff <= tol
    }
}

fn compare(t: &CouplingTable, row_order: Vec<usize>, col_order: Vec<usize>) -> Result<Rearrangement> {
    let permuted = t.permuted(&row_order, &col_order)?;
    let northwest = cograduation_table(permuted.row_marginal(), permuted.col_marginal());
    let max_abs_diff = permuted.max_abs_diff(&northwest).expect("same shape");
    Ok(Rearrangement { row_order, col_order, permuted, northwest, max_abs_diff })
}

/// Reorders rows and columns by the order in which the greedy run first
/// chose them and compares the result with the NW table.
pub fn trace_rearrangement(t: &CouplingTable, trace: &GreedyTrace) -> Result<Rearrangement> {
    compare(t, trace.row_order.clone(), trace.col_order.clone())
}

/// Same comparison under the staircase order of the support, when the
/// support admits one.
pub fn staircase_rearrangement(t: &CouplingTable) -> Result<Option<Rearrangement>> {
    match staircase_order(t) {
        Some((ro, co)) => compare(t, ro, co).map(Some),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::greedy_min_coupling;
    use crate::marginal::MarginalDistribution;

    fn m(p: &[f64]) -> MarginalDistribution {
        MarginalDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_rearranges() {
        let x = m(&[0.2, 0.5, 0.3]);
        let (t, trace) = greedy_min_coupling(&x, &x);
        let r = trace_rearrangement(&t, &trace).unwrap();
        assert_eq!(r.row_order, vec![1, 2, 0]);
        assert!(r.matches(1e-12));
    }

    #[test]
    fn two_by_two_rearranges() {
        let (t, trace) = greedy_min_coupling(&m(&[0.6, 0.4]), &m(&[0.7, 0.3]));
        let r = trace_rearrangement(&t, &trace).unwrap();
        assert!(r.matches(1e-12), "{:?}", r.permuted.to_nested());
        assert!(staircase_rearrangement(&t).unwrap().unwrap().matches(1e-12));
    }

    #[test]
    fn non_caterpillar_support_has_no_order() {
        // Column 3 meets all three rows, each of which owns another column.
        let (t, trace) = greedy_min_coupling(&m(&[0.35, 0.35, 0.3]), &MarginalDistribution::uniform(4).unwrap());
        assert_eq!(t.nonzero_count(), 6);
        assert!(!trace_rearrangement(&t, &trace).unwrap().matches(1e-12));
        assert!(staircase_rearrangement(&t).unwrap().is_none());
    }
}
