use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::entropy::neg_xlogx;
use crate::error::{Error, Result};
use crate::frechet::is_exhausted;
use crate::marginal::MarginalDistribution;
use crate::sum::compensated_sum;
use crate::table::{CouplingTable, Provenance};

/// Which line(s) a greedy step used up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exhausted {
    Row,
    Column,
    Both,
}

impl Exhausted {
    pub fn as_str(self) -> &'static str {
        match self {
            Exhausted::Row => "row",
            Exhausted::Column => "column",
            Exhausted::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub row: usize,
    pub col: usize,
    pub mass: f64,
    pub exhausted: Exhausted,
    /// Residual masses of the chosen row and column before the step.
    pub row_residual: f64,
    pub col_residual: f64,
    /// Other live rows/columns that tied with the chosen one.
    pub row_ties: Vec<usize>,
    pub col_ties: Vec<usize>,
}

/// Record of one greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    /// Rows in order of first selection; rows never selected (zero mass)
    /// follow in index order.
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
}

impl GreedyTrace {
    pub fn placed_mass(&self) -> f64 {
        compensated_sum(self.steps.iter().map(|s| s.mass))
    }

    /// Entropy of the table the trace builds.
    pub fn joint_entropy(&self) -> f64 {
        compensated_sum(self.steps.iter().map(|s| neg_xlogx(s.mass)))
    }

    /// One line per step where the maximal row or column was not unique.
    pub fn tie_log(&self) -> Vec<String> {
        let mut log = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            if !step.row_ties.is_empty() {
                log.push(format!(
                    "step {k}: rows {:?} tied with row {} at {}; chose {}",
                    step.row_ties, step.row, step.row_residual, step.row
                ));
            }
            if !step.col_ties.is_empty() {
                log.push(format!(
                    "step {k}: columns {:?} tied with column {} at {}; chose {}",
                    step.col_ties, step.col, step.col_residual, step.col
                ));
            }
        }
        log
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    mass: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: larger mass first, then lower index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.mass.total_cmp(&other.mass).then(other.index.cmp(&self.index))
    }
}

/// Residual masses of one side, with a lazily cleaned max-heap.
struct Lines {
    original: Vec<f64>,
    residual: Vec<f64>,
    alive: Vec<bool>,
    heap: BinaryHeap<Candidate>,
}

impl Lines {
    fn new(masses: &[f64]) -> Self {
        let alive: Vec<bool> = masses.iter().map(|&p| p > 0.0).collect();
        let heap = masses
            .iter()
            .enumerate()
            .filter(|(i, _)| alive[*i])
            .map(|(index, &mass)| Candidate { mass, index })
            .collect();
        Self { original: masses.to_vec(), residual: masses.to_vec(), alive, heap }
    }

    fn is_current(&self, c: &Candidate) -> bool {
        self.alive[c.index] && c.mass.to_bits() == self.residual[c.index].to_bits()
    }

    fn clean_top(&mut self) {
        while let Some(top) = self.heap.peek() {
            if self.is_current(top) {
                return;
            }
            self.heap.pop();
        }
    }

    /// The maximal live line and all other live lines with the same mass.
    fn select(&mut self) -> Option<(usize, Vec<usize>)> {
        self.clean_top();
        let best = self.heap.pop()?;
        let mut ties = Vec::new();
        let mut held = Vec::new();
        loop {
            self.clean_top();
            match self.heap.peek() {
                Some(c) if c.mass == best.mass => {
                    ties.push(c.index);
                    held.push(self.heap.pop().expect("peeked"));
                }
                _ => break,
            }
        }
        self.heap.push(best);
        self.heap.extend(held);
        Some((best.index, ties))
    }

    /// Subtracts `v`; returns whether the line is now exhausted.
    fn take(&mut self, i: usize, v: f64, drain: bool) -> bool {
        self.residual[i] = if drain { 0.0 } else { self.residual[i] - v };
        if is_exhausted(self.residual[i], self.original[i]) {
            self.alive[i] = false;
            true
        } else {
            self.heap.push(Candidate { mass: self.residual[i], index: i });
            false
        }
    }
}

/// Greedy minimum-entropy coupling.
///
/// Each step takes a row and a column of maximal residual mass (lowest index
/// on ties), places the smaller of the two residuals at their crossing and
/// drops whichever line is used up (both when they are equal). Residuals
/// are never renormalized. The loop stops when either side is exhausted, so
/// truncated marginals leave their tail unassigned.
pub fn greedy_min_coupling(
    x: &MarginalDistribution,
    y: &MarginalDistribution,
) -> (CouplingTable, GreedyTrace) {
    let trace = greedy_trace(x, y);
    let n = y.len();
    let mut cells = vec![0.0; x.len() * n];
    for s in &trace.steps {
        cells[s.row * n + s.col] += s.mass;
    }
    let table = CouplingTable::from_raw(x.len(), n, cells, x.clone(), y.clone(), Provenance::Greedy);
    (table, trace)
}

/// Runs the greedy construction without materializing the table.
///
/// Every step fills a distinct cell, so the trace alone determines the
/// table; see [`GreedyTrace::joint_entropy`].
pub fn greedy_trace(x: &MarginalDistribution, y: &MarginalDistribution) -> GreedyTrace {
    let (m, n) = (x.len(), y.len());
    let mut rows = Lines::new(x.probs());
    let mut cols = Lines::new(y.probs());
    let mut steps = Vec::with_capacity(m + n);
    let mut row_seen = vec![false; m];
    let mut col_seen = vec![false; n];
    let mut row_order = Vec::with_capacity(m);
    let mut col_order = Vec::with_capacity(n);

    while let (Some((u, row_ties)), Some((v, col_ties))) = (rows.select(), cols.select()) {
        let (ru, cv) = (rows.residual[u], cols.residual[v]);
        let mass = ru.min(cv);
        let row_done = rows.take(u, mass, ru <= cv);
        let col_done = cols.take(v, mass, cv < ru);
        let exhausted = match (row_done, col_done) {
            (true, true) => Exhausted::Both,
            (true, false) => Exhausted::Row,
            (false, true) => Exhausted::Column,
            (false, false) => unreachable!("the smaller residual is always drained"),
        };
        if !row_seen[u] {
            row_seen[u] = true;
            row_order.push(u);
        }
        if !col_seen[v] {
            col_seen[v] = true;
            col_order.push(v);
        }
        steps.push(GreedyStep {
            row: u,
            col: v,
            mass,
            exhausted,
            row_residual: ru,
            col_residual: cv,
            row_ties,
            col_ties,
        });
    }
    row_order.extend((0..m).filter(|&r| !row_seen[r]));
    col_order.extend((0..n).filter(|&s| !col_seen[s]));
    GreedyTrace { steps, row_order, col_order }
}

/// Closed-form minimizer for two binary marginals.
///
/// The cell at the crossing of the heavier row and heavier column takes the
/// smaller of their masses; the other three cells follow from the marginals.
pub fn min_entropy_2x2(x: &MarginalDistribution, y: &MarginalDistribution) -> Result<CouplingTable> {
    if x.len() != 2 || y.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2x2 marginals, got {}x{}",
            x.len(),
            y.len()
        )));
    }
    let (p, q) = (x.probs(), y.probs());
    let u = if p[1] > p[0] { 1 } else { 0 };
    let v = if q[1] > q[0] { 1 } else { 0 };
    let mut cells = [[0.0; 2]; 2];
    let corner = p[u].min(q[v]);
    cells[u][v] = corner;
    cells[u][1 - v] = (p[u] - corner).max(0.0);
    cells[1 - u][v] = (q[v] - corner).max(0.0);
    cells[1 - u][1 - v] = (p[1 - u] - cells[1 - u][v]).max(0.0);
    Ok(CouplingTable::from_raw(
        2,
        2,
        cells.iter().flatten().copied().collect(),
        x.clone(),
        y.clone(),
        Provenance::Greedy,
    ))
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
    fn equal_marginals_give_diagonal() {
        let x = m(&[0.5, 0.3, 0.2]);
        let (t, trace) = greedy_min_coupling(&x, &x);
        assert_eq!(t.support(), vec![(0, 0), (1, 1), (2, 2)]);
        assert!(trace.steps.iter().all(|s| s.exhausted == Exhausted::Both));
        assert_abs_diff_eq!(joint_entropy(&t), 1.029653014064574, epsilon = 1e-14);
    }

    #[test]
    fn uniform_four_against_uniform_two() {
        let (t, _) = greedy_min_coupling(&MarginalDistribution::uniform(4).unwrap(), &MarginalDistribution::uniform(2).unwrap());
        assert_abs_diff_eq!(joint_entropy(&t), 4f64.ln(), epsilon = 1e-14);
        t.check_invariants(1e-12).unwrap();
    }

    #[test]
    fn two_by_two_fixture() {
        let (t, trace) = greedy_min_coupling(&m(&[0.6, 0.4]), &m(&[0.7, 0.3]));
        assert_eq!(t.support(), vec![(0, 0), (1, 0), (1, 1)]);
        assert_abs_diff_eq!(t.get(0, 0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(1, 0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(1, 1), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(joint_entropy(&t), 0.897945724856780, epsilon = 1e-12);
        assert_abs_diff_eq!(trace.joint_entropy(), joint_entropy(&t), epsilon = 1e-15);
        let kinds: Vec<_> = trace.steps.iter().map(|s| (s.row, s.col, s.exhausted)).collect();
        assert_eq!(
            kinds,
            vec![(0, 0, Exhausted::Row), (1, 1, Exhausted::Column), (1, 0, Exhausted::Both)]
        );
    }

    #[test]
    fn partition_instance_fixture() {
        let (t, trace) = greedy_min_coupling(&m(&[0.3, 0.3, 0.2, 0.2]), &m(&[0.6, 0.4]));
        let expect = [((0, 0), 0.3), ((1, 1), 0.3), ((2, 0), 0.2), ((3, 0), 0.1), ((3, 1), 0.1)];
        assert_eq!(t.nonzero_count(), expect.len());
        for ((r, s), v) in expect {
            assert_abs_diff_eq!(t.get(r, s), v, epsilon = 1e-15);
        }
        // mpmath: 1.50478828368119082399601145543
        assert_abs_diff_eq!(joint_entropy(&t), 1.504788283681191, epsilon = 1e-12);
        assert_eq!(trace.steps[0].row_ties, vec![1]);
        assert_eq!(trace.tie_log().len(), 2);
    }

    #[test]
    fn ties_go_to_lowest_index_and_are_logged() {
        let (_, trace) = greedy_min_coupling(&m(&[0.25, 0.5, 0.25]), &m(&[0.5, 0.5]));
        assert_eq!((trace.steps[0].row, trace.steps[0].col), (1, 0));
        assert_eq!(trace.steps[0].col_ties, vec![1]);
        assert_eq!(trace.steps[1].row_ties, vec![2]);
        assert_eq!(trace.steps[1].row, 0);
        assert!(!trace.tie_log().is_empty());
    }

    #[test]
    fn zero_mass_lines_are_skipped() {
        let (t, trace) = greedy_min_coupling(&m(&[1.0, 0.0]), &m(&[0.7, 0.3]));
        assert_eq!(t.to_nested(), vec![vec![0.7, 0.3], vec![0.0, 0.0]]);
        assert_eq!(trace.row_order, vec![0, 1]);
    }

    #[test]
    fn each_step_takes_min_of_residual_maxima() {
        let x = m(&[0.05, 0.15, 0.35, 0.2, 0.25]);
        let y = m(&[0.3, 0.1, 0.6]);
        let (t, trace) = greedy_min_coupling(&x, &y);
        for s in &trace.steps {
            assert_eq!(s.mass, s.row_residual.min(s.col_residual));
        }
        assert_abs_diff_eq!(trace.placed_mass(), 1.0, epsilon = 1e-12);
        assert!(t.nonzero_count() <= x.len() + y.len() - 1);
        t.check_invariants(1e-12).unwrap();
    }

    #[test]
    fn closed_form_2x2() {
        let t = min_entropy_2x2(&m(&[0.6, 0.4]), &m(&[0.7, 0.3])).unwrap();
        for (a, b) in t.cells().iter().zip([0.6, 0.0, 0.1, 0.3]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let t = min_entropy_2x2(&m(&[0.5, 0.5]), &m(&[0.5, 0.5])).unwrap();
        assert_eq!(t.to_nested(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert_abs_diff_eq!(joint_entropy(&t), 2f64.ln(), epsilon = 1e-15);
        let t = min_entropy_2x2(&m(&[1.0, 0.0]), &m(&[0.7, 0.3])).unwrap();
        for (a, b) in t.cells().iter().zip([0.7, 0.3, 0.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(matches!(
            min_entropy_2x2(&m(&[0.2, 0.3, 0.5]), &m(&[0.7, 0.3])),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
