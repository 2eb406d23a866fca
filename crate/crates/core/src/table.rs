use std::fmt;

use crate::error::{Error, Result};
use crate::frechet::frechet_cell_bounds;
use crate::marginal::{check_permutation, MarginalDistribution, DEFAULT_TOL};
use crate::sum::compensated_sum;

/// How a table was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Independence,
    Cograduation,
    Contrograduation,
    Greedy,
    Oracle,
    Partition,
    Explicit,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Independence => "independence",
            Provenance::Cograduation => "cograduation",
            Provenance::Contrograduation => "contrograduation",
            Provenance::Greedy => "greedy",
            Provenance::Oracle => "oracle",
            Provenance::Partition => "partition",
            Provenance::Explicit => "explicit",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A joint probability table together with the marginals it couples.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
    row_marginal: MarginalDistribution,
    col_marginal: MarginalDistribution,
    provenance: Provenance,
}

impl CouplingTable {
    /// Builds a table from nested rows and checks every invariant at
    /// [`DEFAULT_TOL`].
    pub fn new(
        cells: Vec<Vec<f64>>,
        row_marginal: MarginalDistribution,
        col_marginal: MarginalDistribution,
        provenance: Provenance,
    ) -> Result<Self> {
        let rows = cells.len();
        let cols = col_marginal.len();
        if rows != row_marginal.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows} rows for a row marginal of length {}",
                row_marginal.len()
            )));
        }
        if let Some(r) = cells.iter().position(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {r} has {} cells, expected {cols}",
                cells[r].len()
            )));
        }
        let table = Self::from_raw(
            rows,
            cols,
            cells.into_iter().flatten().collect(),
            row_marginal,
            col_marginal,
            provenance,
        );
        table.check_invariants(DEFAULT_TOL)?;
        Ok(table)
    }

    pub(crate) fn from_raw(
        rows: usize,
        cols: usize,
        cells: Vec<f64>,
        row_marginal: MarginalDistribution,
        col_marginal: MarginalDistribution,
        provenance: Provenance,
    ) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        Self { rows, cols, cells, row_marginal, col_marginal, provenance }
    }

    /// Nonnegativity, marginal reproduction and per-cell Fréchet bounds.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for (i, &c) in self.cells.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidTable(format!(
                    "cell ({}, {}) = {c}",
                    i / self.cols,
                    i % self.cols
                )));
            }
        }
        for (r, (&sum, &p)) in self.row_sums().iter().zip(self.row_marginal.probs()).enumerate() {
            if (sum - p).abs() > tol {
                return Err(Error::InvalidTable(format!("row {r} sums to {sum}, marginal is {p}")));
            }
        }
        for (s, (&sum, &p)) in self.col_sums().iter().zip(self.col_marginal.probs()).enumerate() {
            if (sum - p).abs() > tol {
                return Err(Error::InvalidTable(format!("column {s} sums to {sum}, marginal is {p}")));
            }
        }
        for r in 0..self.rows {
            for s in 0..self.cols {
                let p_row = self.row_marginal.probs()[r].min(1.0);
                let p_col = self.col_marginal.probs()[s].min(1.0);
                let (lo, hi) = frechet_cell_bounds(p_row, p_col)?;
                let c = self.get(r, s);
                if c < lo - tol || c > hi + tol {
                    return Err(Error::InvalidTable(format!(
                        "cell ({r}, {s}) = {c} outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.cells[r * self.cols + s]
    }

    /// Row-major cell values.
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.cells[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn row_marginal(&self) -> &MarginalDistribution {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &MarginalDistribution {
        &self.col_marginal
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| compensated_sum(self.row(r).iter().copied())).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|s| compensated_sum((0..self.rows).map(|r| self.get(r, s))))
            .collect()
    }

    /// Cells with strictly positive mass, in row-major order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(i, _)| (i / self.cols, i % self.cols))
            .collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c > 0.0).count()
    }

    /// Position `(i, j)` of the result holds cell `(row_order[i], col_order[j])`.
    pub fn permuted(&self, row_order: &[usize], col_order: &[usize]) -> Result<Self> {
        check_permutation(row_order, self.rows)?;
        check_permutation(col_order, self.cols)?;
        let cells = row_order
            .iter()
            .flat_map(|&r| col_order.iter().map(move |&s| (r, s)))
            .map(|(r, s)| self.get(r, s))
            .collect();
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            cells,
            self.row_marginal.permuted(row_order)?,
            self.col_marginal.permuted(col_order)?,
            self.provenance,
        ))
    }

    pub fn transposed(&self) -> Self {
        let cells = (0..self.cols)
            .flat_map(|s| (0..self.rows).map(move |r| (r, s)))
            .map(|(r, s)| self.get(r, s))
            .collect();
        Self::from_raw(
            self.cols,
            self.rows,
            cells,
            self.col_marginal.clone(),
            self.row_marginal.clone(),
            self.provenance,
        )
    }

    /// Largest cellwise absolute difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: &[f64]) -> MarginalDistribution {
        MarginalDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn accepts_valid_explicit_table() {
        let t = CouplingTable::new(
            vec![vec![0.6, 0.0], vec![0.1, 0.3]],
            m(&[0.6, 0.4]),
            m(&[0.7, 0.3]),
            Provenance::Explicit,
        )
        .unwrap();
        assert_eq!(t.support(), vec![(0, 0), (1, 0), (1, 1)]);
        assert_eq!(t.nonzero_count(), 3);
    }

    #[test]
    fn rejects_wrong_marginals() {
        let err = CouplingTable::new(
            vec![vec![0.5, 0.1], vec![0.1, 0.3]],
            m(&[0.6, 0.4]),
            m(&[0.7, 0.3]),
            Provenance::Explicit,
        );
        assert!(matches!(err, Err(Error::InvalidTable(_))));
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = CouplingTable::new(
            vec![vec![0.6], vec![0.1, 0.3]],
            m(&[0.6, 0.4]),
            m(&[0.7, 0.3]),
            Provenance::Explicit,
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn permutation_and_transpose() {
        let t = CouplingTable::new(
            vec![vec![0.6, 0.0], vec![0.1, 0.3]],
            m(&[0.6, 0.4]),
            m(&[0.7, 0.3]),
            Provenance::Explicit,
        )
        .unwrap();
        let p = t.permuted(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(p.to_nested(), vec![vec![0.3, 0.1], vec![0.0, 0.6]]);
        assert_eq!(p.row_marginal().probs(), &[0.4, 0.6]);
        p.check_invariants(1e-12).unwrap();
        let tt = t.transposed();
        assert_eq!(tt.to_nested(), vec![vec![0.6, 0.1], vec![0.0, 0.3]]);
        tt.check_invariants(1e-12).unwrap();
        assert!(t.permuted(&[0, 0], &[0, 1]).is_err());
    }
}
