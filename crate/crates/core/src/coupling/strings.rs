use crate::coupling::greedy::GreedyTrace;
use crate::error::{Error, Result};
use crate::table::CouplingTable;

/// Consecutive greedy cells sharing a row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalString {
    pub row: usize,
    /// Columns in greedy choice order.
    pub cols: Vec<usize>,
}

/// Consecutive greedy cells sharing a column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizontalString {
    pub col: usize,
    pub rows: Vec<usize>,
}

impl VerticalString {
    /// First and last column of the run.
    pub fn span(&self) -> (usize, usize) {
        (self.cols[0], *self.cols.last().expect("strings are non-empty"))
    }
}

impl HorizontalString {
    pub fn span(&self) -> (usize, usize) {
        (self.rows[0], *self.rows.last().expect("strings are non-empty"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StringDecomposition {
    pub vertical: Vec<VerticalString>,
    pub horizontal: Vec<HorizontalString>,
    /// Isolated cells that equal neither their full row nor their full
    /// column mass.
    pub residual_cells: Vec<(usize, usize)>,
}

impl StringDecomposition {
    /// Rows carrying a vertical string.
    pub fn vertical_rows(&self) -> Vec<usize> {
        self.vertical.iter().map(|v| v.row).collect()
    }

    pub fn horizontal_cols(&self) -> Vec<usize> {
        self.horizontal.iter().map(|h| h.col).collect()
    }

    pub fn string_count(&self) -> usize {
        self.vertical.len() + self.horizontal.len()
    }

    /// Every cell covered, each exactly once.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .vertical
            .iter()
            .flat_map(|v| v.cols.iter().map(move |&s| (v.row, s)))
            .chain(self.horizontal.iter().flat_map(|h| h.rows.iter().map(move |&r| (r, h.col))))
            .chain(self.residual_cells.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

fn check_trace(t: &CouplingTable, trace: &GreedyTrace) -> Result<()> {
    let mut placed = vec![0.0; t.rows() * t.cols()];
    for (k, s) in trace.steps.iter().enumerate() {
        if s.row >= t.rows() || s.col >= t.cols() {
            return Err(Error::TraceMismatch(format!("step {k} at ({}, {}) is outside the table", s.row, s.col)));
        }
        placed[s.row * t.cols() + s.col] += s.mass;
    }
    for (i, (&p, &c)) in placed.iter().zip(t.cells()).enumerate() {
        if (p - c).abs() > 1e-12 || (p > 0.0) != (c > 0.0) {
            return Err(Error::TraceMismatch(format!(
                "cell ({}, {}) holds {c} but the trace places {p}",
                i / t.cols(),
                i % t.cols()
            )));
        }
    }
    Ok(())
}

/// Splits a greedy table into runs of consecutive steps sharing a row
/// (vertical strings) or a column (horizontal strings).
///
/// An isolated step is vertical when it takes its column's full mass,
/// horizontal when it takes its row's full mass, and residual otherwise.
/// The trace is required because ties make the choice order unrecoverable
/// from the cells.
pub fn string_decomposition(t: &CouplingTable, trace: &GreedyTrace) -> Result<StringDecomposition> {
    check_trace(t, trace)?;
    Ok(decompose_trace(trace, t.row_marginal().probs(), t.col_marginal().probs()))
}

/// [`string_decomposition`] from the trace and marginals alone.
pub fn decompose_trace(trace: &GreedyTrace, row_masses: &[f64], col_masses: &[f64]) -> StringDecomposition {
    let steps = &trace.steps;
    let full = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.max(1e-300);
    let mut out = StringDecomposition::default();
    let mut i = 0;
    while i < steps.len() {
        let s = &steps[i];
        let next = steps.get(i + 1);
        if next.is_some_and(|n| n.row == s.row) {
            let mut j = i + 1;
            while j < steps.len() && steps[j].row == s.row {
                j += 1;
            }
            out.vertical.push(VerticalString { row: s.row, cols: steps[i..j].iter().map(|x| x.col).collect() });
            i = j;
        } else if next.is_some_and(|n| n.col == s.col) {
            let mut j = i + 1;
            while j < steps.len() && steps[j].col == s.col {
                j += 1;
            }
            out.horizontal.push(HorizontalString { col: s.col, rows: steps[i..j].iter().map(|x| x.row).collect() });
            i = j;
        } else {
            if full(s.mass, col_masses[s.col]) {
                out.vertical.push(VerticalString { row: s.row, cols: vec![s.col] });
            } else if full(s.mass, row_masses[s.row]) {
                out.horizontal.push(HorizontalString { col: s.col, rows: vec![s.row] });
            } else {
                out.residual_cells.push((s.row, s.col));
            }
            i += 1;
        }
    }
    out
}
