use crate::error::{Error, Result};
use crate::marginal::MarginalDistribution;
use crate::table::{CouplingTable, Provenance};

/// A line whose residual mass falls to this fraction of its original mass
/// is treated as exhausted. Absorbs the rounding dust left by repeated
/// subtraction (e.g. `1/6 - 6 * (1/36)`).
pub(crate) const EXHAUST_REL: f64 = 1e-12;

#[inline]
pub(crate) fn is_exhausted(residual: f64, original: f64) -> bool {
    residual <= EXHAUST_REL * original
}

/// Range `[max(p_row + p_col - 1, 0), min(p_row, p_col)]` a single cell can
/// take in any table with these two line masses.
pub fn frechet_cell_bounds(p_row: f64, p_col: f64) -> Result<(f64, f64)> {
    for (what, v) in [("p_row", p_row), ("p_col", p_col)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { what, value: v });
        }
    }
    Ok(((p_row + p_col - 1.0).max(0.0), p_row.min(p_col)))
}

/// The product table `p_r * q_s`, the entropy maximizer.
pub fn independence_table(x: &MarginalDistribution, y: &MarginalDistribution) -> CouplingTable {
    let cells = x
        .probs()
        .iter()
        .flat_map(|&p| y.probs().iter().map(move |&q| p * q))
        .collect();
    CouplingTable::from_raw(x.len(), y.len(), cells, x.clone(), y.clone(), Provenance::Independence)
}

/// NW corner rule on raw line masses, row-major result.
///
/// The top-left live cell takes the smaller of its two residual masses, the
/// exhausted line (or both) is dropped, and the fill continues. Stops when
/// either side runs out, so unequal totals (truncated tails) leave the
/// excess unassigned.
pub fn northwest_corner(row_masses: &[f64], col_masses: &[f64]) -> Vec<f64> {
    let (m, n) = (row_masses.len(), col_masses.len());
    let mut cells = vec![0.0; m * n];
    let mut rows = row_masses.to_vec();
    let mut cols = col_masses.to_vec();
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        if is_exhausted(rows[i], row_masses[i]) {
            i += 1;
            continue;
        }
        if is_exhausted(cols[j], col_masses[j]) {
            j += 1;
            continue;
        }
        let v = rows[i].min(cols[j]);
        cells[i * n + j] += v;
        if rows[i] <= cols[j] {
            cols[j] -= v;
            rows[i] = 0.0;
        } else {
            rows[i] -= v;
            cols[j] = 0.0;
        }
    }
    cells
}

/// Upper Fréchet bound `M`: NW corner rule on the marginals in their stored
/// order.
pub fn cograduation_table(x: &MarginalDistribution, y: &MarginalDistribution) -> CouplingTable {
    let cells = northwest_corner(x.probs(), y.probs());
    CouplingTable::from_raw(x.len(), y.len(), cells, x.clone(), y.clone(), Provenance::Cograduation)
}

/// Lower Fréchet bound `W`: NW rule against the reversed columns, then the
/// columns are put back.
pub fn contrograduation_table(x: &MarginalDistribution, y: &MarginalDistribution) -> CouplingTable {
    let n = y.len();
    let reversed: Vec<f64> = y.probs().iter().rev().copied().collect();
    let flipped = northwest_corner(x.probs(), &reversed);
    let cells = (0..x.len())
        .flat_map(|r| (0..n).map(move |s| (r, s)))
        .map(|(r, s)| flipped[r * n + (n - 1 - s)])
        .collect();
    CouplingTable::from_raw(x.len(), n, cells, x.clone(), y.clone(), Provenance::Contrograduation)
}
