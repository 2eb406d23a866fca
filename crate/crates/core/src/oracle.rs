//! Exact entropy minimization for small tables.
//!
//! Joint entropy is concave in the cells, and the couplings of two finite
//! marginals form a polytope (the transportation polytope). A concave
//! function attains its minimum over a polytope at an extreme point: any
//! other point is a convex combination of vertices, and concavity puts its
//! value at or above the smallest vertex value. So the minimum is found by
//! enumerating vertices.
//!
//! Vertices are the tables whose support is a forest in the bipartite
//! row/column graph. Every such table can be produced by repeatedly picking
//! some live cell, giving it the smaller of its two residual line masses and
//! retiring the exhausted line: a forest always has a leaf line, whose only
//! cell must carry that line's entire residual. The enumeration explores all
//! such pick sequences, memoized on the cells placed so far together with
//! the lines already retired. The placed cells alone are not enough: the
//! same cells placed in another order can retire different lines.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::coupling::greedy_min_coupling;
use crate::entropy::{entropy_of, joint_entropy};
use crate::error::{Error, Result};
use crate::frechet::{frechet_cell_bounds, is_exhausted};
use crate::marginal::MarginalDistribution;
use crate::table::{CouplingTable, Provenance};

/// Largest `rows * cols` accepted by the enumeration. Cost grows quickly:
/// 5x5 takes well under a second in release builds, 6x6 about a minute.
pub const MAX_CELLS: usize = 36;

/// Values within this of zero are accepted as zero when solving a support.
const FEASIBILITY_TOL: f64 = 1e-12;

/// Vertices of the transportation polytope, sorted by support (the sorted
/// list of row-major cell indices, compared lexicographically).
#[derive(Debug, Clone)]
pub struct VertexSet {
    pub vertices: Vec<CouplingTable>,
}

impl VertexSet {
    pub fn count(&self) -> usize {
        self.vertices.len()
    }
}

fn check_size(x: &MarginalDistribution, y: &MarginalDistribution) -> Result<()> {
    let (m, n) = (x.len(), y.len());
    if m * n > MAX_CELLS {
        return Err(Error::TooLarge { rows: m, cols: n, cap: MAX_CELLS });
    }
    if (x.total() - y.total()).abs() > FEASIBILITY_TOL {
        return Err(Error::BadParams(format!(
            "marginal totals differ ({} vs {})",
            x.total(),
            y.total()
        )));
    }
    Ok(())
}

struct Enumerator<'a> {
    rows: &'a [f64],
    cols: &'a [f64],
    visited: HashSet<(u64, u64)>,
    found: BTreeMap<Vec<u8>, u64>,
}

impl Enumerator<'_> {
    /// Bitmask of exhausted rows (low bits) and columns (above them).
    fn retired(&self, row_res: &[f64], col_res: &[f64]) -> u64 {
        let m = self.rows.len();
        let rows = (0..m).filter(|&i| is_exhausted(row_res[i], self.rows[i])).fold(0u64, |a, i| a | 1 << i);
        (0..self.cols.len())
            .filter(|&j| is_exhausted(col_res[j], self.cols[j]))
            .fold(rows, |a, j| a | 1 << (m + j))
    }

    fn explore(&mut self, placed: u64, row_res: &mut [f64], col_res: &mut [f64]) {
        let n = self.cols.len();
        let live_rows: Vec<usize> =
            (0..self.rows.len()).filter(|&i| !is_exhausted(row_res[i], self.rows[i])).collect();
        let live_cols: Vec<usize> = (0..n).filter(|&j| !is_exhausted(col_res[j], self.cols[j])).collect();
        if live_rows.is_empty() || live_cols.is_empty() {
            let key: Vec<u8> = (0..64u8).filter(|&b| placed >> b & 1 == 1).collect();
            self.found.insert(key, placed);
            return;
        }
        for &i in &live_rows {
            for &j in &live_cols {
                let next = placed | 1u64 << (i * n + j);
                let (r, c) = (row_res[i], col_res[j]);
                let v = r.min(c);
                if r <= c {
                    row_res[i] = 0.0;
                    col_res[j] = c - v;
                } else {
                    col_res[j] = 0.0;
                    row_res[i] = r - v;
                }
                if self.visited.insert((next, self.retired(row_res, col_res))) {
                    self.explore(next, row_res, col_res);
                }
                row_res[i] = r;
                col_res[j] = c;
            }
        }
    }
}

/// Solves the unique table supported on a forest by peeling leaf lines,
/// lowest row index first, then lowest column index.
fn solve_support(x: &MarginalDistribution, y: &MarginalDistribution, support: &[u8]) -> Result<Vec<f64>> {
    let (m, n) = (x.len(), y.len());
    let mut row_res = x.probs().to_vec();
    let mut col_res = y.probs().to_vec();
    let mut cells = vec![0.0; m * n];
    let mut open: Vec<(usize, usize)> = support.iter().map(|&k| (k as usize / n, k as usize % n)).collect();
    while !open.is_empty() {
        let mut row_count = vec![0usize; m];
        let mut col_count = vec![0usize; n];
        for &(r, s) in &open {
            row_count[r] += 1;
            col_count[s] += 1;
        }
        let pick = (0..m)
            .find(|&r| row_count[r] == 1)
            .map(|r| (open.iter().position(|&(a, _)| a == r).expect("counted"), true))
            .or_else(|| {
                (0..n)
                    .find(|&s| col_count[s] == 1)
                    .map(|s| (open.iter().position(|&(_, b)| b == s).expect("counted"), false))
            });
        let Some((k, by_row)) = pick else {
            return Err(Error::InvalidTable("support contains a cycle".into()));
        };
        let (r, s) = open.swap_remove(k);
        let v = if by_row { row_res[r] } else { col_res[s] };
        if v < -FEASIBILITY_TOL {
            return Err(Error::InvalidTable(format!("basic solution is negative at ({r}, {s})")));
        }
        let v = v.max(0.0);
        cells[r * n + s] = v;
        row_res[r] -= v;
        col_res[s] -= v;
    }
    let worst = row_res.iter().chain(&col_res).fold(0.0f64, |a, &b| a.max(b.abs()));
    if worst >= FEASIBILITY_TOL {
        return Err(Error::InvalidTable(format!("support leaves residual {worst}")));
    }
    Ok(cells)
}

/// Every vertex of the transportation polytope of `x` and `y`.
pub fn enumerate_vertices(x: &MarginalDistribution, y: &MarginalDistribution) -> Result<VertexSet> {
    check_size(x, y)?;
    let mut e = Enumerator { rows: x.probs(), cols: y.probs(), visited: HashSet::new(), found: BTreeMap::new() };
    let mut row_res = x.probs().to_vec();
    let mut col_res = y.probs().to_vec();
    e.explore(0, &mut row_res, &mut col_res);
    let vertices = e
        .found
        .keys()
        .map(|support| {
            let cells = solve_support(x, y, support)?;
            Ok(CouplingTable::from_raw(x.len(), y.len(), cells, x.clone(), y.clone(), Provenance::Oracle))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexSet { vertices })
}

/// Minimum joint entropy over the vertices; near-ties (within 1e-12) go to
/// the lexicographically smallest support.
pub fn oracle_min_entropy(x: &MarginalDistribution, y: &MarginalDistribution) -> Result<(CouplingTable, f64)> {
    let set = enumerate_vertices(x, y)?;
    let entropies: Vec<f64> = set.vertices.par_iter().map(joint_entropy).collect();
    let min = entropies.iter().copied().fold(f64::INFINITY, f64::min);
    let k = entropies.iter().position(|&h| h <= min + 1e-12).expect("at least one vertex");
    let h = entropies[k];
    Ok((set.vertices.into_iter().nth(k).expect("index in range"), h))
}

/// Scans the single free cell of a 2x2 table over its feasible interval.
pub fn grid_min_2x2(x: &MarginalDistribution, y: &MarginalDistribution, step: f64) -> Result<f64> {
    if x.len() != 2 || y.len() != 2 {
        return Err(Error::DimensionMismatch(format!("expected 2x2, got {}x{}", x.len(), y.len())));
    }
    if !(step > 0.0 && step <= 0.01) {
        return Err(Error::OutOfRange { what: "step", value: step });
    }
    let (p, q) = (x.probs(), y.probs());
    let (lo, hi) = frechet_cell_bounds(p[0].min(1.0), q[0].min(1.0))?;
    let h = |a: f64| entropy_of(&[a, p[0] - a, q[0] - a, p[1] - q[0] + a].map(|c| c.max(0.0)));
    let steps = ((hi - lo) / step).floor() as usize;
    let interior = (0..=steps).map(|k| h(lo + k as f64 * step));
    Ok(interior.chain([h(lo), h(hi)]).fold(f64::INFINITY, f64::min))
}

/// Greedy against the exact minimum.
#[derive(Debug, Clone)]
pub struct GapRecord {
    pub greedy_h: f64,
    pub oracle_h: f64,
    /// `greedy_h - oracle_h`; positive means the greedy table is not minimal.
    pub gap: f64,
    pub greedy: CouplingTable,
    /// The minimizing vertex, present when the gap exceeds 1e-9.
    pub certificate: Option<CouplingTable>,
}

impl GapRecord {
    pub fn greedy_is_minimal(&self) -> bool {
        self.certificate.is_none()
    }
}

pub fn compare_greedy_oracle(x: &MarginalDistribution, y: &MarginalDistribution) -> Result<GapRecord> {
    let (oracle, oracle_h) = oracle_min_entropy(x, y)?;
    let (greedy, _) = greedy_min_coupling(x, y);
    let greedy_h = joint_entropy(&greedy);
    let gap = greedy_h - oracle_h;
    Ok(GapRecord { greedy_h, oracle_h, gap, greedy, certificate: (gap > 1e-9).then_some(oracle) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support::is_forest;
    use approx::assert_abs_diff_eq;

    fn m(p: &[f64]) -> MarginalDistribution {
        MarginalDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn two_by_two_has_two_vertices() {
        let set = enumerate_vertices(&m(&[0.6, 0.4]), &m(&[0.7, 0.3])).unwrap();
        assert_eq!(set.count(), 2);
        let mut corners: Vec<f64> = set.vertices.iter().map(|t| t.get(0, 0)).collect();
        corners.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(corners[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(corners[1], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_and_symmetric_counts() {
        assert_eq!(enumerate_vertices(&m(&[1.0]), &m(&[0.7, 0.3])).unwrap().count(), 1);
        let set = enumerate_vertices(&m(&[0.5, 0.5]), &m(&[0.5, 0.5])).unwrap();
        assert_eq!(set.count(), 2);
        let supports: Vec<_> = set.vertices.iter().map(|t| t.support()).collect();
        assert!(supports.contains(&vec![(0, 0), (1, 1)]));
        assert!(supports.contains(&vec![(0, 1), (1, 0)]));
    }

    #[test]
    fn vertices_are_valid_forests() {
        let set = enumerate_vertices(&m(&[0.2, 0.3, 0.5]), &m(&[0.1, 0.25, 0.3, 0.35])).unwrap();
        assert!(set.count() > 2);
        let mut supports = HashSet::new();
        for t in &set.vertices {
            t.check_invariants(1e-12).unwrap();
            assert!(is_forest(t));
            assert!(t.nonzero_count() <= 3 + 4 - 1);
            assert!(supports.insert(t.support()));
        }
    }

    #[test]
    fn rejects_oversized() {
        let x = MarginalDistribution::uniform(6).unwrap();
        let y = MarginalDistribution::uniform(7).unwrap();
        assert!(matches!(enumerate_vertices(&x, &y), Err(Error::TooLarge { rows: 6, cols: 7, cap: 36 })));
    }

    #[test]
    fn oracle_fixtures() {
        let (_, h) = oracle_min_entropy(&m(&[0.6, 0.4]), &m(&[0.7, 0.3])).unwrap();
        assert_abs_diff_eq!(h, 0.897945724856780, epsilon = 1e-12);
        let (t, h) = oracle_min_entropy(&m(&[0.3, 0.3, 0.2, 0.2]), &m(&[0.6, 0.4])).unwrap();
        assert!(h <= 1.366158847569202 + 1e-12);
        assert_eq!(t.provenance(), Provenance::Oracle);
        let (_, h) = oracle_min_entropy(&m(&[0.5, 0.5]), &m(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(h, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn oracle_is_deterministic() {
        let x = m(&[0.25, 0.25, 0.25, 0.25]);
        let y = m(&[0.5, 0.25, 0.25]);
        let (a, _) = oracle_min_entropy(&x, &y).unwrap();
        let (b, _) = oracle_min_entropy(&x, &y).unwrap();
        assert_eq!(a.support(), b.support());
    }

    #[test]
    fn grid_scan_fixtures() {
        assert_abs_diff_eq!(
            grid_min_2x2(&m(&[0.6, 0.4]), &m(&[0.7, 0.3]), 1e-4).unwrap(),
            0.897945724856780,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(grid_min_2x2(&m(&[0.5, 0.5]), &m(&[0.5, 0.5]), 1e-4).unwrap(), 2f64.ln(), epsilon = 1e-15);
        // mpmath: H(0.7, 0.3) = 0.610864302054893489330489507897
        assert_abs_diff_eq!(
            grid_min_2x2(&m(&[1.0, 0.0]), &m(&[0.7, 0.3]), 1e-4).unwrap(),
            0.610864302054893,
            epsilon = 1e-12
        );
        assert!(grid_min_2x2(&m(&[0.5, 0.5]), &m(&[0.5, 0.5]), 0.5).is_err());
        assert!(matches!(
            grid_min_2x2(&m(&[0.5, 0.25, 0.25]), &m(&[0.5, 0.5]), 1e-3),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gap_fixtures() {
        let r = compare_greedy_oracle(&m(&[0.6, 0.4]), &m(&[0.7, 0.3])).unwrap();
        assert_abs_diff_eq!(r.gap, 0.0, epsilon = 1e-12);
        assert!(r.greedy_is_minimal());

        let x = m(&[0.15, 0.35, 0.1, 0.4]);
        let r = compare_greedy_oracle(&x, &x).unwrap();
        assert_abs_diff_eq!(r.gap, 0.0, epsilon = 1e-12);

        let r = compare_greedy_oracle(&m(&[0.3, 0.3, 0.2, 0.2]), &m(&[0.6, 0.4])).unwrap();
        // mpmath: 0.138629436111989069578926017408
        assert!(r.gap >= 0.138629436111989 - 1e-12, "gap {}", r.gap);
        assert!(r.certificate.is_some());
    }

    /// Minimum over every forest-shaped subset of cells that solves to a
    /// feasible table.
    fn brute_force_min(x: &MarginalDistribution, y: &MarginalDistribution) -> f64 {
        let (rows, cols) = (x.len(), y.len());
        let mut best = f64::INFINITY;
        for mask in 1u32..1 << (rows * cols) {
            let support: Vec<u8> = (0..(rows * cols) as u8).filter(|&k| mask >> k & 1 == 1).collect();
            let cells: Vec<(usize, usize)> = support.iter().map(|&k| (k as usize / cols, k as usize % cols)).collect();
            if !crate::support::cells_form_forest(&cells, rows, cols) {
                continue;
            }
            if let Ok(t) = solve_support(x, y, &support) {
                best = best.min(entropy_of(&t));
            }
        }
        best
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let (x, y) = crate::instances::random_pair(&mut rng, 3, 4);
            let (_, h) = oracle_min_entropy(&x, &y).unwrap();
            assert_abs_diff_eq!(h, brute_force_min(&x, &y), epsilon = 1e-12);
            let (g, _) = greedy_min_coupling(&x, &y);
            assert!(joint_entropy(&g) >= h - 1e-12);
        }
    }
}
