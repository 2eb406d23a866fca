use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::density::DensitySpec;
use super::quadrature::{integrate, integrate_with_breaks};
use crate::entropy::neg_xlogx;
use crate::error::{Error, Result};
use crate::marginal::{MarginalDistribution, DEFAULT_TOL};
use crate::sum::{compensated_sum, NeumaierSum};

/// Absolute quadrature tolerance per one-dimensional cell.
pub const CELL_TOL: f64 = 1e-10;

/// Largest dense joint grid that will be integrated cell by cell.
pub const MAX_DENSE_CELLS: usize = 1 << 20;

/// Joint law of `(X, Y)` whose marginals are the two specs being discretized.
#[derive(Clone)]
pub enum JointDensity {
    /// `f(x, y) = f_X(x) f_Y(y)`; cell masses factor exactly.
    Product,
    /// An explicit joint density, integrated per cell.
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for JointDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointDensity::Product => f.write_str("Product"),
            JointDensity::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum JointMasses {
    /// Cell `(r, s)` has mass `row[r] * col[s]`.
    Product,
    /// Row-major cell masses.
    Dense(Vec<f64>),
}

/// Masses of `X` and `Y` on cells `[k/n, (k+1)/n)`.
#[derive(Debug, Clone)]
pub struct DiscretizationGrid {
    pub n: usize,
    /// Lattice indices: row cell `r` covers `[(x_start + r)/n, (x_start + r + 1)/n)`.
    pub x_start: i64,
    pub y_start: i64,
    pub row_masses: MarginalDistribution,
    pub col_masses: MarginalDistribution,
    pub joint: Option<JointMasses>,
}

impl DiscretizationGrid {
    pub fn x_window(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.x_start as f64 / n, (self.x_start + self.row_masses.len() as i64) as f64 / n)
    }

    pub fn y_window(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.y_start as f64 / n, (self.y_start + self.col_masses.len() as i64) as f64 / n)
    }

    pub fn joint_cell(&self, r: usize, s: usize) -> Option<f64> {
        match self.joint.as_ref()? {
            JointMasses::Product => Some(self.row_masses.probs()[r] * self.col_masses.probs()[s]),
            JointMasses::Dense(cells) => Some(cells[r * self.col_masses.len() + s]),
        }
    }
}

fn lattice(spec: &DensitySpec, n: usize) -> (i64, i64) {
    let (lo, hi) = spec.window();
    let nf = n as f64;
    let start = (lo * nf).floor() as i64;
    let end = ((hi * nf).ceil() as i64).max(start + 1);
    (start, end)
}

fn cell_masses(spec: &DensitySpec, n: usize, start: i64, end: i64) -> Result<MarginalDistribution> {
    let nf = n as f64;
    let breaks = spec.breakpoints();
    let exact = spec.has_exact_cdf();
    let masses = (start..end)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k as f64 / nf, (k + 1) as f64 / nf);
            if exact {
                Ok((spec.cdf(b) - spec.cdf(a)).max(0.0))
            } else {
                integrate_with_breaks(&|x| spec.pdf(x), a, b, &breaks, CELL_TOL).map(|v| v.max(0.0))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail = (spec.cdf(start as f64 / nf) + spec.survival(end as f64 / nf)).max(0.0);
    MarginalDistribution::with_tail(masses, tail, DEFAULT_TOL)
}

/// Quantizes both marginals on the `1/n` lattice, and the joint law too if
/// one is given.
///
/// Windows are widened to whole cells. Mass outside the window is kept as
/// `tail_mass`; nothing is rescaled.
pub fn discretize(
    spec_x: &DensitySpec,
    spec_y: &DensitySpec,
    n: usize,
    joint: Option<&JointDensity>,
) -> Result<DiscretizationGrid> {
    if n == 0 {
        return Err(Error::OutOfRange { what: "n", value: 0.0 });
    }
    let (xs, xe) = lattice(spec_x, n);
    let (ys, ye) = lattice(spec_y, n);
    let row_masses = cell_masses(spec_x, n, xs, xe)?;
    let col_masses = cell_masses(spec_y, n, ys, ye)?;
    let joint = match joint {
        None => None,
        Some(JointDensity::Product) => Some(JointMasses::Product),
        Some(JointDensity::Function(f)) => {
            let (rows, cols) = (row_masses.len(), col_masses.len());
            if rows * cols > MAX_DENSE_CELLS {
                return Err(Error::BadParams(format!(
                    "{rows}x{cols} joint grid exceeds {MAX_DENSE_CELLS} cells"
                )));
            }
            let nf = n as f64;
            let cells = (0..rows * cols)
                .into_par_iter()
                .map(|k| {
                    let (r, s) = (k / cols, k % cols);
                    let (a, b) = ((xs + r as i64) as f64 / nf, (xs + r as i64 + 1) as f64 / nf);
                    let (c, d) = ((ys + s as i64) as f64 / nf, (ys + s as i64 + 1) as f64 / nf);
                    let inner = |x: f64| integrate(&|y| f(x, y), c, d, CELL_TOL).unwrap_or(f64::NAN);
                    integrate(&inner, a, b, CELL_TOL).map(|v| v.max(0.0))
                })
                .collect::<Result<Vec<f64>>>()?;
            Some(JointMasses::Dense(cells))
        }
    };
    Ok(DiscretizationGrid { n, x_start: xs, y_start: ys, row_masses, col_masses, joint })
}

/// `H(X_n) - ln n` for one quantized marginal.
pub fn shifted_entropy(masses: &MarginalDistribution, n: usize) -> f64 {
    masses.entropy() - (n as f64).ln()
}

/// `H(X_n, Y_n) - 2 ln n`, evaluated as `-Σ p ln(n² p)`.
pub fn shifted_joint_entropy(grid: &DiscretizationGrid) -> Result<f64> {
    let joint = grid.joint.as_ref().ok_or(Error::MissingJoint)?;
    let scale = (grid.n as f64).powi(2);
    let term = |p: f64| if p > 0.0 { -p * (scale * p).ln() } else { 0.0 };
    let cols = grid.col_masses.probs();
    // Per-row partial sums, then a fixed-order reduction.
    let row_sums: Vec<f64> = match joint {
        JointMasses::Product => grid
            .row_masses
            .probs()
            .par_iter()
            .map(|&p| compensated_sum(cols.iter().map(|&q| term(p * q))))
            .collect(),
        JointMasses::Dense(cells) => cells
            .par_chunks(cols.len())
            .map(|row| compensated_sum(row.iter().map(|&p| term(p))))
            .collect(),
    };
    Ok(compensated_sum(row_sums))
}

/// Plain joint entropy `H(X_n, Y_n)` of the quantized joint law.
pub fn quantized_joint_entropy(grid: &DiscretizationGrid) -> Result<f64> {
    let joint = grid.joint.as_ref().ok_or(Error::MissingJoint)?;
    let cols = grid.col_masses.probs();
    let row_sums: Vec<f64> = match joint {
        JointMasses::Product => grid
            .row_masses
            .probs()
            .par_iter()
            .map(|&p| compensated_sum(cols.iter().map(|&q| neg_xlogx(p * q))))
            .collect(),
        JointMasses::Dense(cells) => cells
            .par_chunks(cols.len())
            .map(|row| compensated_sum(row.iter().map(|&p| neg_xlogx(p))))
            .collect(),
    };
    Ok(row_sums.into_iter().collect::<NeumaierSum>().total())
}
