//! Absolutely continuous marginals and their discretizations.
//!
//! A [`DensitySpec`] is quantized on cells `[k/n, (k+1)/n)`; the joint
//! entropy of the quantized law grows like `2 ln n` (fixed joint density) or
//! `ln n` (minimum over couplings), and the centered values converge.
//!
//! With the `- ln n` centering used here, identical uniform marginals give a
//! limit of exactly zero; the centered limit need not be positive.

mod density;
mod discretize;
mod quadrature;
mod series;

pub use density::{make_density_spec, strictify, DensityFamily, DensitySpec, WINDOW_SNAP};
pub use discretize::{
    discretize, quantized_joint_entropy, shifted_entropy, shifted_joint_entropy, DiscretizationGrid,
    JointDensity, JointMasses, CELL_TOL, MAX_DENSE_CELLS,
};
pub use quadrature::{integrate, integrate_with_breaks};
pub use series::{
    default_resolutions, min_coupling_series, joint_series, ConvergenceSeries, MinCouplingSeries,
    SeriesMode,
};
