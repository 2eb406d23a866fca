use rayon::prelude::*;

use super::density::DensitySpec;
use super::discretize::{discretize, quantized_joint_entropy, shifted_joint_entropy, JointDensity};
use crate::coupling::{decompose_trace, greedy_trace, tail_error_bound, GreedyTrace, StringDecomposition};
use crate::error::{Error, Result};

/// `2, 4, ..., 256`.
pub fn default_resolutions() -> Vec<usize> {
    (1..=8).map(|k| 1usize << k).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// `H(X_n, Y_n) - 2 ln n` for a fixed joint density.
    Joint,
    /// `min H(X_n, Y_n) - ln n` over the Fréchet class, via the greedy table.
    MinCoupling,
}

impl SeriesMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesMode::Joint => "joint",
            SeriesMode::MinCoupling => "mincoupling",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSeries {
    pub mode: SeriesMode,
    pub resolutions: Vec<usize>,
    /// Uncentered joint entropies.
    pub raw_values: Vec<f64>,
    /// Raw values minus `2 ln n` (joint mode) or `ln n` (min-coupling mode).
    pub shifted_values: Vec<f64>,
    /// Raw values plus the same shift; the opposite sign convention.
    pub plus_shift_values: Vec<f64>,
    /// Bound on the entropy lost to mass outside the windows.
    pub tail_error_bounds: Vec<f64>,
    pub last_value: f64,
    pub extrapolated_limit: f64,
}

impl ConvergenceSeries {
    fn build(mode: SeriesMode, resolutions: Vec<usize>, raw: Vec<f64>, tails: Vec<f64>) -> Result<Self> {
        let factor = match mode {
            SeriesMode::Joint => 2.0,
            SeriesMode::MinCoupling => 1.0,
        };
        let shift: Vec<f64> = resolutions.iter().map(|&n| factor * (n as f64).ln()).collect();
        let shifted_values: Vec<f64> = raw.iter().zip(&shift).map(|(h, s)| h - s).collect();
        let plus_shift_values = raw.iter().zip(&shift).map(|(h, s)| h + s).collect();
        let last_value = *shifted_values.last().ok_or(Error::Empty)?;
        let extrapolated_limit = richardson(&resolutions, &shifted_values);
        if !extrapolated_limit.is_finite() {
            return Err(Error::BadParams(format!("extrapolated limit {extrapolated_limit} is not finite")));
        }
        Ok(Self {
            mode,
            resolutions,
            raw_values: raw,
            shifted_values,
            plus_shift_values,
            tail_error_bounds: tails,
            last_value,
            extrapolated_limit,
        })
    }

    pub fn len(&self) -> usize {
        self.resolutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resolutions.is_empty()
    }

    /// Differences of consecutive raw values.
    pub fn raw_increments(&self) -> Vec<f64> {
        self.raw_values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Second-order extrapolation from the last two points, assuming the error
/// decays like `1/n²`.
fn richardson(resolutions: &[usize], values: &[f64]) -> f64 {
    match (resolutions, values) {
        ([.., n0, n1], [.., v0, v1]) if n1 > n0 => {
            let r = *n1 as f64 / *n0 as f64;
            v1 + (v1 - v0) / (r * r - 1.0)
        }
        (_, [.., v]) => *v,
        _ => f64::NAN,
    }
}

fn check_resolutions(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n == 0) {
        return Err(Error::OutOfRange { what: "n", value: bad as f64 });
    }
    Ok(())
}

/// Shifted joint entropies of the quantized joint law at each resolution.
pub fn joint_series(
    spec_x: &DensitySpec,
    spec_y: &DensitySpec,
    joint: &JointDensity,
    n_list: &[usize],
) -> Result<ConvergenceSeries> {
    check_resolutions(n_list)?;
    let points = n_list
        .par_iter()
        .map(|&n| {
            let grid = discretize(spec_x, spec_y, n, Some(joint))?;
            let shifted = shifted_joint_entropy(&grid)?;
            let raw = match joint {
                // Exact in this route; avoids cancellation against 2 ln n.
                JointDensity::Product => shifted + 2.0 * (n as f64).ln(),
                JointDensity::Function(_) => quantized_joint_entropy(&grid)?,
            };
            let tail = grid.row_masses.tail_mass() + grid.col_masses.tail_mass();
            let cells = grid.row_masses.len() * grid.col_masses.len();
            Ok((raw, shifted, tail_error_bound(tail, cells)))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = points.iter().map(|p| p.0).collect();
    let tails = points.iter().map(|p| p.2).collect();
    let mut series = ConvergenceSeries::build(SeriesMode::Joint, n_list.to_vec(), raw, tails)?;
    // Keep the directly computed shifted values rather than raw - 2 ln n.
    series.shifted_values = points.iter().map(|p| p.1).collect();
    series.last_value = *series.shifted_values.last().expect("nonempty");
    series.extrapolated_limit = richardson(&series.resolutions, &series.shifted_values);
    Ok(series)
}

/// Result of [`min_coupling_series`].
#[derive(Debug, Clone)]
pub struct MinCouplingSeries {
    pub series: ConvergenceSeries,
    /// Greedy run at the last resolution.
    pub final_trace: GreedyTrace,
    pub final_strings: StringDecomposition,
}

/// Greedy minimum joint entropy of the quantized marginals, centered by
/// `ln n`, at each resolution.
///
/// Tables are never materialized: entropy and strings come from the trace.
pub fn min_coupling_series(spec_x: &DensitySpec, spec_y: &DensitySpec, n_list: &[usize]) -> Result<MinCouplingSeries> {
    check_resolutions(n_list)?;
    let mut points = n_list
        .par_iter()
        .map(|&n| {
            let grid = discretize(spec_x, spec_y, n, None)?;
            let trace = greedy_trace(&grid.row_masses, &grid.col_masses);
            let raw = trace.joint_entropy();
            let tail = grid.row_masses.tail_mass() + grid.col_masses.tail_mass();
            let bound = tail_error_bound(tail, grid.row_masses.len() * grid.col_masses.len());
            Ok((raw, bound, grid, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, _, grid, final_trace) = points.pop().expect("nonempty");
    let final_strings = decompose_trace(&final_trace, grid.row_masses.probs(), grid.col_masses.probs());
    let raw_last = final_trace.joint_entropy();
    let last_bound = tail_error_bound(
        grid.row_masses.tail_mass() + grid.col_masses.tail_mass(),
        grid.row_masses.len() * grid.col_masses.len(),
    );
    let raw = points.iter().map(|p| p.0).chain([raw_last]).collect();
    let tails = points.iter().map(|p| p.1).chain([last_bound]).collect();
    let series = ConvergenceSeries::build(SeriesMode::MinCoupling, n_list.to_vec(), raw, tails)?;
    Ok(MinCouplingSeries { series, final_trace, final_strings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::density::{make_density_spec, DensityFamily};
    use approx::assert_abs_diff_eq;

    const LOG_2PI_E: f64 = 2.837877066409345;

    fn uniform() -> DensitySpec {
        make_density_spec(DensityFamily::Uniform { a: 0.0, b: 1.0 }, 0.0).unwrap()
    }

    #[test]
    fn richardson_on_exact_quadratic_error() {
        let n = [8usize, 16];
        let v: Vec<f64> = n.iter().map(|&k| 1.5 + 3.0 / (k * k) as f64).collect();
        assert_abs_diff_eq!(richardson(&n, &v), 1.5, epsilon = 1e-14);
        assert_eq!(richardson(&[4], &[2.0]), 2.0);
    }

    #[test]
    fn uniform_joint_series_is_zero() {
        let s = joint_series(&uniform(), &uniform(), &JointDensity::Product, &[2, 4, 8]).unwrap();
        assert_eq!(s.shifted_values, vec![0.0; 3]);
        assert_eq!(s.extrapolated_limit, 0.0);
        assert_eq!(s.tail_error_bounds, vec![0.0; 3]);
    }

    #[test]
    fn exponential_joint_limit() {
        let e = make_density_spec(DensityFamily::Exponential { rate: 1.0 }, 1e-10).unwrap();
        let s = joint_series(&e, &e, &JointDensity::Product, &[16, 32, 64]).unwrap();
        assert!((s.extrapolated_limit - 2.0).abs() < 0.02, "{}", s.extrapolated_limit);
    }

    #[test]
    fn normal_joint_limit() {
        let g = make_density_spec(DensityFamily::Normal { mean: 0.0, sd: 1.0 }, 1e-10).unwrap();
        let s = joint_series(&g, &g, &JointDensity::Product, &[16, 32]).unwrap();
        assert!((s.extrapolated_limit - LOG_2PI_E).abs() < 0.02);
    }

    #[test]
    fn uniform_min_coupling_is_diagonal() {
        let r = min_coupling_series(&uniform(), &uniform(), &[2, 4, 8, 16]).unwrap();
        for v in &r.series.shifted_values {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        assert!(r.final_trace.steps.iter().all(|s| s.row == s.col));
        assert_eq!(r.final_strings.string_count(), 16);
    }

    #[test]
    fn normal_min_coupling_increments() {
        let g = make_density_spec(DensityFamily::Normal { mean: 0.0, sd: 1.0 }, 1e-10).unwrap();
        let r = min_coupling_series(&g, &g, &[8, 16, 32]).unwrap();
        for d in r.series.raw_increments() {
            assert!((d - 2f64.ln()).abs() < 0.01);
        }
        assert!((r.series.extrapolated_limit - 0.5 * LOG_2PI_E).abs() < 0.02);
        assert_eq!(r.series.plus_shift_values.len(), 3);
    }

    #[test]
    fn rejects_empty_and_zero() {
        assert!(min_coupling_series(&uniform(), &uniform(), &[]).is_err());
        assert!(joint_series(&uniform(), &uniform(), &JointDensity::Product, &[0]).is_err());
    }
}
