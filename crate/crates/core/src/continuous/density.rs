use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::quadrature::integrate_with_breaks;
use crate::entropy::neg_xlogx;
use crate::error::{Error, Result};

/// Windows are snapped outward to this lattice (cells of width 1/256).
pub const WINDOW_SNAP: f64 = 256.0;

/// Mass below which an excised interval counts as density-free.
const GAP_MASS_TOL: f64 = 1e-12;

/// Parametric one-dimensional densities.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily {
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    /// Density interpolated linearly between `(x, f(x))` knots. Repeating an
    /// `x` gives a jump. Must integrate to one.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
enum Law {
    Uniform { a: f64, b: f64 },
    Normal(Normal),
    Exponential { rate: f64 },
    Piecewise(Piecewise),
    /// `base` with density-free intervals cut out and the support closed up.
    Squeezed { base: Box<DensitySpec>, gaps: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
struct Piecewise {
    knots: Vec<(f64, f64)>,
    /// CDF at each knot.
    cum: Vec<f64>,
}

impl Piecewise {
    fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::BadParams("piecewise-linear density needs at least two knots".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 >= w[0].0) {
                return Err(Error::BadParams("knot abscissae must be non-decreasing".into()));
            }
        }
        if knots.iter().any(|&(x, f)| !x.is_finite() || !f.is_finite() || f < 0.0) {
            return Err(Error::BadParams("knots must be finite with nonnegative density".into()));
        }
        let mut cum = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in knots.windows(2) {
            acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
            cum.push(acc);
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::BadParams(format!("piecewise-linear density integrates to {acc}")));
        }
        Ok(Self { knots, cum })
    }

    /// Segment `k` spans knots `k..k+1` and contains `x` on `[x_k, x_{k+1})`.
    fn segment(&self, x: f64) -> Option<usize> {
        let k = self.knots.partition_point(|&(kx, _)| kx <= x);
        if k == 0 || k == self.knots.len() {
            return None;
        }
        Some(k - 1)
    }

    fn pdf(&self, x: f64) -> f64 {
        match self.segment(x) {
            Some(k) => {
                let ((x0, f0), (x1, f1)) = (self.knots[k], self.knots[k + 1]);
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
            None => 0.0,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < self.knots[0].0 {
            return 0.0;
        }
        match self.segment(x) {
            Some(k) => {
                let ((x0, f0), (x1, f1)) = (self.knots[k], self.knots[k + 1]);
                let d = x - x0;
                (self.cum[k] + f0 * d + (f1 - f0) * d * d / (2.0 * (x1 - x0))).min(1.0)
            }
            None => 1.0,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.iter().map(|&(x, _)| x).collect()
    }
}

/// An absolutely continuous marginal with a finite working window.
#[derive(Debug, Clone)]
pub struct DensitySpec {
    law: Law,
    window: (f64, f64),
    window_tol: f64,
}

fn snap_down(x: f64) -> f64 {
    (x * WINDOW_SNAP).floor() / WINDOW_SNAP
}

fn snap_up(x: f64) -> f64 {
    (x * WINDOW_SNAP).ceil() / WINDOW_SNAP
}

/// Builds a density with a window leaving at most `window_tol` mass outside
/// (split evenly between two unbounded tails). The window is snapped outward
/// to multiples of `1 / WINDOW_SNAP`.
pub fn make_density_spec(family: DensityFamily, window_tol: f64) -> Result<DensitySpec> {
    if !(window_tol.is_finite() && (0.0..1.0).contains(&window_tol)) {
        return Err(Error::BadParams(format!("window_tol {window_tol} not in [0, 1)")));
    }
    let need_tol = || {
        if window_tol > 0.0 {
            Ok(())
        } else {
            Err(Error::BadParams("unbounded support needs window_tol > 0".into()))
        }
    };
    let (law, window) = match family {
        DensityFamily::Uniform { a, b } => {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::BadParams(format!("uniform bounds ({a}, {b})")));
            }
            (Law::Uniform { a, b }, (a, b))
        }
        DensityFamily::Normal { mean, sd } => {
            need_tol()?;
            let normal = Normal::new(mean, sd).map_err(|e| Error::BadParams(e.to_string()))?;
            let lo = normal.inverse_cdf(0.5 * window_tol);
            let hi = 2.0 * mean - lo;
            (Law::Normal(normal), (lo, hi))
        }
        DensityFamily::Exponential { rate } => {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::BadParams(format!("exponential rate {rate}")));
            }
            need_tol()?;
            (Law::Exponential { rate }, (0.0, -window_tol.ln() / rate))
        }
        DensityFamily::PiecewiseLinear { knots } => {
            let pw = Piecewise::new(knots)?;
            let window = (pw.knots[0].0, pw.knots[pw.knots.len() - 1].0);
            (Law::Piecewise(pw), window)
        }
    };
    Ok(DensitySpec { law, window: (snap_down(window.0), snap_up(window.1)), window_tol })
}

impl DensitySpec {
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn window_tol(&self) -> f64 {
        self.window_tol
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.law {
            Law::Uniform { a, b } => {
                if x >= *a && x < *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Law::Normal(n) => n.pdf(x),
            Law::Exponential { rate } => {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            Law::Piecewise(p) => p.pdf(x),
            Law::Squeezed { base, gaps } => base.pdf(unsqueeze(gaps, x)),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.law {
            Law::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Law::Normal(n) => n.cdf(x),
            Law::Exponential { rate } => {
                if x > 0.0 {
                    -(-rate * x).exp_m1()
                } else {
                    0.0
                }
            }
            Law::Piecewise(p) => p.cdf(x),
            Law::Squeezed { base, gaps } => base.cdf(unsqueeze(gaps, x)),
        }
    }

    /// Upper tail `1 - F(x)` without cancellation where a closed form exists.
    pub fn survival(&self, x: f64) -> f64 {
        match &self.law {
            Law::Normal(n) => n.sf(x),
            Law::Exponential { rate } => {
                if x > 0.0 {
                    (-rate * x).exp()
                } else {
                    1.0
                }
            }
            _ => 1.0 - self.cdf(x),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.law {
            Law::Uniform { a, b } => a + u * (b - a),
            Law::Normal(n) => n.inverse_cdf(u),
            Law::Exponential { rate } => -(-u).ln_1p() / rate,
            Law::Piecewise(_) => self.bisect_quantile(u),
            Law::Squeezed { base, gaps } => squeeze(gaps, base.quantile(u)),
        }
    }

    fn bisect_quantile(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = self.window;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// The monotone transport `G^{-1}(F(x))` carrying this law onto `target`.
    pub fn transport_to(&self, target: &DensitySpec, x: f64) -> f64 {
        target.quantile(self.cdf(x))
    }

    /// Points where the density may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.law {
            Law::Uniform { a, b } => vec![*a, *b],
            Law::Normal(_) => vec![],
            Law::Exponential { .. } => vec![0.0],
            Law::Piecewise(p) => p.breakpoints(),
            Law::Squeezed { base, gaps } => {
                let mut pts: Vec<f64> = base.breakpoints().into_iter().map(|x| squeeze(gaps, x)).collect();
                pts.extend(gap_starts(gaps));
                pts
            }
        }
    }

    /// Whether masses over cells can be taken from CDF differences exactly.
    pub(crate) fn has_exact_cdf(&self) -> bool {
        match &self.law {
            Law::Uniform { .. } | Law::Piecewise(_) => true,
            Law::Squeezed { base, .. } => base.has_exact_cdf(),
            _ => false,
        }
    }

    /// Differential entropy `-∫ f ln f` over the window.
    pub fn differential_entropy(&self) -> Result<f64> {
        let (lo, hi) = self.window;
        integrate_with_breaks(&|x| neg_xlogx(self.pdf(x)), lo, hi, &self.breakpoints(), 1e-11)
    }
}

/// Maps a squeezed coordinate back to the original one.
fn unsqueeze(gaps: &[(f64, f64)], z: f64) -> f64 {
    let mut x = z;
    for &(start, len) in gaps {
        if x >= start {
            x += len;
        } else {
            break;
        }
    }
    x
}

/// Maps an original coordinate to the squeezed one; points inside a gap land
/// on the gap's start.
fn squeeze(gaps: &[(f64, f64)], x: f64) -> f64 {
    let mut shift = 0.0;
    for &(start, len) in gaps {
        if x >= start + len {
            shift += len;
        } else if x > start {
            shift += x - start;
        } else {
            break;
        }
    }
    x - shift
}

fn gap_starts(gaps: &[(f64, f64)]) -> Vec<f64> {
    let mut removed = 0.0;
    gaps.iter()
        .map(|&(start, len)| {
            let z = start - removed;
            removed += len;
            z
        })
        .collect()
}

/// Removes density-free intervals `(start, start + len)` and closes up the
/// support so the CDF becomes strictly increasing there.
///
/// For `x` past an excised interval the new CDF is the old one evaluated
/// `len` further right. Entropy is unchanged.
pub fn strictify(spec: &DensitySpec, zero_intervals: &[(f64, f64)]) -> Result<DensitySpec> {
    if zero_intervals.is_empty() {
        return Ok(spec.clone());
    }
    let mut gaps = zero_intervals.to_vec();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(start, len) in &gaps {
        if !(start.is_finite() && len.is_finite() && len > 0.0) {
            return Err(Error::BadParams(format!("interval ({start}, {len})")));
        }
        let mass = spec.cdf(start + len) - spec.cdf(start);
        if mass > GAP_MASS_TOL {
            return Err(Error::NotZeroOnInterval { start, len, mass });
        }
    }
    for w in gaps.windows(2) {
        if w[0].0 + w[0].1 > w[1].0 {
            return Err(Error::BadParams(format!("intervals starting at {} and {} overlap", w[0].0, w[1].0)));
        }
    }
    let (lo, hi) = spec.window;
    let window = (squeeze(&gaps, lo), squeeze(&gaps, hi));
    Ok(DensitySpec {
        law: Law::Squeezed { base: Box::new(spec.clone()), gaps },
        window,
        window_tol: spec.window_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_blocks() -> DensitySpec {
        make_density_spec(
            DensityFamily::PiecewiseLinear {
                knots: vec![(0.0, 0.5), (1.0, 0.5), (1.0, 0.0), (2.0, 0.0), (2.0, 0.5), (3.0, 0.5)],
            },
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn uniform_window() {
        let s = make_density_spec(DensityFamily::Uniform { a: 0.0, b: 1.0 }, 0.0).unwrap();
        assert_eq!(s.window(), (0.0, 1.0));
    }

    #[test]
    fn normal_window() {
        let s = make_density_spec(DensityFamily::Normal { mean: 0.0, sd: 1.0 }, 1e-10).unwrap();
        let (lo, hi) = s.window();
        // mpmath: Φ^{-1}(5e-11) = -6.46695108724051617
        assert!(lo <= -6.466951087240516 && lo > -6.47 - 1.0 / WINDOW_SNAP);
        assert_eq!(hi, -lo);
        assert!(s.cdf(lo) <= 1e-10 && s.survival(hi) <= 1e-10);
    }

    #[test]
    fn exponential_window() {
        let s = make_density_spec(DensityFamily::Exponential { rate: 1.0 }, 1e-10).unwrap();
        let (lo, hi) = s.window();
        assert_eq!(lo, 0.0);
        // -ln(1e-10) = 23.0258509299404568
        assert!(hi >= 23.025850929940457 && hi < 23.03);
    }

    #[test]
    fn bad_params() {
        assert!(make_density_spec(DensityFamily::Normal { mean: 0.0, sd: -1.0 }, 1e-10).is_err());
        assert!(make_density_spec(DensityFamily::Normal { mean: 0.0, sd: 1.0 }, 0.0).is_err());
        assert!(make_density_spec(DensityFamily::Uniform { a: 1.0, b: 0.0 }, 0.0).is_err());
        assert!(make_density_spec(DensityFamily::Exponential { rate: 0.0 }, 1e-3).is_err());
        assert!(make_density_spec(DensityFamily::PiecewiseLinear { knots: vec![(0.0, 1.0), (2.0, 1.0)] }, 0.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let tol = 1e-10;
        for fam in [
            DensityFamily::Normal { mean: 1.0, sd: 2.0 },
            DensityFamily::Exponential { rate: 0.5 },
            DensityFamily::Uniform { a: -1.0, b: 3.0 },
        ] {
            let s = make_density_spec(fam, tol).unwrap();
            for k in 0..=1000 {
                let u = tol + (1.0 - 2.0 * tol) * k as f64 / 1000.0;
                assert!((s.cdf(s.quantile(u)) - u).abs() <= 1e-9, "{s:?} at {u}");
            }
        }
        let s = two_blocks();
        for k in 1..100 {
            let u = k as f64 / 100.0;
            assert!((s.cdf(s.quantile(u)) - u).abs() <= 1e-9);
        }
    }

    #[test]
    fn piecewise_cdf_and_jumps() {
        let s = two_blocks();
        assert_abs_diff_eq!(s.cdf(0.5), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cdf(1.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cdf(2.5), 0.75, epsilon = 1e-15);
        assert_eq!(s.pdf(1.5), 0.0);
        assert_eq!(s.pdf(2.0), 0.5);
    }

    #[test]
    fn strictify_identity() {
        let s = two_blocks();
        let t = strictify(&s, &[]).unwrap();
        assert_eq!(t.window(), s.window());
        assert_eq!(t.cdf(2.5), s.cdf(2.5));
    }

    #[test]
    fn strictify_closes_gap() {
        let t = strictify(&two_blocks(), &[(1.0, 1.0)]).unwrap();
        assert_eq!(t.window(), (0.0, 2.0));
        for k in 0..=200 {
            let z = 2.0 * k as f64 / 200.0;
            assert_abs_diff_eq!(t.cdf(z), z / 2.0, epsilon = 1e-15);
            if z < 2.0 {
                assert_eq!(t.pdf(z), 0.5);
            }
        }
        assert_abs_diff_eq!(t.quantile(0.75), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            t.differential_entropy().unwrap(),
            two_blocks().differential_entropy().unwrap(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(t.differential_entropy().unwrap(), 2f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn strictify_rejects_mass() {
        assert!(matches!(
            strictify(&two_blocks(), &[(0.5, 1.0)]),
            Err(Error::NotZeroOnInterval { .. })
        ));
        assert!(matches!(strictify(&two_blocks(), &[(1.0, 0.6), (1.5, 0.5)]), Err(Error::BadParams(_))));
    }

    #[test]
    fn transport_map_matches_quantiles() {
        let x = make_density_spec(DensityFamily::Uniform { a: 0.0, b: 1.0 }, 0.0).unwrap();
        let y = make_density_spec(DensityFamily::Exponential { rate: 1.0 }, 1e-10).unwrap();
        assert_abs_diff_eq!(x.transport_to(&y, 0.5), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn closed_form_entropies() {
        let n = make_density_spec(DensityFamily::Normal { mean: 0.0, sd: 1.0 }, 1e-12).unwrap();
        // mpmath: ½ ln(2πe) = 1.41893853320467274178
        assert_abs_diff_eq!(n.differential_entropy().unwrap(), 1.418938533204673, epsilon = 1e-9);
        let e = make_density_spec(DensityFamily::Exponential { rate: 1.0 }, 1e-14).unwrap();
        assert_abs_diff_eq!(e.differential_entropy().unwrap(), 1.0, epsilon = 1e-9);
    }
}
