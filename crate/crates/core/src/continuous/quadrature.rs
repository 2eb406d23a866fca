//! Adaptive Gauss–Kronrod (7/15 point) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 48;

/// Kronrod estimate and |Kronrod - Gauss| on one interval.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection, splitting the tolerance between halves.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gk15(f, a, b);
    refine(f, a, b, tol, value, error, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, value: f64, error: f64, depth: u32) -> Result<f64> {
    if error <= tol.max(64.0 * f64::EPSILON * value.abs()) {
        return Ok(value);
    }
    if !value.is_finite() {
        return Err(Error::QuadratureFailure { a, b, estimate: value, error });
    }
    // Nothing left to subdivide.
    if (b - a).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure { a, b, estimate: value, error });
    }
    let mid = 0.5 * (a + b);
    let (lv, le) = gk15(f, a, mid);
    let (rv, re) = gk15(f, mid, b);
    Ok(refine(f, a, mid, 0.5 * tol, lv, le, depth + 1)? + refine(f, mid, b, 0.5 * tol, rv, re, depth + 1)?)
}

/// Integrates over `[a, b]` split at the given breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let pieces = points.len() + 1;
    let mut lo = a;
    let mut total = 0.0;
    for &hi in points.iter().chain(std::iter::once(&b)) {
        total += integrate(f, lo, hi, tol / pieces as f64)?;
        lo = hi;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(v, 64.0 / 6.0 - 8.0, epsilon = 1e-13);
    }

    #[test]
    fn gaussian_mass() {
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate(&phi, -10.0, 10.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn handles_a_jump() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 0.0 };
        let v = integrate(&step, 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 0.3, epsilon = 1e-9);
        let v = integrate_with_breaks(&step, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.3, epsilon = 1e-14);
    }

    #[test]
    fn reports_failure_on_singularity() {
        let f = |x: f64| 1.0 / x;
        assert!(matches!(integrate(&f, -1.0, 1.0, 1e-10), Err(Error::QuadratureFailure { .. })));
    }
}
