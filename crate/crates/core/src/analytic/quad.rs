//! Adaptive Gauss–Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0f64; 15];
    fv[7] = f(c);
    for j in 0..7 {
        let dx = h * XGK[j];
        fv[j] = f(c - dx);
        fv[14 - j] = f(c + dx);
    }
    let weight = |i: usize| WGK[if i <= 7 { i } else { 14 - i }];
    let kronrod: f64 = (0..15).map(|i| weight(i) * fv[i]).sum();
    let abs_sum: f64 = (0..15).map(|i| weight(i) * fv[i].abs()).sum();
    let mut gauss = WG[3] * fv[7];
    for j in [1usize, 3, 5] {
        gauss += WG[j / 2] * (fv[j] + fv[14 - j]);
    }
    let mean = 0.5 * kronrod;
    let asc: f64 = (0..15).map(|i| weight(i) * (fv[i] - mean).abs()).sum::<f64>() * h.abs();

    // QUADPACK-style scaling of the Gauss/Kronrod difference
    let mut err = ((kronrod - gauss) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let abs_int = abs_sum * h.abs();
    if abs_int > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_int);
    }
    (kronrod * h, err)
}

/// Integrates `f` over the finite interval `[a, b]` by bisecting the
/// worst subinterval until the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], rel_tol, abs_tol)
}

/// Like [`integrate`], starting from the partition given by the sorted
/// `breaks` so that narrow features near a break are not missed.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    const MAX_INTERVALS: usize = 4000;
    if breaks.len() < 2 || breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid(format!(
            "integration bounds {breaks:?} must be finite and ordered"
        )));
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    if parts.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                what: "quadrature (non-finite integrand)",
                terms: parts.len(),
            });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                intervals: parts.len(),
            });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                terms: parts.len(),
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (interval underflow)",
                terms: parts.len(),
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Integrates over `[0, ∞)` through `x = t/(1+t)`, `dt = dx/(1-x)²`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, rel_tol: f64, abs_tol: f64) -> Result<QuadResult> {
    integrate(
        |x| {
            if x >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - x;
            f(x / w) / (w * w)
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 1e-13).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
        let r = integrate(|x| x.powi(20), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((r.value - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn half_line() {
        let r = integrate_half_line(|t| (-t).exp(), 1e-12, 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
        let r = integrate_half_line(|t| 1.0 / (1.0 + t * t), 1e-12, 0.0).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn bad_bounds() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9, 0.0).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-9, 0.0).is_err());
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-9, 0.0).unwrap().value, 0.0);
    }
}
