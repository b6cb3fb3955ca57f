//! Gauss ₂F₁ on the real line below 1 and ₃F₂ at unit argument.

use serde::Serialize;

use super::quad::integrate_with_breaks;
use super::special::lbeta;
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;
const MAX_TERMS: usize = 1_000_000;
/// Terms allowed for the slowly converging series near `x = 1` before
/// switching to the Euler integral.
const NEAR_ONE_TERMS: usize = 200_000;

/// Value of a hypergeometric evaluation with its convergence record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
}

impl SeriesResult {
    /// Converts a non-converged result into an error.
    pub fn into_value(self, what: &'static str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                what,
                terms: self.terms_used,
            })
        }
    }
}

/// `exp(ln_scale) · sum`, kept apart so large prefactors do not overflow.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    ln_scale: f64,
    sum: f64,
    terms: usize,
    converged: bool,
}

impl Scaled {
    fn value(&self) -> f64 {
        self.sum * self.ln_scale.exp()
    }

    fn ln_value(&self) -> Option<f64> {
        (self.sum > 0.0).then(|| self.ln_scale + self.sum.ln())
    }

    fn rescale(mut self, ln_factor: f64) -> Self {
        self.ln_scale += ln_factor;
        self
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn gauss_series(a: f64, b: f64, c: f64, x: f64, cap: usize) -> Scaled {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..cap {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Scaled {
                ln_scale: 0.0,
                sum,
                terms: k + 2,
                converged: true,
            };
        }
        // Ratios tend monotonically to x, so the tail is geometric-bounded.
        let bound = ratio.abs().max(x.abs());
        if bound < 1.0 && term.abs() / (1.0 - bound) <= TOL * sum.abs() {
            return Scaled {
                ln_scale: 0.0,
                sum,
                terms: k + 2,
                converged: true,
            };
        }
    }
    Scaled {
        ln_scale: 0.0,
        sum,
        terms: cap + 1,
        converged: false,
    }
}

/// `₂F₁(a,b;c;x) = B(b,c-b)⁻¹ ∫₀¹ t^{b-1}(1-t)^{c-b-1}(1-xt)^{-a} dt`, requires `c > b > 0`.
fn euler_integral(a: f64, b: f64, c: f64, x: f64) -> Option<Scaled> {
    let (a, b) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return None;
    };
    // Lower half in t, upper half in s = 1 - t so that 1 - xt = (1-x) + xs
    // keeps full relative precision near t = 1.
    let one_minus_x = 1.0 - x;
    let g_lo = |t: f64| (b - 1.0) * t.ln() + (c - b - 1.0) * (-t).ln_1p() - a * (-x * t).ln_1p();
    let g_hi = |s: f64| (b - 1.0) * (-s).ln_1p() + (c - b - 1.0) * s.ln() - a * (one_minus_x + x * s).ln();

    let mut breaks: Vec<f64> = (0..=8).map(|i| f64::from(i) / 16.0).collect();
    breaks.extend((1..=15).map(|j| 10f64.powi(-j)));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let shift = breaks
        .iter()
        .filter(|&&t| t > 0.0)
        .flat_map(|&t| [g_lo(t), g_hi(t)])
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return None;
    }
    let lower = integrate_with_breaks(
        |t| if t <= 0.0 { 0.0 } else { (g_lo(t) - shift).exp() },
        &breaks,
        1e-11,
        0.0,
    )
    .ok()?;
    let upper = integrate_with_breaks(
        |s| if s <= 0.0 { 0.0 } else { (g_hi(s) - shift).exp() },
        &breaks,
        1e-11,
        0.0,
    )
    .ok()?;
    Some(Scaled {
        ln_scale: shift - lbeta(b, c - b),
        sum: lower.value + upper.value,
        terms: lower.intervals + upper.intervals,
        converged: true,
    })
}

/// Evaluation for `0.5 < x < 1`.
fn near_one(a: f64, b: f64, c: f64, x: f64) -> Scaled {
    let s = c - a - b;
    let series = if s < 0.0 {
        gauss_series(c - a, c - b, c, x, NEAR_ONE_TERMS).rescale(s * (-x).ln_1p())
    } else {
        gauss_series(a, b, c, x, NEAR_ONE_TERMS)
    };
    if series.converged {
        return series;
    }
    euler_integral(a, b, c, x).unwrap_or(series)
}

fn hyp2f1_scaled(a: f64, b: f64, c: f64, x: f64) -> Result<Scaled> {
    if ![a, b, c, x].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("hyp2f1 arguments must be finite"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::invalid(format!("hyp2f1: c = {c} is a non-positive integer")));
    }
    if x >= 1.0 {
        return Err(Error::invalid(format!("hyp2f1: argument {x} must be below 1")));
    }
    if x == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(Scaled {
            ln_scale: 0.0,
            sum: 1.0,
            terms: 1,
            converged: true,
        });
    }
    if x < 0.0 {
        // Pfaff: (1-x)^{-a} ₂F₁(a, c-b; c; x/(x-1)). The direct series
        // alternates and cancels badly for large a, b; the transformed one
        // has positive terms whenever a, c-b >= 0.
        let (a, b) = if c - b >= 0.0 || c - a < 0.0 { (a, b) } else { (b, a) };
        if (a < 0.0 || c - b < 0.0) && x >= -0.5 {
            return Ok(gauss_series(a, b, c, x, MAX_TERMS));
        }
        let z = x / (x - 1.0);
        let ln_prefactor = -a * (-x).ln_1p();
        let inner = if z <= 0.5 {
            gauss_series(a, c - b, c, z, MAX_TERMS)
        } else {
            near_one(a, c - b, c, z)
        };
        return Ok(inner.rescale(ln_prefactor));
    }
    if x <= 0.5 {
        return Ok(gauss_series(a, b, c, x, MAX_TERMS));
    }
    Ok(near_one(a, b, c, x))
}

/// Gauss hypergeometric function `₂F₁(a, b; c; x)` for real `x < 1`.
///
/// Series for `0 < x ≤ 0.5`, Pfaff transformation for `x < 0`, Euler
/// transformation (or the Euler integral when the series is too slow) for
/// `0.5 < x < 1`. Non-convergence is reported through
/// [`SeriesResult::converged`].
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<SeriesResult> {
    let s = hyp2f1_scaled(a, b, c, x)?;
    Ok(SeriesResult {
        value: s.value(),
        terms_used: s.terms,
        converged: s.converged,
    })
}

/// `ln ₂F₁(a, b; c; x)` for positive values, erroring on non-convergence.
pub fn ln_hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let s = hyp2f1_scaled(a, b, c, x)?;
    if !s.converged {
        return Err(Error::NonConvergence {
            what: "hyp2f1",
            terms: s.terms,
        });
    }
    s.ln_value()
        .ok_or_else(|| Error::invalid(format!("hyp2f1({a}, {b}; {c}; {x}) is not positive")))
}

/// `₃F₂(a1, a2, a3; b1, b2; 1)` by direct summation. Requires
/// `b1 + b2 - a1 - a2 - a3 > 0`.
pub fn hyp3f2_unit(a1: f64, a2: f64, a3: f64, b1: f64, b2: f64) -> Result<SeriesResult> {
    if ![a1, a2, a3, b1, b2].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("hyp3f2 arguments must be finite"));
    }
    if is_nonpositive_integer(b1) || is_nonpositive_integer(b2) {
        return Err(Error::invalid(
            "hyp3f2: lower parameters must not be non-positive integers",
        ));
    }
    if a1 == 0.0 || a2 == 0.0 || a3 == 0.0 {
        return Ok(SeriesResult {
            value: 1.0,
            terms_used: 1,
            converged: true,
        });
    }
    let excess = b1 + b2 - a1 - a2 - a3;
    if excess <= 0.0 {
        return Err(Error::invalid(format!(
            "hyp3f2 at unit argument diverges: b1+b2-a1-a2-a3 = {excess} <= 0"
        )));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a1 + kf) * (a2 + kf) * (a3 + kf) / ((b1 + kf) * (b2 + kf) * (kf + 1.0));
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(SeriesResult {
                value: sum,
                terms_used: k + 2,
                converged: true,
            });
        }
        // Terms decay like k^{-(excess+1)}, so the tail is about term·k/excess.
        if ratio < 1.0 {
            let tail = term.abs() * ((kf + 1.0) / excess).max(ratio / (1.0 - ratio));
            if tail <= TOL * sum.abs() {
                return Ok(SeriesResult {
                    value: sum,
                    terms_used: k + 2,
                    converged: true,
                });
            }
        }
    }
    Ok(SeriesResult {
        value: sum,
        terms_used: MAX_TERMS + 1,
        converged: false,
    })
}
