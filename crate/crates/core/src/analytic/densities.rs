//! Closed-form densities and means of the SNR loss and related ratios.

use std::f64::consts::PI;

use super::hypergeometric::{hyp2f1, hyp3f2_unit, ln_hyp2f1};
use super::special::lbeta;
use crate::error::{Error, Result};

fn check_dims(n: u32, k: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("N must be >= 2, got {n}")));
    }
    if k < n {
        return Err(Error::invalid(format!("K must be >= N, got K={k}, N={n}")));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in [0, 1], got {x}")))
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and >= 0, got {x}")))
    }
}

/// `a·ln(x)` with the convention `0·ln 0 = 0`.
fn xlogy(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

/// Beta-prime density `x^{a-1}(1+x)^{-(a+b)}/B(a,b)`.
fn beta_prime_pdf(x: f64, a: f64, b: f64) -> f64 {
    (xlogy(a - 1.0, x) - (a + b) * x.ln_1p() - lbeta(a, b)).exp()
}

/// Conditional density of the SNR loss given `F1 = f1`.
pub fn pdf_rho_given_f1(rho: f64, f1: f64, n: u32, k: u32) -> Result<f64> {
    check_dims(n, k)?;
    check_unit("rho", rho)?;
    check_nonneg("f1", f1)?;
    let (n, k) = (f64::from(n), f64::from(k));
    let ln =
        (k - n + 2.0) * f1.ln_1p() - lbeta(n - 1.0, k - n + 2.0) + xlogy(k - n + 1.0, rho) + xlogy(n - 2.0, 1.0 - rho)
            - (k + 1.0) * (rho * f1).ln_1p();
    Ok(ln.exp())
}

/// Density of the SNR loss with Gaussian training, `Beta(K-N+2, N-1)`.
pub fn pdf_rho_gaussian(rho: f64, n: u32, k: u32) -> Result<f64> {
    pdf_rho_given_f1(rho, 0.0, n, k)
}

/// The loss factor with Gaussian training shares the SNR-loss law.
pub fn pdf_beta_gaussian(beta: f64, n: u32, k: u32) -> Result<f64> {
    pdf_rho_gaussian(beta, n, k)
}

/// Density of the SNR loss with Student training.
pub fn pdf_rho_student(rho: f64, n: u32, k: u32, nu: u32) -> Result<f64> {
    check_dims(n, k)?;
    check_unit("rho", rho)?;
    if nu < 2 {
        return Err(Error::invalid(format!("nu must be >= 2, got {nu}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let (n, k, nu) = (f64::from(n), f64::from(k), f64::from(nu));
    let ln_const = lbeta(k - n + 1.0, nu + n - 1.0) - lbeta(n - 1.0, k - n + 2.0) - lbeta(k - n + 1.0, nu);
    let ln_f = ln_hyp2f1(k + 1.0, k - n + 1.0, nu + k, 1.0 - rho)?;
    Ok((ln_const + xlogy(k - n + 1.0, rho) + xlogy(n - 2.0, 1.0 - rho) + ln_f).exp())
}

/// Density of `F1 = Cχ²_{K-N+1} / Cχ²_ν`.
pub fn pdf_f1(f1: f64, n: u32, k: u32, nu: u32) -> Result<f64> {
    check_dims(n, k)?;
    check_nonneg("f1", f1)?;
    if nu < 1 {
        return Err(Error::invalid("nu must be >= 1"));
    }
    Ok(beta_prime_pdf(f1, f64::from(k - n + 1), f64::from(nu)))
}

/// Density of `F2 = Cχ²_{N-1} / Cχ²_{K-N+2}`.
pub fn pdf_f2(f2: f64, n: u32, k: u32) -> Result<f64> {
    check_dims(n, k)?;
    check_nonneg("f2", f2)?;
    Ok(beta_prime_pdf(f2, f64::from(n - 1), f64::from(k - n + 2)))
}

/// Density of the trailing scalar block of `CF_p(q, n)`.
pub fn pdf_f22(f: f64, p: u32, q: u32, n: u32) -> Result<f64> {
    if p < 1 || q < 1 || n < p {
        return Err(Error::invalid(format!(
            "need p >= 1, q >= 1, n >= p; got p={p}, q={q}, n={n}"
        )));
    }
    check_nonneg("f22", f)?;
    Ok(beta_prime_pdf(f, f64::from(q), f64::from(n - p + 1)))
}

fn check_t12(p: u32, q: u32, n: u32) -> Result<()> {
    if p < 2 || q < 1 || n < p {
        return Err(Error::invalid(format!(
            "need p >= 2, q >= 1, n >= p; got p={p}, q={q}, n={n}"
        )));
    }
    Ok(())
}

/// Density of the `(p-1)`-dimensional complex vector `t12 = F22⁻¹F21` of a
/// `CF_p(q, n)` matrix with `r = p-1`, evaluated at `‖t12‖² = norm_sq`.
pub fn pdf_t12_marginal(norm_sq: f64, p: u32, q: u32, n: u32) -> Result<f64> {
    check_t12(p, q, n)?;
    check_nonneg("norm_sq", norm_sq)?;
    let (p, q, n) = (f64::from(p), f64::from(q), f64::from(n));
    let ln_c = libm::lgamma(n + 1.0) - (p - 1.0) * PI.ln() - libm::lgamma(n - p + 2.0) - lbeta(q, n - p + 1.0);
    let ln_f = ln_hyp2f1(n + 1.0, p + q - 1.0, n + q, -norm_sq)?;
    Ok((ln_c + lbeta(p + q - 1.0, n - p + 1.0) + ln_f).exp())
}

/// Density of `‖t12‖²`: the vector density times the radial measure
/// `π^m u^{m-1}/Γ(m)`, `m = p-1`.
pub fn pdf_t12_norm_sq(norm_sq: f64, p: u32, q: u32, n: u32) -> Result<f64> {
    let v = pdf_t12_marginal(norm_sq, p, q, n)?;
    let m = f64::from(p - 1);
    Ok(v * (m * PI.ln() + xlogy(m - 1.0, norm_sq) - libm::lgamma(m)).exp())
}

/// `E[ρ] = (K-N+2)/(K+1)` with Gaussian training.
pub fn mean_rho_gaussian(n: u32, k: u32) -> Result<f64> {
    check_dims(n, k)?;
    Ok(f64::from(k - n + 2) / f64::from(k + 1))
}

/// `E[ρ | F1 = f1]`.
pub fn mean_rho_given_f1(f1: f64, n: u32, k: u32) -> Result<f64> {
    check_dims(n, k)?;
    check_nonneg("f1", f1)?;
    let (nf, kf) = (f64::from(n), f64::from(k));
    let f = hyp2f1(1.0, kf - nf + 3.0, kf + 2.0, f1 / (1.0 + f1))?.into_value("hyp2f1")?;
    Ok((kf - nf + 2.0) / (kf + 1.0) / (1.0 + f1) * f)
}

/// `E[ρ]` with Student training, through `₃F₂` at unit argument.
pub fn mean_rho_student(n: u32, k: u32, nu: u32) -> Result<f64> {
    check_dims(n, k)?;
    if nu < 2 {
        return Err(Error::invalid(format!("nu must be >= 2, got {nu}")));
    }
    let (n, k, nu) = (f64::from(n), f64::from(k), f64::from(nu));
    let f = hyp3f2_unit(1.0, k - n + 3.0, k - n + 1.0, k + 2.0, nu + k - n + 2.0)?.into_value("hyp3f2")?;
    Ok(nu * (k - n + 2.0) / ((nu + k - n + 1.0) * (k + 1.0)) * f)
}

/// Threshold `η` with `(1+η)^{-(K-N+1)} = pfa` for Kelly's statistic under
/// Gaussian training.
pub fn gaussian_pfa_threshold(pfa: f64, n: u32, k: u32) -> Result<f64> {
    if !(pfa > 0.0 && pfa <= 1.0) {
        return Err(Error::invalid(format!("pfa must lie in (0, 1], got {pfa}")));
    }
    if k < n {
        return Err(Error::invalid(format!("K-N+1 must be >= 1, got K={k}, N={n}")));
    }
    Ok((-pfa.ln() / f64::from(k - n + 1)).exp_m1())
}

/// `P(t̃ > η) = (1+η)^{-(K-N+1)}` under Gaussian training and no signal.
pub fn gaussian_pfa(eta: f64, n: u32, k: u32) -> Result<f64> {
    check_nonneg("eta", eta)?;
    if k < n {
        return Err(Error::invalid(format!("K-N+1 must be >= 1, got K={k}, N={n}")));
    }
    Ok((-f64::from(k - n + 1) * eta.ln_1p()).exp())
}

#[cfg(test)]
mod tests {
    use super::super::quad::{integrate, integrate_half_line};
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rho_given_f1_zero_is_beta() {
        // Beta(18, 15) density from factorials
        let ln_fact = |n: u32| (1..=n).map(|k| f64::from(k).ln()).sum::<f64>();
        for rho in [0.1, 0.5, 0.8] {
            let oracle =
                (ln_fact(32) - ln_fact(17) - ln_fact(14) + 17.0 * f64::ln(rho) + 14.0 * (1.0 - rho).ln()).exp();
            assert!(rel(pdf_rho_given_f1(rho, 0.0, 16, 32).unwrap(), oracle) < 1e-12);
        }
    }

    #[test]
    fn rho_given_f1_normalized() {
        let r = integrate(|r| pdf_rho_given_f1(r, 2.0, 16, 32).unwrap(), 0.0, 1.0, 1e-11, 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rho_given_f1_transcription() {
        // N=16, K=32, f1=1, rho=1/2: 2^18 · 32!/(14!·17!) · 2^-31 · (2/3)^33
        //   = 18·C(32,14)·2^20 / 3^33, evaluated in exact integers.
        let binom = (1..=14u128).fold(1u128, |acc, i| acc * (32 - 14 + i) / i);
        let num = 18 * binom * (1u128 << 20);
        let den = 3u128.pow(33);
        let oracle = num as f64 / den as f64;
        assert!(rel(pdf_rho_given_f1(0.5, 1.0, 16, 32).unwrap(), oracle) < 1e-12);
    }

    #[test]
    fn rho_student_normalized() {
        for (k, nu) in [(32, 32), (32, 18), (64, 18), (24, 160)] {
            let r = integrate(|r| pdf_rho_student(r, 16, k, nu).unwrap(), 0.0, 1.0, 1e-10, 0.0).unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "K={k} nu={nu}: {}", r.value);
        }
    }

    #[test]
    fn rho_student_matches_marginalization() {
        let (n, k, nu) = (16, 32, 32);
        for i in 1..=10 {
            let rho = i as f64 / 11.0;
            let marg = integrate_half_line(
                |f1| pdf_rho_given_f1(rho, f1, n, k).unwrap() * pdf_f1(f1, n, k, nu).unwrap(),
                1e-11,
                0.0,
            )
            .unwrap()
            .value;
            let closed = pdf_rho_student(rho, n, k, nu).unwrap();
            assert!(rel(closed, marg) < 1e-6, "rho={rho}: {closed} vs {marg}");
        }
    }

    #[test]
    fn mean_student_limits_and_quadrature() {
        assert!((mean_rho_student(16, 32, 1_000_000).unwrap() - 18.0 / 33.0).abs() < 1e-4);
        for (k, nu) in [(32, 32), (32, 160), (32, 18), (64, 32)] {
            let m = mean_rho_student(16, k, nu).unwrap();
            let q = integrate(|r| r * pdf_rho_student(r, 16, k, nu).unwrap(), 0.0, 1.0, 1e-11, 0.0).unwrap();
            assert!(rel(m, q.value) < 1e-8, "K={k} nu={nu}: {m} vs {}", q.value);
        }
        assert!(mean_rho_student(16, 32, 1).is_err());
    }

    #[test]
    fn mean_student_reference_values() {
        // independently summed series
        for (k, nu, v) in [
            (32, 32, 0.441313),
            (32, 160, 0.520993),
            (32, 18, 0.383833),
            (64, 32, 0.569978),
        ] {
            assert!((mean_rho_student(16, k, nu).unwrap() - v).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_student_monotone() {
        for nu in [18, 32, 160] {
            let mut prev = 0.0;
            for k in 20..=128 {
                let m = mean_rho_student(16, k, nu).unwrap();
                assert!(m >= prev, "K={k} nu={nu}");
                assert!(m <= mean_rho_gaussian(16, k).unwrap());
                prev = m;
            }
        }
        for k in [24, 32, 64, 128] {
            let ms: Vec<f64> = [18, 32, 160]
                .iter()
                .map(|&nu| mean_rho_student(16, k, nu).unwrap())
                .collect();
            assert!(ms[0] <= ms[1] && ms[1] <= ms[2]);
        }
    }

    #[test]
    fn mean_given_f1() {
        assert!((mean_rho_given_f1(0.0, 16, 32).unwrap() - 18.0 / 33.0).abs() < 1e-15);
        let q = integrate(|r| r * pdf_rho_given_f1(r, 1.0, 16, 32).unwrap(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!(rel(mean_rho_given_f1(1.0, 16, 32).unwrap(), q.value) < 1e-8);
        let grid: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&f| mean_rho_given_f1(f, 16, 32).unwrap())
            .collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn f22_density() {
        for (p, q, n) in [(16, 32, 32), (4, 8, 16), (1, 5, 10)] {
            let r = integrate_half_line(|f| pdf_f22(f, p, q, n).unwrap(), 1e-12, 0.0).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8);
        }
        // mode at (q-1)/(n-p+2)
        let (p, q, n) = (4, 8, 16);
        let mode = f64::from(q - 1) / f64::from(n - p + 2);
        let argmax = (1..20_000)
            .map(|i| i as f64 * 1e-4)
            .max_by(|a, b| pdf_f22(*a, p, q, n).unwrap().total_cmp(&pdf_f22(*b, p, q, n).unwrap()))
            .unwrap();
        assert!((argmax - mode).abs() < 2e-4);
        assert!(pdf_f22(-1.0, p, q, n).is_err());
    }

    #[test]
    fn f2_density() {
        let r = integrate_half_line(|f| pdf_f2(f, 16, 32).unwrap(), 1e-12, 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
        // at f2=1: 2^{-33}/B(15, 18) = 2^{-33}·32!/(14!·17!)
        let binom = (1..=14u128).fold(1u128, |acc, i| acc * (32 - 14 + i) / i);
        let oracle = (18 * binom) as f64 / 2f64.powi(33);
        assert!(rel(pdf_f2(1.0, 16, 32).unwrap(), oracle) < 1e-12);
    }

    #[test]
    fn t12_density() {
        for (p, q, n) in [(4, 8, 16), (16, 32, 32), (2, 3, 5)] {
            let r = integrate_half_line(|u| pdf_t12_norm_sq(u, p, q, n).unwrap(), 1e-10, 0.0).unwrap();
            assert!((r.value - 1.0).abs() < 1e-5, "{p} {q} {n}: {}", r.value);
        }
        let (p, q, n) = (4.0, 8.0, 16.0);
        let c = (libm::lgamma(n + 1.0) - (p - 1.0) * PI.ln() - libm::lgamma(n - p + 2.0) - lbeta(q, n - p + 1.0)).exp();
        let expected = c * lbeta(p + q - 1.0, n - p + 1.0).exp();
        assert!(rel(pdf_t12_marginal(0.0, 4, 8, 16).unwrap(), expected) < 1e-13);
    }

    #[test]
    fn pfa_threshold() {
        assert_eq!(gaussian_pfa_threshold(1.0, 16, 32).unwrap(), 0.0);
        let eta = gaussian_pfa_threshold(1e-3, 16, 32).unwrap();
        assert!((eta - (10f64.powf(3.0 / 17.0) - 1.0)).abs() < 1e-14);
        assert!((eta - 0.501_31).abs() < 1e-5);
        assert!(rel(gaussian_pfa(eta, 16, 32).unwrap(), 1e-3) < 1e-12);
        assert!(gaussian_pfa_threshold(0.0, 16, 32).is_err());
        assert!(gaussian_pfa_threshold(0.1, 16, 15).is_err());
    }
}
