//! Scalar random variates and the complex chi-square convention.
//!
//! A complex chi-square variable with `q` degrees of freedom is the squared
//! norm of a `q`-vector of i.i.d. standard complex normals, i.e. a
//! `Gamma(q, 1)` variable with mean `q`. Standard complex normals have unit
//! total variance (1/2 per real component).

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// Seedable random source addressed by `(seed, stream_id)`.
///
/// Backed by ChaCha8: the seed keys the cipher and the stream id selects the
/// 64-bit nonce, so distinct stream ids yield non-overlapping sequences.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        draw_standard_complex_normal(self)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Circular complex normal with `E|z|^2 = 1`.
pub fn draw_standard_complex_normal(stream: &mut RngStream) -> Complex64 {
    let re: f64 = StandardNormal.sample(&mut stream.rng);
    let im: f64 = StandardNormal.sample(&mut stream.rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex chi-square with `q` degrees of freedom, i.e. `Gamma(q, 1)`.
pub fn draw_complex_chi_square(q: u32, stream: &mut RngStream) -> Result<f64> {
    let sampler = ComplexChiSquare::new(q)?;
    Ok(sampler.sample(stream))
}

/// `|z|^2` with `z ~ CN(sqrt(delta), 1)`.
pub fn draw_noncentral_complex_chi_square_1(delta: f64, stream: &mut RngStream) -> Result<f64> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!(
            "noncentrality must be finite and >= 0, got {delta}"
        )));
    }
    Ok(noncentral_chi_square_1(delta, stream))
}

pub(crate) fn noncentral_chi_square_1(delta: f64, stream: &mut RngStream) -> f64 {
    let z = draw_standard_complex_normal(stream) + Complex64::new(delta.sqrt(), 0.0);
    z.norm_sqr()
}

/// Reusable complex chi-square sampler for a fixed number of degrees of freedom.
#[derive(Clone, Copy, Debug)]
pub struct ComplexChiSquare {
    dof: u32,
    inner: ChiSquareInner,
}

#[derive(Clone, Copy, Debug)]
enum ChiSquareInner {
    Exponential,
    Gamma(Gamma<f64>),
}

impl ComplexChiSquare {
    pub fn new(q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("complex chi-square needs q >= 1"));
        }
        let inner = if q == 1 {
            ChiSquareInner::Exponential
        } else {
            ChiSquareInner::Gamma(Gamma::new(f64::from(q), 1.0).map_err(|e| Error::invalid(e.to_string()))?)
        };
        Ok(Self { dof: q, inner })
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        // Marsaglia-Tsang can in principle return 0 in floating point; redraw.
        loop {
            let x: f64 = match &self.inner {
                ChiSquareInner::Exponential => Exp1.sample(&mut stream.rng),
                ChiSquareInner::Gamma(g) => g.sample(&mut stream.rng),
            };
            if x > 0.0 {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn one_sample_ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(|a, b| a.total_cmp(b));
        let n = xs.len() as f64;
        xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
            let f = cdf(x);
            acc.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
        })
    }

    #[test]
    fn complex_normal_moments() {
        let mut s = RngStream::new(11, 0);
        let n = 1_000_000;
        let zs: Vec<Complex64> = (0..n).map(|_| draw_standard_complex_normal(&mut s)).collect();
        let p = zs.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let mre = zs.iter().map(|z| z.re).sum::<f64>() / n as f64;
        let mim = zs.iter().map(|z| z.im).sum::<f64>() / n as f64;
        let vre = zs.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        let vim = zs.iter().map(|z| z.im * z.im).sum::<f64>() / n as f64;
        let cov = zs.iter().map(|z| z.re * z.im).sum::<f64>() / n as f64;
        assert!((p - 1.0).abs() < 0.01, "{p}");
        assert!(mre.abs() < 0.01 && mim.abs() < 0.01);
        assert!((vre - 0.5).abs() < 0.01 && (vim - 0.5).abs() < 0.01);
        assert!(cov.abs() < 0.01);
    }

    #[test]
    fn chi_square_mean_and_inverse_moment() {
        let mut s = RngStream::new(12, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| draw_complex_chi_square(5, &mut s).unwrap())
            .collect();
        assert!((mean(&xs) - 5.0).abs() < 0.02);

        let inv: Vec<f64> = (0..1_000_000)
            .map(|_| 1.0 / draw_complex_chi_square(31, &mut s).unwrap())
            .collect();
        assert!((mean(&inv) - 1.0 / 30.0).abs() < 1e-3);
    }

    #[test]
    fn chi_square_one_dof_is_exponential() {
        let mut s = RngStream::new(13, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| draw_complex_chi_square(1, &mut s).unwrap())
            .collect();
        let d = one_sample_ks(xs, |x| 1.0 - (-x).exp());
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn zero_dof_rejected() {
        let mut s = RngStream::new(0, 0);
        assert!(draw_complex_chi_square(0, &mut s).is_err());
        assert!(draw_noncentral_complex_chi_square_1(-1.0, &mut s).is_err());
    }

    #[test]
    fn noncentral_moments() {
        let mut s = RngStream::new(14, 0);
        let n = 1_000_000;
        let central: Vec<f64> = (0..n)
            .map(|_| draw_noncentral_complex_chi_square_1(0.0, &mut s).unwrap())
            .collect();
        assert!((mean(&central) - 1.0).abs() < 0.01);

        // |sqrt(d) + z0|^2 = d + 2 sqrt(d) Re z0 + |z0|^2, so mean 1 + d and variance 4d/2 + 1
        let xs: Vec<f64> = (0..n)
            .map(|_| draw_noncentral_complex_chi_square_1(4.0, &mut s).unwrap())
            .collect();
        let m = mean(&xs);
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        assert!((m - 5.0).abs() < 0.02, "{m}");
        assert!((v - 9.0).abs() < 0.1, "{v}");
    }

    #[test]
    fn additivity_of_degrees_of_freedom() {
        let mut a = RngStream::new(15, 0);
        let mut b = RngStream::new(15, 1);
        let n = 100_000;
        let summed: Vec<f64> = (0..n)
            .map(|_| draw_complex_chi_square(3, &mut a).unwrap() + draw_complex_chi_square(4, &mut a).unwrap())
            .collect();
        let direct: Vec<f64> = (0..n).map(|_| draw_complex_chi_square(7, &mut b).unwrap()).collect();
        let d = crate::experiments::ks_distance(
            &crate::experiments::EmpiricalDistribution::new(summed),
            &crate::experiments::EmpiricalDistribution::new(direct),
        )
        .unwrap();
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut s = RngStream::new(seed, id);
            (0..64).map(|_| s.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn draws_are_finite_and_positive() {
        let mut s = RngStream::new(16, 0);
        for q in [1, 2, 7, 160] {
            let c = ComplexChiSquare::new(q).unwrap();
            for _ in 0..10_000 {
                let x = c.sample(&mut s);
                assert!(x.is_finite() && x > 0.0);
            }
        }
    }
}
