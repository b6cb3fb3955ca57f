//! Direct computation path: optimal and adaptive matched filters, SNR loss
//! and Kelly's detection statistics evaluated on raw simulated data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matvar::{gram, ComplexMatrix, ComplexVector, GaussianMatrixSampler, HermitianPd, MatrixTSampler};
use crate::randvar::RngStream;

/// Problem dimensions and distribution parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Number of channels.
    pub n: u32,
    /// Number of training snapshots.
    pub k: u32,
    /// Integer t parameter of the training distribution.
    pub nu: u32,
    /// Scale of the training covariance.
    pub mu: f64,
    /// `|α|² vᴴΣ⁻¹v`, zero under the null hypothesis.
    pub snr_bar: f64,
}

impl ScenarioParams {
    pub fn new(n: u32, k: u32, nu: u32, mu: f64, snr_bar: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("N must be >= 2, got {n}")));
        }
        if k < n {
            return Err(Error::invalid(format!("K must be >= N, got K={k}, N={n}")));
        }
        if nu < n + 1 {
            return Err(Error::invalid(format!("nu must be >= N+1, got nu={nu}, N={n}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("mu must be positive, got {mu}")));
        }
        if !(snr_bar >= 0.0) || !snr_bar.is_finite() {
            return Err(Error::invalid(format!("snr_bar must be >= 0, got {snr_bar}")));
        }
        Ok(Self { n, k, nu, mu, snr_bar })
    }

    /// Uses `mu = nu - N`, which makes `E[XXᴴ] = K Σ`.
    pub fn with_matched_mu(n: u32, k: u32, nu: u32, snr_bar: f64) -> Result<Self> {
        Self::new(n, k, nu, f64::from(nu) - f64::from(n), snr_bar)
    }

    pub fn hypothesis(&self) -> Hypothesis {
        if self.snr_bar > 0.0 {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

/// Noise covariance, signature and amplitude of the observation `x = αv + n`.
#[derive(Clone, Debug)]
pub struct SignalModel {
    pub sigma: HermitianPd,
    pub v: ComplexVector,
    pub alpha: Complex64,
}

impl SignalModel {
    pub fn new(sigma: HermitianPd, v: ComplexVector, alpha: Complex64) -> Result<Self> {
        if v.len() != sigma.dim() {
            return Err(Error::DimensionMismatch(format!(
                "signature has length {}, covariance is {}x{}",
                v.len(),
                sigma.dim(),
                sigma.dim()
            )));
        }
        if v.iter().all(|z| *z == Complex64::ZERO) {
            return Err(Error::invalid("signature must be nonzero"));
        }
        Ok(Self { sigma, v, alpha })
    }

    /// `Σ = I`, `v = e_N`, `α = 0`.
    pub fn canonical(n: usize) -> Self {
        let mut v = ComplexVector::zeros(n);
        v[n - 1] = Complex64::ONE;
        Self {
            sigma: HermitianPd::identity(n),
            v,
            alpha: Complex64::ZERO,
        }
    }

    /// Sets a real nonnegative amplitude so that `|α|² vᴴΣ⁻¹v = snr_bar`.
    pub fn with_snr_bar(mut self, snr_bar: f64) -> Result<Self> {
        let q = quad_inverse(&self.sigma, &self.v)?;
        self.alpha = Complex64::new((snr_bar / q).sqrt(), 0.0);
        Ok(self)
    }

    pub fn snr_bar(&self) -> Result<f64> {
        Ok(self.alpha.norm_sqr() * quad_inverse(&self.sigma, &self.v)?)
    }
}

/// Exponentially correlated covariance `Σ_ij = r^{|i-j|}`.
pub fn toeplitz_covariance(n: usize, r: f64) -> Result<HermitianPd> {
    HermitianPd::new(ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(r.powi((i as i32 - j as i32).abs()), 0.0)
    }))
}

/// Uniform-linear-array steering vector `v_i = exp(2πj f i)`.
pub fn steering_vector(n: usize, normalized_freq: f64) -> ComplexVector {
    ComplexVector::from_fn(n, |i, _| {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * normalized_freq * i as f64)
    })
}

fn quad_inverse(sigma: &HermitianPd, v: &ComplexVector) -> Result<f64> {
    let chol = sigma
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("singular covariance".into()))?;
    Ok(v.dotc(&chol.solve(v)).re)
}

fn constrained_weights(m: &ComplexMatrix, v: &ComplexVector, what: &str) -> Result<ComplexVector> {
    if v.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "signature has length {}, matrix is {}x{}",
            v.len(),
            m.nrows(),
            m.ncols()
        )));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(format!("singular {what}")))?;
    let u = chol.solve(v);
    let q = v.dotc(&u).re;
    Ok(u.unscale(q))
}

/// `w_opt = (vᴴΣ⁻¹v)⁻¹ Σ⁻¹ v`.
pub fn optimal_weights(model: &SignalModel) -> Result<ComplexVector> {
    constrained_weights(model.sigma.matrix(), &model.v, "covariance")
}

/// Sample covariance `S = X Xᴴ`.
pub fn scm(x_train: &ComplexMatrix) -> Result<HermitianPd> {
    if x_train.ncols() < x_train.nrows() {
        return Err(Error::invalid(format!(
            "need at least N={} training snapshots, got {}",
            x_train.nrows(),
            x_train.ncols()
        )));
    }
    let s = HermitianPd::from_hermitian_part(gram(x_train));
    if s.matrix().clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite("sample covariance is rank deficient".into()));
    }
    Ok(s)
}

/// `w_amf = (vᴴS⁻¹v)⁻¹ S⁻¹ v`.
pub fn amf_weights(s: &HermitianPd, v: &ComplexVector) -> Result<ComplexVector> {
    constrained_weights(s.matrix(), v, "sample covariance")
}

/// `ρ(w) = |wᴴv|² / ((vᴴΣ⁻¹v)(wᴴΣw))`.
pub fn snr_loss(w: &ComplexVector, model: &SignalModel) -> Result<f64> {
    if w.len() != model.v.len() {
        return Err(Error::DimensionMismatch("filter and signature lengths differ".into()));
    }
    if w.iter().all(|z| *z == Complex64::ZERO) {
        return Err(Error::invalid("filter must be nonzero"));
    }
    let gain = w.dotc(&model.v).norm_sqr();
    let out_power = w.dotc(&(model.sigma.matrix() * w)).re;
    let q = quad_inverse(&model.sigma, &model.v)?;
    Ok((gain / (q * out_power)).clamp(0.0, 1.0))
}

/// Kelly detection statistics of a test vector against a training set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KellyStats {
    /// `xᴴS⁻¹x`
    pub s1: f64,
    /// `|xᴴS⁻¹v|² / vᴴS⁻¹v`
    pub s2: f64,
    /// Loss factor `1/(1+s1-s2)`.
    pub beta: f64,
    /// GLRT statistic `s2/(1+s1-s2)`.
    pub t_tilde: f64,
}

impl KellyStats {
    fn from_quadratic_forms(s1: f64, s2: f64) -> Self {
        // s2 <= s1 by Cauchy-Schwarz; only rounding can break it.
        let s2 = s2.min(s1);
        let denom = 1.0 + (s1 - s2);
        Self {
            s1,
            s2,
            beta: 1.0 / denom,
            t_tilde: s2 / denom,
        }
    }
}

pub fn kelly_stats(x: &ComplexVector, x_train: &ComplexMatrix, v: &ComplexVector) -> Result<KellyStats> {
    let s = scm(x_train)?;
    if x.len() != s.dim() || v.len() != s.dim() {
        return Err(Error::DimensionMismatch(
            "test vector, signature and training sizes differ".into(),
        ));
    }
    let chol = s
        .into_matrix()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("singular sample covariance".into()))?;
    let u = chol.solve(v);
    let y = chol.solve(x);
    let vsv = v.dotc(&u).re;
    Ok(KellyStats::from_quadratic_forms(
        x.dotc(&y).re,
        x.dotc(&u).norm_sqr() / vsv,
    ))
}

/// Distribution of the training snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Training {
    /// `X ~ CN(0, Σ, I)`.
    Gaussian,
    /// `X ~ CT(ν-N+1, 0, μΣ, I)`.
    Student,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// One end-to-end trial of the direct path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectDraw {
    pub rho: f64,
    pub beta: f64,
    pub t_tilde: f64,
}

#[derive(Clone, Debug)]
enum TrainingSampler {
    Gaussian(GaussianMatrixSampler),
    Student(MatrixTSampler),
}

/// Precomputed factors for repeated direct-path trials.
///
/// The test-vector amplitude is `sqrt(snr_bar / vᴴΣ⁻¹v)` taken from the
/// scenario; `model.alpha` is not used.
#[derive(Clone, Debug)]
pub struct DirectSimulator {
    training: TrainingSampler,
    noise: GaussianMatrixSampler,
    v: ComplexVector,
    sigma: Option<ComplexMatrix>,
    signal: ComplexVector,
    v_sigma_inv_v: f64,
}

impl DirectSimulator {
    pub fn new(params: &ScenarioParams, model: &SignalModel, training: Training) -> Result<Self> {
        let n = params.n as usize;
        let k = params.k as usize;
        if model.sigma.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {0}x{0}, scenario has N={n}",
                model.sigma.dim()
            )));
        }
        let identity_k = HermitianPd::identity(k);
        let training = match training {
            Training::Gaussian => {
                TrainingSampler::Gaussian(GaussianMatrixSampler::new(n, k, None, &model.sigma, &identity_k)?)
            }
            Training::Student => TrainingSampler::Student(MatrixTSampler::new(
                n,
                k,
                params.nu - params.n + 1,
                None,
                &model.sigma.scaled(params.mu)?,
                &identity_k,
            )?),
        };
        let noise = GaussianMatrixSampler::new(n, 1, None, &model.sigma, &HermitianPd::identity(1))?;
        let v_sigma_inv_v = quad_inverse(&model.sigma, &model.v)?;
        let amplitude = (params.snr_bar / v_sigma_inv_v).sqrt();
        let is_identity = *model.sigma.matrix() == ComplexMatrix::identity(n, n);
        Ok(Self {
            training,
            noise,
            v: model.v.clone(),
            sigma: (!is_identity).then(|| model.sigma.matrix().clone()),
            signal: model.v.scale(amplitude),
            v_sigma_inv_v,
        })
    }

    pub fn draw_training(&self, stream: &mut RngStream) -> Result<ComplexMatrix> {
        match &self.training {
            TrainingSampler::Gaussian(g) => Ok(g.sample(stream)),
            TrainingSampler::Student(t) => t.sample(stream),
        }
    }

    pub fn trial(&self, hypothesis: Hypothesis, stream: &mut RngStream) -> Result<DirectDraw> {
        let x_train = self.draw_training(stream)?;
        let noise = self.noise.sample(stream);
        let mut x = ComplexVector::from_column_slice(noise.as_slice());
        if hypothesis == Hypothesis::H1 {
            x += &self.signal;
        }

        let s = x_train.nrows();
        let chol = gram(&x_train)
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(format!("sample covariance of size {s} is singular")))?;
        let u = chol.solve(&self.v);
        let vsv = self.v.dotc(&u).re;

        // ρ of w_amf = u / vsv, i.e. vsv² / (vᴴΣ⁻¹v · uᴴΣu)
        let u_sigma_u = match &self.sigma {
            Some(sigma) => u.dotc(&(sigma * &u)).re,
            None => u.norm_squared(),
        };
        let rho = (vsv * vsv / (self.v_sigma_inv_v * u_sigma_u)).clamp(0.0, 1.0);

        let y = chol.solve(&x);
        let kelly = KellyStats::from_quadratic_forms(x.dotc(&y).re, x.dotc(&u).norm_sqr() / vsv);
        Ok(DirectDraw {
            rho,
            beta: kelly.beta,
            t_tilde: kelly.t_tilde,
        })
    }
}

pub fn simulate_direct(
    params: &ScenarioParams,
    model: &SignalModel,
    training: Training,
    hypothesis: Hypothesis,
    stream: &mut RngStream,
) -> Result<DirectDraw> {
    DirectSimulator::new(params, model, training)?.trial(hypothesis, stream)
}
