//! Chi-square stochastic representations of the SNR loss `ρ`, the loss
//! factor `β` and Kelly's statistic `t̃`. No matrix algebra is involved, so
//! each draw costs a handful of gamma variates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matvar::ComplexVector;
use crate::randvar::{noncentral_chi_square_1, ComplexChiSquare, RngStream};

/// Intermediate variates of a representation draw.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RepAux {
    /// `F22 = Cχ²_ν / Cχ²_{K-N+1}`
    pub f22: Option<f64>,
    /// `γ12 ~ Cχ²_{K-N+2}`
    pub gamma12: Option<f64>,
    /// `x̃1ᴴx̃1 ~ Cχ²_{N-1}`
    pub x1: Option<f64>,
    /// `Cχ²_{ν-1}`
    pub chi_nu_minus_1: Option<f64>,
    /// Noncentrality of the `Cχ²₁` factor.
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepDraw {
    pub value: f64,
    pub aux: RepAux,
}

/// How the `γ12` of the numerator of the Student `t̃` representation relates
/// to the `Cχ²_{K-N+2}` of its denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TtildeVariant {
    /// Two independent draws.
    Independent,
    /// One draw used in both places. Matches the direct path.
    #[default]
    Shared,
}

fn check_nk(n: u32, k: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("N must be >= 2, got {n}")));
    }
    if k < n {
        return Err(Error::invalid(format!("K must be >= N, got K={k}, N={n}")));
    }
    Ok(())
}

fn check_nu_mu(nu: u32, mu: f64) -> Result<()> {
    if nu < 2 {
        return Err(Error::invalid(format!("nu must be >= 2, got {nu}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

fn check_snr(snr_bar: f64) -> Result<()> {
    if snr_bar >= 0.0 && snr_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "snr_bar must be finite and >= 0, got {snr_bar}"
        )))
    }
}

/// The four independent chi-squares behind the Student SNR loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoParts {
    /// `Cχ²_{K-N+1}`
    pub chi_k_n_1: f64,
    /// `Cχ²_ν`
    pub chi_nu: f64,
    /// `Cχ²_{N-1}`
    pub chi_n_1: f64,
    /// `Cχ²_{K-N+2}`
    pub chi_k_n_2: f64,
}

impl RhoParts {
    /// `[1 + (1 + Cχ²_{K-N+1}/Cχ²_ν) Cχ²_{N-1}/Cχ²_{K-N+2}]⁻¹`
    pub fn rho(&self) -> f64 {
        1.0 / (1.0 + (1.0 + self.chi_k_n_1 / self.chi_nu) * self.chi_n_1 / self.chi_k_n_2)
    }
}

/// Reusable representation sampler for fixed `(N, K, ν, μ, snr_bar)`.
#[derive(Clone, Debug)]
pub struct RepSampler {
    mu: f64,
    snr_bar: f64,
    variant: TtildeVariant,
    chi_n_1: ComplexChiSquare,
    chi_k_n_1: ComplexChiSquare,
    chi_k_n_2: ComplexChiSquare,
    chi_nu: Option<ComplexChiSquare>,
    chi_nu_1: Option<ComplexChiSquare>,
    f22_inflation: bool,
}

impl RepSampler {
    /// Sampler for Gaussian-training statistics only.
    pub fn gaussian(n: u32, k: u32, snr_bar: f64) -> Result<Self> {
        check_nk(n, k)?;
        check_snr(snr_bar)?;
        Ok(Self {
            mu: 1.0,
            snr_bar,
            variant: TtildeVariant::default(),
            chi_n_1: ComplexChiSquare::new(n - 1)?,
            chi_k_n_1: ComplexChiSquare::new(k - n + 1)?,
            chi_k_n_2: ComplexChiSquare::new(k - n + 2)?,
            chi_nu: None,
            chi_nu_1: None,
            f22_inflation: true,
        })
    }

    /// Sampler for both Student and Gaussian statistics.
    pub fn student(n: u32, k: u32, nu: u32, mu: f64, snr_bar: f64, variant: TtildeVariant) -> Result<Self> {
        check_nu_mu(nu, mu)?;
        let mut s = Self::gaussian(n, k, snr_bar)?;
        s.mu = mu;
        s.variant = variant;
        s.chi_nu = Some(ComplexChiSquare::new(nu)?);
        s.chi_nu_1 = Some(ComplexChiSquare::new(nu - 1)?);
        Ok(s)
    }

    /// Deliberately wrong `t̃` sampler with `(1 + 1/F22)` replaced by 1; used
    /// to show that the two-path comparison has power.
    pub(crate) fn without_f22_inflation(mut self) -> Self {
        self.f22_inflation = false;
        self
    }

    fn student_parts(&self) -> Result<(&ComplexChiSquare, &ComplexChiSquare)> {
        match (&self.chi_nu, &self.chi_nu_1) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::invalid("sampler was built without nu")),
        }
    }

    pub fn rho_parts(&self, stream: &mut RngStream) -> Result<RhoParts> {
        let (chi_nu, _) = self.student_parts()?;
        Ok(RhoParts {
            chi_k_n_1: self.chi_k_n_1.sample(stream),
            chi_nu: chi_nu.sample(stream),
            chi_n_1: self.chi_n_1.sample(stream),
            chi_k_n_2: self.chi_k_n_2.sample(stream),
        })
    }

    pub fn rho_student(&self, stream: &mut RngStream) -> Result<RepDraw> {
        let p = self.rho_parts(stream)?;
        Ok(RepDraw {
            value: p.rho(),
            aux: RepAux {
                f22: Some(p.chi_nu / p.chi_k_n_1),
                gamma12: Some(p.chi_k_n_2),
                x1: Some(p.chi_n_1),
                ..RepAux::default()
            },
        })
    }

    pub fn rho_gaussian(&self, stream: &mut RngStream) -> RepDraw {
        let x1 = self.chi_n_1.sample(stream);
        let gamma12 = self.chi_k_n_2.sample(stream);
        RepDraw {
            value: 1.0 / (1.0 + x1 / gamma12),
            aux: RepAux {
                gamma12: Some(gamma12),
                x1: Some(x1),
                ..RepAux::default()
            },
        }
    }

    pub fn beta_student(&self, stream: &mut RngStream) -> Result<RepDraw> {
        let (_, chi_nu_1) = self.student_parts()?;
        let c = chi_nu_1.sample(stream);
        let x1 = self.chi_n_1.sample(stream);
        let g = self.chi_k_n_2.sample(stream);
        Ok(RepDraw {
            value: 1.0 / (1.0 + c / self.mu * x1 / g),
            aux: RepAux {
                gamma12: Some(g),
                x1: Some(x1),
                chi_nu_minus_1: Some(c),
                ..RepAux::default()
            },
        })
    }

    pub fn beta_gaussian(&self, stream: &mut RngStream) -> RepDraw {
        self.rho_gaussian(stream)
    }

    pub fn ttilde_student(&self, stream: &mut RngStream) -> Result<RepDraw> {
        let (chi_nu, chi_nu_1) = self.student_parts()?;
        let f22 = chi_nu.sample(stream) / self.chi_k_n_1.sample(stream);
        let x1 = self.chi_n_1.sample(stream);
        let gamma12 = self.chi_k_n_2.sample(stream);
        let denom_chi = match self.variant {
            TtildeVariant::Shared => gamma12,
            TtildeVariant::Independent => self.chi_k_n_2.sample(stream),
        };
        let c = chi_nu_1.sample(stream);
        let weight = if self.f22_inflation { 1.0 + 1.0 / f22 } else { 1.0 };
        let inflation = 1.0 + weight * x1 / gamma12;
        let delta = self.snr_bar / inflation;
        let scale = f22 * inflation / self.mu / (1.0 + c / self.mu * (x1 / denom_chi));
        let value = scale * noncentral_chi_square_1(delta, stream);
        Ok(RepDraw {
            value,
            aux: RepAux {
                f22: Some(f22),
                gamma12: Some(gamma12),
                x1: Some(x1),
                chi_nu_minus_1: Some(c),
                delta: Some(delta),
            },
        })
    }

    pub fn ttilde_gaussian(&self, stream: &mut RngStream) -> RepDraw {
        let beta = self.rho_gaussian(stream);
        let delta = beta.value * self.snr_bar;
        let num = noncentral_chi_square_1(delta, stream);
        let den = self.chi_k_n_1.sample(stream);
        RepDraw {
            value: num / den,
            aux: RepAux {
                delta: Some(delta),
                ..beta.aux
            },
        }
    }
}

/// `ρ` with Student training.
pub fn draw_rho_student(n: u32, k: u32, nu: u32, stream: &mut RngStream) -> Result<RepDraw> {
    if nu < 1 {
        return Err(Error::invalid("nu must be >= 1"));
    }
    check_nk(n, k)?;
    let parts = RhoParts {
        chi_k_n_1: ComplexChiSquare::new(k - n + 1)?.sample(stream),
        chi_nu: ComplexChiSquare::new(nu)?.sample(stream),
        chi_n_1: ComplexChiSquare::new(n - 1)?.sample(stream),
        chi_k_n_2: ComplexChiSquare::new(k - n + 2)?.sample(stream),
    };
    Ok(RepDraw {
        value: parts.rho(),
        aux: RepAux {
            f22: Some(parts.chi_nu / parts.chi_k_n_1),
            gamma12: Some(parts.chi_k_n_2),
            x1: Some(parts.chi_n_1),
            ..RepAux::default()
        },
    })
}

/// `ρ` with Gaussian training, `Beta(K-N+2, N-1)`.
pub fn draw_rho_gaussian(n: u32, k: u32, stream: &mut RngStream) -> Result<RepDraw> {
    Ok(RepSampler::gaussian(n, k, 0.0)?.rho_gaussian(stream))
}

/// `β` with Student training.
pub fn draw_beta_student(n: u32, k: u32, nu: u32, mu: f64, stream: &mut RngStream) -> Result<RepDraw> {
    RepSampler::student(n, k, nu, mu, 0.0, TtildeVariant::default())?.beta_student(stream)
}

/// `β` with Gaussian training; same law as [`draw_rho_gaussian`].
pub fn draw_beta_gaussian(n: u32, k: u32, stream: &mut RngStream) -> Result<RepDraw> {
    Ok(RepSampler::gaussian(n, k, 0.0)?.beta_gaussian(stream))
}

/// `t̃` with Student training.
pub fn draw_ttilde_student(
    n: u32,
    k: u32,
    nu: u32,
    mu: f64,
    snr_bar: f64,
    variant: TtildeVariant,
    stream: &mut RngStream,
) -> Result<RepDraw> {
    RepSampler::student(n, k, nu, mu, snr_bar, variant)?.ttilde_student(stream)
}

/// `t̃` with Gaussian training: `Cχ²₁(β·snr_bar) / Cχ²_{K-N+1}`.
pub fn draw_ttilde_gaussian(n: u32, k: u32, snr_bar: f64, stream: &mut RngStream) -> Result<RepDraw> {
    Ok(RepSampler::gaussian(n, k, snr_bar)?.ttilde_gaussian(stream))
}

/// `t12 = (1 + 1/F22)^{1/2} n12 / √γ12`, `n12 ~ CN(0, I_{N-1})`, `γ12 ~ Cχ²_{K-N+2}`.
pub fn draw_t12_given_f22(n: u32, k: u32, f22: f64, stream: &mut RngStream) -> Result<ComplexVector> {
    check_nk(n, k)?;
    if !(f22 > 0.0) {
        return Err(Error::invalid(format!("f22 must be positive, got {f22}")));
    }
    let n12 = ComplexVector::from_fn((n - 1) as usize, |_, _| stream.complex_normal());
    let gamma12 = ComplexChiSquare::new(k - n + 2)?.sample(stream);
    Ok(n12.scale(((1.0 + 1.0 / f22) / gamma12).sqrt()))
}
