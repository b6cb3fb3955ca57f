//! Special functions, quadrature and closed-form densities and means.

pub mod densities;
pub mod hypergeometric;
pub mod quad;
pub mod special;

pub use densities::{
    gaussian_pfa, gaussian_pfa_threshold, mean_rho_gaussian, mean_rho_given_f1, mean_rho_student, pdf_beta_gaussian,
    pdf_f1, pdf_f2, pdf_f22, pdf_rho_gaussian, pdf_rho_given_f1, pdf_rho_student, pdf_t12_marginal, pdf_t12_norm_sq,
};
pub use hypergeometric::{hyp2f1, hyp3f2_unit, ln_hyp2f1, SeriesResult};
pub use quad::{integrate, integrate_half_line, QuadResult};
pub use special::{beta_fn, ln_beta, ln_gamma};
