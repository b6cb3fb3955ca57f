//! Complex matrix-variate samplers: Gaussian, Wishart, t and F, plus the
//! Hermitian square root and the partitioned-F block operations.
//!
//! Dense linear algebra goes through `nalgebra`. All samplers come in two
//! flavours: a reusable struct that factors its covariance arguments once,
//! and a free function that builds one and draws a single sample.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::randvar::{ComplexChiSquare, RngStream};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_RATIO_TOL: f64 = 1e-12;

/// Hermitian positive definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianPd(ComplexMatrix);

impl HermitianPd {
    /// Validates Hermitian symmetry (relative Frobenius tolerance 1e-12) and
    /// positive definiteness (Cholesky succeeds).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let scale = m.norm();
        let asym = (&m - m.adjoint()).norm();
        if asym > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositiveDefinite(format!(
                "matrix is not Hermitian (relative asymmetry {:e})",
                asym / scale
            )));
        }
        let sym = hermitian_part(m);
        if sym.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite("Cholesky factorization failed".into()));
        }
        Ok(Self(sym))
    }

    pub fn identity(p: usize) -> Self {
        Self(ComplexMatrix::identity(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::NotPositiveDefinite("diagonal must be positive".into()));
        }
        let v = ComplexVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex64::new(d, 0.0)));
        Ok(Self(ComplexMatrix::from_diagonal(&v)))
    }

    /// Symmetrizes without checking definiteness. Used for sampler outputs
    /// that are PD by construction.
    pub(crate) fn from_hermitian_part(m: ComplexMatrix) -> Self {
        Self(hermitian_part(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Lower-triangular `L` with `L Lᴴ = self`.
    pub fn cholesky_factor(&self) -> Result<ComplexMatrix> {
        self.0
            .clone()
            .cholesky()
            .map(|c| c.unpack())
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
    }

    pub fn inverse(&self) -> Result<HermitianPd> {
        let chol = self
            .0
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
        Ok(Self::from_hermitian_part(chol.inverse()))
    }

    pub fn scaled(&self, factor: f64) -> Result<HermitianPd> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self(self.0.map(|z| z * factor)))
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    /// Entry `(i, i)`.
    pub fn diag(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }
}

/// `X Xᴴ`, accumulated on the lower triangle and mirrored. Exactly Hermitian.
pub fn gram(x: &ComplexMatrix) -> ComplexMatrix {
    let p = x.nrows();
    let mut s = vec![Complex64::ZERO; p * p];
    for col in x.column_iter() {
        let c = col.as_slice();
        for j in 0..p {
            let cj = c[j].conj();
            for (o, ci) in s[j * p + j..(j + 1) * p].iter_mut().zip(&c[j..]) {
                *o += ci * cj;
            }
        }
    }
    let mut m = ComplexMatrix::from_vec(p, p, s);
    for j in 1..p {
        for i in 0..j {
            m[(i, j)] = m[(j, i)].conj();
        }
    }
    m
}

/// Overwrites `b` with `L^{-H} b` for lower-triangular `L`.
fn solve_lower_adjoint(l: &ComplexMatrix, b: &mut ComplexMatrix) -> Result<()> {
    let p = l.nrows();
    let ls = l.as_slice();
    for col in b.column_iter_mut() {
        let mut col = col;
        let x = col.as_mut_slice();
        for i in (0..p).rev() {
            let li = &ls[i * p..(i + 1) * p];
            let mut acc = x[i];
            for (lji, xj) in li[i + 1..].iter().zip(&x[i + 1..]) {
                acc -= lji.conj() * xj;
            }
            let d = li[i].conj();
            if d == Complex64::ZERO {
                return Err(Error::NotPositiveDefinite("singular Wishart factor".into()));
            }
            x[i] = acc / d;
        }
    }
    Ok(())
}

fn hermitian_part(m: ComplexMatrix) -> ComplexMatrix {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

/// `Some(L)` with `L Lᴴ = cov`, or `None` when `cov` is the identity.
fn factor_unless_identity(cov: &HermitianPd) -> Result<Option<ComplexMatrix>> {
    if *cov.matrix() == ComplexMatrix::identity(cov.dim(), cov.dim()) {
        Ok(None)
    } else {
        cov.cholesky_factor().map(Some)
    }
}

fn standard_normal_matrix(rows: usize, cols: usize, stream: &mut RngStream) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| stream.complex_normal())
}

fn check_square(name: &str, m: &HermitianPd, p: usize) -> Result<()> {
    if m.dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {0}x{0}, expected {p}x{p}",
            m.dim()
        )));
    }
    Ok(())
}

/// Sampler for `CN_{p,n}(mean, row_cov, col_cov)`: `X = mean + A Z Bᴴ`.
#[derive(Clone, Debug)]
pub struct GaussianMatrixSampler {
    p: usize,
    n: usize,
    mean: Option<ComplexMatrix>,
    row_factor: Option<ComplexMatrix>,
    col_factor: Option<ComplexMatrix>,
}

impl GaussianMatrixSampler {
    pub fn new(
        p: usize,
        n: usize,
        mean: Option<&ComplexMatrix>,
        row_cov: &HermitianPd,
        col_cov: &HermitianPd,
    ) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if let Some(m) = mean {
            if m.shape() != (p, n) {
                return Err(Error::DimensionMismatch(format!(
                    "mean is {}x{}, expected {p}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        check_square("row covariance", row_cov, p)?;
        check_square("column covariance", col_cov, n)?;
        Ok(Self {
            p,
            n,
            mean: mean.filter(|m| m.iter().any(|z| *z != Complex64::ZERO)).cloned(),
            row_factor: factor_unless_identity(row_cov)?,
            col_factor: factor_unless_identity(col_cov)?,
        })
    }

    pub fn sample(&self, stream: &mut RngStream) -> ComplexMatrix {
        let z = standard_normal_matrix(self.p, self.n, stream);
        let z = match &self.col_factor {
            Some(b) => z * b.adjoint(),
            None => z,
        };
        let mut x = match &self.row_factor {
            Some(a) => a * z,
            None => z,
        };
        if let Some(m) = &self.mean {
            x += m;
        }
        x
    }
}

pub fn sample_complex_gaussian_matrix(
    p: usize,
    n: usize,
    mean: &ComplexMatrix,
    row_cov: &HermitianPd,
    col_cov: &HermitianPd,
    stream: &mut RngStream,
) -> Result<ComplexMatrix> {
    Ok(GaussianMatrixSampler::new(p, n, Some(mean), row_cov, col_cov)?.sample(stream))
}

#[derive(Clone, Debug)]
enum ScaleFactor {
    Diagonal(Vec<f64>),
    Full(ComplexMatrix),
}

/// Bartlett-decomposition sampler for the complex Wishart `CW_p(dof, scale)`.
#[derive(Clone, Debug)]
pub struct WishartSampler {
    p: usize,
    scale_factor: Option<ScaleFactor>,
    diag: Vec<ComplexChiSquare>,
}

impl WishartSampler {
    pub fn new(p: usize, dof: u32, scale: &HermitianPd) -> Result<Self> {
        check_square("scale", scale, p)?;
        let mut s = Self::identity(p, dof)?;
        s.scale_factor = factor_unless_identity(scale)?.map(|c| {
            if c.iter()
                .enumerate()
                .all(|(idx, z)| idx % (p + 1) == 0 || *z == Complex64::ZERO)
            {
                ScaleFactor::Diagonal(c.diagonal().iter().map(|z| z.re).collect())
            } else {
                ScaleFactor::Full(c)
            }
        });
        Ok(s)
    }

    pub fn identity(p: usize, dof: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("Wishart dimension must be positive"));
        }
        if (dof as usize) < p {
            return Err(Error::invalid(format!("Wishart needs dof >= p, got dof={dof}, p={p}")));
        }
        let diag = (0..p)
            .map(|i| ComplexChiSquare::new(dof - i as u32))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            p,
            scale_factor: None,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Lower-triangular `L` with positive diagonal such that `W = L Lᴴ`.
    pub fn sample_factor(&self, stream: &mut RngStream) -> ComplexMatrix {
        let p = self.p;
        let mut a = ComplexMatrix::zeros(p, p);
        for i in 0..p {
            a[(i, i)] = Complex64::new(self.diag[i].sample(stream).sqrt(), 0.0);
            for j in 0..i {
                a[(i, j)] = stream.complex_normal();
            }
        }
        match &self.scale_factor {
            Some(ScaleFactor::Full(c)) => c * a,
            Some(ScaleFactor::Diagonal(d)) => {
                for (i, di) in d.iter().enumerate() {
                    a.row_mut(i).scale_mut(*di);
                }
                a
            }
            None => a,
        }
    }

    pub fn sample(&self, stream: &mut RngStream) -> HermitianPd {
        let l = self.sample_factor(stream);
        HermitianPd::from_hermitian_part(gram(&l))
    }
}

pub fn sample_complex_wishart(p: usize, dof: u32, scale: &HermitianPd, stream: &mut RngStream) -> Result<HermitianPd> {
    Ok(WishartSampler::new(p, dof, scale)?.sample(stream))
}

/// Sampler for the complex matrix-variate t `CT_{p,n}(nu, mean, sigma, omega)`,
/// drawn as `X = mean + (W^{-1/2})ᴴ Y` with `W ~ CW_p(nu+p-1, sigma⁻¹)` and
/// `Y ~ CN_{p,n}(0, I, omega)`. The square root of `W` is its Bartlett
/// (Cholesky) factor.
#[derive(Clone, Debug)]
pub struct MatrixTSampler {
    n: usize,
    mean: Option<ComplexMatrix>,
    mixing: WishartSampler,
    col_factor: Option<ComplexMatrix>,
}

impl MatrixTSampler {
    pub fn new(
        p: usize,
        n: usize,
        nu_param: u32,
        mean: Option<&ComplexMatrix>,
        sigma: &HermitianPd,
        omega: &HermitianPd,
    ) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if nu_param == 0 {
            return Err(Error::invalid("matrix-t parameter must be >= 1"));
        }
        check_square("sigma", sigma, p)?;
        check_square("omega", omega, n)?;
        if let Some(m) = mean {
            if m.shape() != (p, n) {
                return Err(Error::DimensionMismatch(format!(
                    "mean is {}x{}, expected {p}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let mixing = WishartSampler::new(p, nu_param + p as u32 - 1, &sigma.inverse()?)?;
        Ok(Self {
            n,
            mean: mean.filter(|m| m.iter().any(|z| *z != Complex64::ZERO)).cloned(),
            mixing,
            col_factor: factor_unless_identity(omega)?,
        })
    }

    pub fn sample(&self, stream: &mut RngStream) -> Result<ComplexMatrix> {
        let l = self.mixing.sample_factor(stream);
        let y = standard_normal_matrix(self.mixing.dim(), self.n, stream);
        let mut x = match &self.col_factor {
            Some(b) => y * b.adjoint(),
            None => y,
        };
        // X = L^{-H} Y
        solve_lower_adjoint(&l, &mut x)?;
        if let Some(m) = &self.mean {
            x += m;
        }
        Ok(x)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sample_complex_matrix_t(
    p: usize,
    n: usize,
    nu_param: u32,
    mean: &ComplexMatrix,
    sigma: &HermitianPd,
    omega: &HermitianPd,
    stream: &mut RngStream,
) -> Result<ComplexMatrix> {
    MatrixTSampler::new(p, n, nu_param, Some(mean), sigma, omega)?.sample(stream)
}

/// Sampler for `CF_p(n1, n2)`: `F = S1^{1/2} S2⁻¹ S1^{1/2}` with the Hermitian
/// square root of `S1 ~ CW_p(n1, I)` and `S2 ~ CW_p(n2, I)`.
#[derive(Clone, Debug)]
pub struct FSampler {
    numerator: WishartSampler,
    denominator: WishartSampler,
}

impl FSampler {
    pub fn new(p: usize, n1: u32, n2: u32) -> Result<Self> {
        if (n2 as usize) < p {
            return Err(Error::invalid(format!("CF needs n2 >= p, got n2={n2}, p={p}")));
        }
        if (n1 as usize) < p {
            return Err(Error::invalid(format!("CF needs n1 >= p, got n1={n1}, p={p}")));
        }
        Ok(Self {
            numerator: WishartSampler::identity(p, n1)?,
            denominator: WishartSampler::identity(p, n2)?,
        })
    }

    pub fn sample(&self, stream: &mut RngStream) -> Result<HermitianPd> {
        let s1 = self.numerator.sample(stream);
        let l2 = self.denominator.sample_factor(stream);
        let root = hermitian_sqrt(&s1)?;
        // S2⁻¹ R = L2^{-H} L2^{-1} R
        let mut t = root.clone();
        if !l2.solve_lower_triangular_mut(&mut t) || !l2.ad_solve_lower_triangular_mut(&mut t) {
            return Err(Error::NotPositiveDefinite("singular Wishart factor".into()));
        }
        Ok(HermitianPd::from_hermitian_part(root * t))
    }
}

pub fn sample_complex_f(p: usize, n1: u32, n2: u32, stream: &mut RngStream) -> Result<HermitianPd> {
    FSampler::new(p, n1, n2)?.sample(stream)
}

/// Unique Hermitian square root, via eigendecomposition.
///
/// Rejects matrices whose smallest eigenvalue is below `1e-12` times the
/// largest.
pub fn hermitian_sqrt(m: &HermitianPd) -> Result<ComplexMatrix> {
    let eig = m.matrix().clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min < EIGEN_RATIO_TOL * max {
        return Err(Error::NumericallySingular {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(hermitian_part(scaled * u.adjoint()))
}

/// 2x2 block partition of an F matrix; `F11` is `r x r`, `F22` is `s x s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedF {
    pub f11: ComplexMatrix,
    pub f12: ComplexMatrix,
    pub f21: ComplexMatrix,
    pub f22: ComplexMatrix,
}

impl PartitionedF {
    pub fn r(&self) -> usize {
        self.f11.nrows()
    }

    pub fn s(&self) -> usize {
        self.f22.nrows()
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        let (r, s) = (self.r(), self.s());
        let mut m = ComplexMatrix::zeros(r + s, r + s);
        m.view_mut((0, 0), (r, r)).copy_from(&self.f11);
        m.view_mut((0, r), (r, s)).copy_from(&self.f12);
        m.view_mut((r, 0), (s, r)).copy_from(&self.f21);
        m.view_mut((r, r), (s, s)).copy_from(&self.f22);
        m
    }

    /// `T12 = F12 F22⁻¹`.
    pub fn t12(&self) -> Result<ComplexMatrix> {
        let chol = self
            .f22
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("F22 is singular".into()))?;
        // F12 F22⁻¹ = (F22⁻¹ F21)ᴴ since F22 is Hermitian.
        Ok(chol.solve(&self.f21).adjoint())
    }
}

pub fn partition_f(f: &HermitianPd, r: usize) -> Result<PartitionedF> {
    let p = f.dim();
    if r == 0 || r >= p {
        return Err(Error::invalid(format!(
            "partition size r={r} must satisfy 1 <= r < {p}"
        )));
    }
    let s = p - r;
    let m = f.matrix();
    Ok(PartitionedF {
        f11: m.view((0, 0), (r, r)).into_owned(),
        f12: m.view((0, r), (r, s)).into_owned(),
        f21: m.view((r, 0), (s, r)).into_owned(),
        f22: m.view((r, r), (s, s)).into_owned(),
    })
}

/// Schur complement `F1.2 = F11 - F12 F22⁻¹ F21`.
pub fn schur_f(pf: &PartitionedF) -> Result<HermitianPd> {
    let chol = pf
        .f22
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("F22 is singular".into()))?;
    let correction = &pf.f12 * chol.solve(&pf.f21);
    Ok(HermitianPd::from_hermitian_part(&pf.f11 - correction))
}
