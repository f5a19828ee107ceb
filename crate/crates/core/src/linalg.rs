//! Dense complex helpers on top of nalgebra.
//!
//! nalgebra's fast gemm path only covers real scalars, so complex products
//! go through four real products on split real/imaginary parts.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::{QelmError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A complex matrix stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn from_complex(m: &CMatrix) -> Self {
        Self {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    pub fn to_complex(&self) -> CMatrix {
        self.re.zip_map(&self.im, C64::new)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            re: DMatrix::identity(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn mul(&self, rhs: &SplitMatrix) -> SplitMatrix {
        let mut re = &self.re * &rhs.re;
        re.gemm(-1.0, &self.im, &rhs.im, 1.0);
        let mut im = &self.re * &rhs.im;
        im.gemm(1.0, &self.im, &rhs.re, 1.0);
        SplitMatrix { re, im }
    }
}

pub fn complex_matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    SplitMatrix::from_complex(a)
        .mul(&SplitMatrix::from_complex(b))
        .to_complex()
}

/// Largest `|a_ij - b_ij|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |M - M†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `max |U†U - I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&complex_matmul(&u.adjoint(), u), &CMatrix::identity(n, n))
}

/// `max |AB - BA|`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs_diff(&complex_matmul(a, b), &complex_matmul(b, a))
}

pub fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix, eigenvalues
/// ascending. Real symmetric inputs take the cheaper real path.
pub fn hermitian_eigen(h: &CMatrix, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(QelmError::Linalg(format!(
            "eigendecomposition of non-square {}x{} matrix",
            h.nrows(),
            h.ncols()
        )));
    }
    let herm = hermiticity_error(h);
    if herm > tol {
        return Err(QelmError::Linalg(format!(
            "matrix is not Hermitian (max |H - H†| = {herm:.3e})"
        )));
    }
    let n = h.nrows();
    let (values, vectors) = if is_real(h) {
        let real = h.map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, 0)
            .ok_or_else(|| QelmError::Linalg("symmetric eigensolver did not converge".into()))?;
        (eig.eigenvalues, eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
            .ok_or_else(|| QelmError::Linalg("Hermitian eigensolver did not converge".into()))?;
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

/// Eigenvalues only, ascending.
pub fn hermitian_spectrum(h: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(h, 1e-10).map(|(v, _)| v)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
