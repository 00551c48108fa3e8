//! Dense complex linear algebra at small dimension.
//!
//! [`ComplexMatrix`] and [`ComplexVector`] are thin, always-finite wrappers
//! around `nalgebra` storage. [`DensityMatrix`] can only be obtained through
//! [`validate_density`] or constructors that guarantee Hermiticity, positivity
//! and unit trace.
//!
//! Index conventions for composite systems follow the Kronecker product:
//! the first factor is the major index, so row `(i, k)` of `A ⊗ B` is
//! `i * B.rows() + k`.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for Hermiticity, trace and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest side length of any matrix built by this crate (quanton dim × detector dim).
pub const MAX_DIM: usize = 1024;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn all_finite<'a>(mut entries: impl Iterator<Item = &'a Complex64>) -> bool {
    entries.all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    Ok(())
}

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &entries)
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        if !all_finite(inner.iter()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { inner })
    }

    /// Builds a matrix entry by entry. The closure must return finite values.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let inner = DMatrix::from_fn(rows, cols, f);
        debug_assert!(
            all_finite(inner.iter()),
            "from_fn produced a non-finite entry"
        );
        Self { inner }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &ComplexVector, b: &ComplexVector) -> Self {
        Self::from_fn(a.dim(), b.dim(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.diagonal().iter().copied().sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols(),
                actual: rhs.rows(),
            });
        }
        Ok(Self {
            inner: &self.inner * &rhs.inner,
        })
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols() != v.dim() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols(),
                actual: v.dim(),
            });
        }
        Ok(ComplexVector {
            inner: &self.inner * &v.inner,
        })
    }

    /// Entrywise maximum of `|self - other|`; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.inner.shape() != other.inner.shape() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |m - m†|`
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U†U - I|`
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.inner.adjoint() * &self.inner;
        let n = self.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense complex column vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    inner: DVector<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument(
                "vector dimension must be positive".into(),
            ));
        }
        if !all_finite(entries.iter()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self {
            inner: DVector::from_vec(entries),
        })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `index`-th computational basis vector.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut inner = DVector::zeros(dim);
        inner[index] = ONE;
        Self { inner }
    }

    pub(crate) fn from_dvector(inner: DVector<Complex64>) -> Self {
        debug_assert!(all_finite(inner.iter()));
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.inner.as_slice()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.inner.iter()
    }

    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(
                "cannot normalize the zero vector".into(),
            ));
        }
        Ok(Self {
            inner: &self.inner / Complex64::new(norm, 0.0),
        })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "inner product of vectors with different dimensions"
        );
        self.inner.dotc(&other.inner)
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.inner[i]
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// `|v⟩⟨v|` for a normalized vector.
    pub fn pure(v: &ComplexVector) -> Result<Self> {
        let deviation = (v.norm() - 1.0).abs();
        if deviation > DEFAULT_TOL {
            return Err(Error::NotNormalized {
                what: "state vector",
                deviation,
            });
        }
        check_dim(v.dim())?;
        Ok(Self {
            matrix: ComplexMatrix::outer(v, v),
        })
    }

    /// `I / n`
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        check_dim(n)?;
        Ok(Self {
            matrix: ComplexMatrix::identity(n).scale(Complex64::new(1.0 / n as f64, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// Real parts of the diagonal (populations).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        let m = self.matrix.as_dmatrix();
        m.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Kronecker product `a ⊗ b` with `a` as the major index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().saturating_mul(b.rows());
    let cols = a.cols().saturating_mul(b.cols());
    check_dim(rows)?;
    check_dim(cols)?;
    let br = b.rows();
    let bc = b.cols();
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    }))
}

/// Traces out the second factor of a `(dim_first · dim_second)`-sided matrix.
pub fn partial_trace_second(
    m: &ComplexMatrix,
    dim_first: usize,
    dim_second: usize,
) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if dim_first == 0 || dim_second == 0 {
        return Err(Error::InvalidArgument(
            "subsystem dimensions must be positive".into(),
        ));
    }
    let side = dim_first.saturating_mul(dim_second);
    if m.rows() != side {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: side,
            actual: m.rows(),
        });
    }
    Ok(ComplexMatrix::from_fn(dim_first, dim_first, |i, j| {
        (0..dim_second)
            .map(|k| m[(i * dim_second + k, j * dim_second + k)])
            .sum()
    }))
}

/// Eigenvalues (descending) and orthonormal eigenvectors of the Hermitian part of `m`.
pub(crate) fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<ComplexVector>)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let eig = SymmetricEigen::try_new(m.hermitian_part(), f64::EPSILON, 10_000)
        .ok_or(Error::EigenNonConvergence)?;
    let values = eig.eigenvalues;
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenNonConvergence);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let vectors = order
        .iter()
        .map(|&k| ComplexVector::from_dvector(eig.eigenvectors.column(k).into_owned()))
        .collect();
    Ok((order.iter().map(|&k| values[k]).collect(), vectors))
}

/// Accepts `m` as a density matrix if it is Hermitian, unit-trace and PSD within `tol`.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero and the result is
/// renormalized to unit trace; otherwise the input is returned unchanged.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    check_dim(m.rows())?;
    let hermiticity = m.hermiticity_defect();
    if hermiticity > tol {
        return Err(Error::NotHermitian(hermiticity));
    }
    let trace_defect = (m.trace() - ONE).norm();
    if trace_defect > tol {
        return Err(Error::NotUnitTrace(trace_defect));
    }
    let (values, vectors) = hermitian_eigen(m)?;
    let min = values.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotPsd(min));
    }
    if min >= 0.0 {
        return Ok(DensityMatrix { matrix: m.clone() });
    }
    let clamped: Vec<f64> = values.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let n = m.rows();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for (&w, v) in clamped.iter().zip(&vectors) {
        if w > 0.0 {
            let col = &v.inner;
            acc += col * col.adjoint() * Complex64::new(w / total, 0.0);
        }
    }
    Ok(DensityMatrix {
        matrix: ComplexMatrix::from_dmatrix(acc)?,
    })
}

/// `ρ = Σ r_k |v_k⟩⟨v_k|` with `r_k` descending.
///
/// Degenerate eigenspaces come back in whatever orthonormal basis the
/// eigensolver produced.
pub fn spectral_decompose(rho: &DensityMatrix) -> Result<Vec<(f64, ComplexVector)>> {
    let (values, vectors) = hermitian_eigen(rho.matrix())?;
    Ok(values
        .into_iter()
        .map(|x| x.max(0.0))
        .zip(vectors)
        .collect())
}
