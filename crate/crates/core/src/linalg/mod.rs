//! Dense complex matrices, Hermitian eigendecomposition, matrix exponential,
//! trace norms and the vectorized (superoperator) algebra.
//!
//! Vectorization is column stacking throughout: `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
//! Column-major `nalgebra` storage means `vec(ρ)` is exactly `ρ.as_slice()`.

mod eig;
mod expm;
mod superop;

pub(crate) use eig::checked_eig;
pub use eig::{eigh, hermitian_eig, EigenLevel};
pub use expm::matrix_exp;
pub use superop::{lift_commutator, lift_left, lift_right, lift_sandwich, unvec, vec, Superoperator};
pub(crate) use superop::{lift_dissipative_term, lift_hamiltonian};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
}

/// `|i⟩⟨j|` in dimension `dim`.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(dim);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &nalgebra::DVector<Complex64>, b: &nalgebra::DVector<Complex64>) -> CMatrix {
    a * b.adjoint()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok(())
}

/// Hermitian matrix. Asymmetry is bounded by `1e-12 × max|M|` at construction
/// and the stored matrix is symmetrized exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let scale = max_abs(&m);
        let asymmetry = max_abs(&(&m - m.adjoint()));
        if asymmetry > Self::TOLERANCE * scale {
            return Err(Error::NotHermitian { asymmetry, scale });
        }
        Ok(Self(hermitian_part(&m)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl AsRef<CMatrix> for HermitianOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite at
/// construction. States produced by propagation skip the positivity and trace
/// checks; those are monitored instead.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const TRACE_TOLERANCE: f64 = 1e-10;
    pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(m).map_err(|e| Error::InvalidState(format!("not Hermitian: {e}")))?;
        let tr = trace(h.matrix()).re;
        if (tr - 1.0).abs() > Self::TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let (vals, _) = eigh(h.matrix());
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -Self::POSITIVITY_TOLERANCE {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(Self(h.into_matrix()))
    }

    /// Pure state `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &nalgebra::DVector<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = psi / c64(n, 0.0);
        Self::new(outer(&v, &v))
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidParameter(format!("basis index {k} out of range for dim {dim}")));
        }
        Ok(Self(ket_bra(dim, k, k)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(identity(dim).scale(1.0 / dim as f64))
    }

    pub(crate) fn from_propagated(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = eigh(&hermitian_part(&self.0));
        vals.first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        trace(&self.0).re
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.0 * &self.0)).re
    }
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// `½ Σ |λ_k(a − b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same_dim(a.matrix(), b.matrix())?;
    let diff = hermitian_part(&(a.matrix() - b.matrix()));
    let (vals, _) = eigh(&diff);
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn general_eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.is_empty() {
        return Vec::new();
    }
    let (_, t) = m.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}
