use num_complex::Complex64;

use super::{check_same_dim, CMatrix, I};
use crate::error::{Error, Result};

/// Linear map on `d×d` matrices stored as a `d²×d²` matrix acting on the
/// column-stacked vectorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim * dim, dim * dim) }
    }

    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec(&(&self.matrix * vec(rho)), self.dim)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * s }
    }

    pub fn add_assign(&mut self, other: &Superoperator) {
        self.matrix += &other.matrix;
    }

    pub fn compose(&self, other: &Superoperator) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * &other.matrix }
    }
}

impl std::ops::Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator { dim: self.dim, matrix: &self.matrix + &rhs.matrix }
    }
}

impl std::ops::Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator { dim: self.dim, matrix: &self.matrix - &rhs.matrix }
    }
}

/// Column-stacking vectorization.
pub fn vec(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &nalgebra::DVector<Complex64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// `ρ ↦ A ρ`.
pub fn lift_left(a: &CMatrix) -> Superoperator {
    let d = a.nrows();
    Superoperator { dim: d, matrix: CMatrix::identity(d, d).kronecker(a) }
}

/// `ρ ↦ ρ B`.
pub fn lift_right(b: &CMatrix) -> Superoperator {
    let d = b.nrows();
    Superoperator { dim: d, matrix: b.transpose().kronecker(&CMatrix::identity(d, d)) }
}

/// `ρ ↦ A ρ B`.
pub fn lift_sandwich(a: &CMatrix, b: &CMatrix) -> Result<Superoperator> {
    check_same_dim(a, b)?;
    Ok(Superoperator { dim: a.nrows(), matrix: b.transpose().kronecker(a) })
}

/// `ρ ↦ [H, ρ]`.
pub fn lift_commutator(h: &CMatrix) -> Superoperator {
    &lift_left(h) - &lift_right(h)
}

/// `ρ ↦ -i[H, ρ]`.
pub(crate) fn lift_hamiltonian(h: &CMatrix) -> Superoperator {
    lift_commutator(h).scale(-I)
}

/// `ρ ↦ c (A ρ B† − ½{B†A, ρ})`, the generic GKLS-type term.
pub(crate) fn lift_dissipative_term(a: &CMatrix, b: &CMatrix, c: Complex64) -> Superoperator {
    let bd = b.adjoint();
    let bda = &bd * a;
    let mut s = lift_sandwich(a, &bd).expect("same dimension");
    let half = Complex64::new(0.5, 0.0);
    s.matrix -= lift_left(&bda).matrix * half;
    s.matrix -= lift_right(&bda).matrix * half;
    s.scale(c)
}
