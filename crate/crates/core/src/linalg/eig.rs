use num_complex::Complex64;

use super::{max_abs, CMatrix, HermitianOperator};
use crate::error::Result;

const MAX_SWEEPS: usize = 100;
const REL_THRESHOLD: f64 = 1e-14;

/// A distinct eigenvalue together with its spectral projector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenLevel {
    pub value: f64,
    pub projector: CMatrix,
    pub multiplicity: usize,
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors. Only the Hermitian part of `h` is used.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let mut a = (h + h.adjoint()).scale(0.5);
    let mut v = CMatrix::identity(n, n);
    let threshold = REL_THRESHOLD * max_abs(&a);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= threshold || mag == 0.0 {
                    continue;
                }
                rotated = true;
                rotate(&mut a, &mut v, p, q, apq, mag);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// One rotation zeroing `a[(p,q)]`: a phase on column `q` makes the pivot
/// real, then a real Jacobi rotation annihilates it.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, apq: Complex64, mag: f64) {
    let n = a.nrows();
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

/// Distinct eigenvalues with spectral projectors, ascending.
///
/// Sorted eigenvalues are merged by single linkage: consecutive values whose
/// gap is at most `group_tol` share a level. The level value is the mean of its
/// members (weighted by multiplicity) and the projector is the summed rank-one
/// projectors.
pub fn hermitian_eig(h: &HermitianOperator, group_tol: f64) -> Vec<EigenLevel> {
    let (values, vectors) = eigh(h.matrix());
    group_levels(&values, &vectors, group_tol.max(0.0))
}

pub(crate) fn group_levels(values: &[f64], vectors: &CMatrix, group_tol: f64) -> Vec<EigenLevel> {
    let n = values.len();
    let mut levels: Vec<EigenLevel> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= group_tol {
            end += 1;
        }
        let cols = vectors.columns(start, end - start);
        let projector = cols * cols.adjoint();
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        levels.push(EigenLevel { value: mean, projector, multiplicity: end - start });
        start = end;
    }
    levels
}

/// Convenience: decomposes and validates Hermiticity first.
pub(crate) fn checked_eig(m: &CMatrix, group_tol: f64) -> Result<Vec<EigenLevel>> {
    let h = HermitianOperator::new(m.clone())?;
    Ok(hermitian_eig(&h, group_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows, identity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(n, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&m + m.adjoint()).scale(0.5)
    }

    #[test]
    fn sigma_z_levels() {
        let sz = HermitianOperator::new(from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]])).unwrap();
        let levels = hermitian_eig(&sz, 0.0);
        assert_eq!(levels.len(), 2);
        assert_eq!(levels[0].value, -1.0);
        assert_eq!(levels[1].value, 1.0);
        assert_eq!(levels[0].projector[(0, 0)], c64(1.0, 0.0));
        assert_eq!(levels[1].projector[(1, 1)], c64(1.0, 0.0));
    }

    #[test]
    fn identity_is_one_level() {
        let id = HermitianOperator::new(identity(3)).unwrap();
        let levels = hermitian_eig(&id, 0.0);
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].value, 1.0);
        assert_eq!(levels[0].multiplicity, 3);
        assert!(max_abs(&(&levels[0].projector - identity(3))) < 1e-15);
    }

    #[test]
    fn reconstruction_and_completeness_random() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 7);
            let h = random_hermitian(n, seed);
            let levels = hermitian_eig(&HermitianOperator::new(h.clone()).unwrap(), 0.0);
            let mut sum = CMatrix::zeros(n, n);
            let mut rebuilt = CMatrix::zeros(n, n);
            for (j, lj) in levels.iter().enumerate() {
                sum += &lj.projector;
                rebuilt += lj.projector.scale(lj.value);
                for (k, lk) in levels.iter().enumerate() {
                    let prod = &lj.projector * &lk.projector;
                    let expected = if j == k { lj.projector.clone() } else { CMatrix::zeros(n, n) };
                    assert!(max_abs(&(prod - expected)) < 1e-10);
                }
            }
            assert!(max_abs(&(sum - identity(n))) < 1e-10);
            assert!(max_abs(&(rebuilt - &h)) < 1e-10 * max_abs(&h).max(1.0));
            for w in levels.windows(2) {
                assert!(w[0].value < w[1].value);
            }
        }
    }

    #[test]
    fn grouping_merges_close_values() {
        let h =
            HermitianOperator::new(from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.1, 0.0], &[0.0, 0.0, 5.0]])).unwrap();
        let levels = hermitian_eig(&h, 0.2);
        assert_eq!(levels.len(), 2);
        assert!((levels[0].value - 1.05).abs() < 1e-15);
        assert_eq!(levels[0].multiplicity, 2);
    }

    #[test]
    fn two_qubit_hamiltonian_eigenvalues() {
        // E1 σz1 + E2 σz2 + J σx1 σx2 with E1 = E2 = 50, J = 2 in the |q1 q2⟩ basis.
        let (e, j) = (50.0, 2.0);
        let h = from_real_rows(&[
            &[-2.0 * e, 0.0, 0.0, j],
            &[0.0, 0.0, j, 0.0],
            &[0.0, j, 0.0, 0.0],
            &[j, 0.0, 0.0, 2.0 * e],
        ]);
        let (vals, _) = eigh(&h);
        let big = (100.0f64 * 100.0 + 4.0).sqrt();
        let expected = [-big, -2.0, 2.0, big];
        for (v, x) in vals.iter().zip(expected) {
            assert!((v - x).abs() < 1e-12, "{v} vs {x}");
        }
        assert!((big - 100.0200).abs() < 1e-4);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(checked_eig(&m, 0.0).is_err());
    }
}
