//! Dense non-hermitian eigensolver: complex Schur form followed by
//! triangular back-substitution.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues and unit-norm right eigenvectors (columns), in Schur order.
pub fn right_eigen(h: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = h.nrows();
    let schur = Schur::try_new(h.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::VerificationFailed("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let norm = t
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * norm;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        let mut y = DVector::<Complex64>::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut denom = t[(i, i)] - t[(k, k)];
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[i] = -s / denom;
        }
        let v = &q * y;
        let len = v.norm();
        vectors.set_column(k, &(v / Complex64::new(len, 0.0)));
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_and_general() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 1.0),
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(0.5, 0.0),
                c(-1.0, 0.3),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(2.0, -1.0),
                c(3.0, 0.0),
            ],
        );
        let (vals, vecs) = right_eigen(&h).unwrap();
        for k in 0..3 {
            let v = vecs.column(k);
            assert!((&h * v - v * vals[k]).norm() < 1e-13);
        }
        let trace: Complex64 = vals.iter().sum();
        assert!((trace - h.trace()).norm() < 1e-13);
    }
}
