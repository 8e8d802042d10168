//! JSON wire conventions shared by every exported type: complex numbers are
//! `[re, im]` pairs and matrices are arrays of rows.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexPair = [f64; 2];
pub type MatrixWire = Vec<Vec<ComplexPair>>;

/// Largest dimension accepted from untrusted JSON.
pub const MAX_WIRE_DIM: usize = 1024;

pub fn pair(c: Complex64) -> ComplexPair {
    [c.re, c.im]
}

pub fn unpair(p: ComplexPair) -> Result<Complex64> {
    if p[0].is_finite() && p[1].is_finite() {
        Ok(Complex64::new(p[0], p[1]))
    } else {
        Err(Error::Parse("non-finite complex entry".into()))
    }
}

pub fn matrix_to_wire(m: &DMatrix<Complex64>) -> MatrixWire {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

/// Validates shape `rows × cols` and finiteness.
pub fn wire_to_matrix(
    w: &MatrixWire,
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<DMatrix<Complex64>> {
    if rows > MAX_WIRE_DIM || cols > MAX_WIRE_DIM {
        return Err(Error::Parse(format!(
            "{what}: dimension exceeds {MAX_WIRE_DIM}"
        )));
    }
    if w.len() != rows || w.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{what}: expected a {rows}x{cols} matrix"
        )));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in w.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            m[(i, j)] = unpair(p).map_err(|e| Error::Parse(format!("{what}[{i}][{j}]: {e}")))?;
        }
    }
    Ok(m)
}
