use crate::scalar::Scalar;

/// Small dense row-major matrix over a [`Scalar`].
///
/// nalgebra is not used here because the elimination has to run over
/// `BigRational`, which does not implement its `ComplexField`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// `(A + Aᵀ)/2`
    pub fn symmetric_part(&self) -> Self {
        let half = S::one() / S::from_i64(2);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)].clone() + self[(j, i)].clone()) * half.clone()
        })
    }

    /// `(A - Aᵀ)/2`
    pub fn antisymmetric_part(&self) -> Self {
        let half = S::one() / S::from_i64(2);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)].clone() - self[(j, i)].clone()) * half.clone()
        })
    }

    pub fn extract(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat<S>) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Largest entrywise difference magnitude; `INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = &S> {
        self.data.iter()
    }

    /// Solves `self · X = rhs` by Gauss–Jordan elimination with partial
    /// pivoting on magnitude. Returns `None` when a pivot magnitude falls at or
    /// below `singular_tol` (use `0.0` for exact arithmetic).
    pub fn solve(&self, rhs: &Mat<S>, singular_tol: f64) -> Option<Mat<S>> {
        assert!(self.is_square() && rhs.rows == self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for c in 0..n {
            let p =
                (c..n).max_by(|&i, &j| a[(i, c)].magnitude().total_cmp(&a[(j, c)].magnitude()))?;
            if a[(p, c)].is_zero() || a[(p, c)].magnitude() <= singular_tol {
                return None;
            }
            a.swap_rows(c, p);
            b.swap_rows(c, p);
            let pivot = a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = a[(c, j)].clone() / pivot.clone();
            }
            for j in 0..b.cols {
                b[(c, j)] = b[(c, j)].clone() / pivot.clone();
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for j in 0..n {
                    a[(r, j)] = a[(r, j)].clone() - f.clone() * a[(c, j)].clone();
                }
                for j in 0..b.cols {
                    b[(r, j)] = b[(r, j)].clone() - f.clone() * b[(c, j)].clone();
                }
            }
        }
        Some(b)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl Mat<num_complex::Complex64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<num_complex::Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> std::ops::Add for &Mat<S> {
    type Output = Mat<S>;
    fn add(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + rhs[(i, j)].clone()
        })
    }
}

impl<S: Scalar> std::ops::Sub for &Mat<S> {
    type Output = Mat<S>;
    fn sub(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - rhs[(i, j)].clone()
        })
    }
}

impl<S: Scalar> std::ops::Mul for &Mat<S> {
    type Output = Mat<S>;
    fn mul(self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, rhs.rows);
        Mat::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * rhs[(k, j)].clone();
            }
            acc
        })
    }
}

/// Pseudo-Euclidean metric `diag(1, -1)`.
pub fn metric<S: Scalar>() -> Mat<S> {
    Mat::from_rows(vec![vec![S::one(), S::zero()], vec![S::zero(), -S::one()]])
}

/// Antisymmetric unit `ε` with `ε₁₂ = 1`.
pub fn epsilon<S: Scalar>() -> Mat<S> {
    Mat::from_rows(vec![vec![S::zero(), S::one()], vec![-S::one(), S::zero()]])
}

/// First Pauli matrix.
pub fn sigma_x<S: Scalar>() -> Mat<S> {
    Mat::from_rows(vec![vec![S::zero(), S::one()], vec![S::one(), S::zero()]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn exact_solve() {
        let a = Mat::from_rows(vec![vec![q(0), q(2)], vec![q(3), q(1)]]);
        let b = Mat::from_rows(vec![vec![q(4)], vec![q(5)]]);
        let x = a.solve(&b, 0.0).unwrap();
        assert_eq!(&a * &x, b);
    }

    #[test]
    fn singular_is_none() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(a.solve(&Mat::identity(2), 1e-12).is_none());
    }

    #[test]
    fn structure_constants() {
        let g = metric::<f64>();
        let e = epsilon::<f64>();
        // g ε = σ relates the two-form and the SU(1,1) generator
        assert_eq!(&g * &e, sigma_x());
        assert_eq!(e.antisymmetric_part(), e);
        assert_eq!(e.symmetric_part(), Mat::zeros(2, 2));
    }
}
