//! Exact arithmetic for words in the truncated ladder operators.
//!
//! Every product of `a` and `ã = aᵀ` has entries of the form
//! `cᵢⱼ √(hi!/lo!)` with `cᵢⱼ` an integer, `lo = min(i, j)`,
//! `hi = max(i, j)`. The set is closed under multiplication, so commutator
//! identities can be decided by integer comparison.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadicalMatrix {
    dim: usize,
    coeff: Vec<BigInt>,
}

/// `∏_{m=lo+1}^{hi} m`
fn falling(lo: usize, hi: usize) -> BigInt {
    (lo + 1..=hi).fold(BigInt::one(), |acc, m| acc * m)
}

impl RadicalMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            coeff: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.coeff[i * dim + i] = BigInt::one();
        }
        m
    }

    /// `a|n⟩ = √n |n-1⟩`
    pub fn lowering(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for n in 1..dim {
            m.coeff[(n - 1) * dim + n] = BigInt::one();
        }
        m
    }

    pub fn raising(dim: usize) -> Self {
        Self::lowering(dim).transpose()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Integer coefficient of entry `(i, j)`.
    pub fn coefficient(&self, i: usize, j: usize) -> &BigInt {
        &self.coeff[i * self.dim + j]
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.coeff[j * d + i] = self.coeff[i * d + j].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: i64) -> Self {
        Self {
            dim: self.dim,
            coeff: self.coeff.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            coeff: self
                .coeff
                .iter()
                .zip(&other.coeff)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let x = &self.coeff[i * d + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let y = &other.coeff[k * d + j];
                    if y.is_zero() {
                        continue;
                    }
                    let (lo, hi) = (i.min(j), i.max(j));
                    // √(r(i,k)) √(r(k,j)) = f · √(r(i,j))
                    let f = if k < lo {
                        falling(k, lo)
                    } else if k > hi {
                        falling(hi, k)
                    } else {
                        BigInt::one()
                    };
                    out.coeff[i * d + j] += x * y * f;
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Nonzero entries as `(i, j)`, row-major.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let d = self.dim;
        (0..d * d)
            .filter(|&idx| !self.coeff[idx].is_zero())
            .map(|idx| (idx / d, idx % d))
            .collect()
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim;
        let roots: Vec<f64> = (0..d).map(|m| (m as f64).sqrt()).collect();
        DMatrix::from_fn(d, d, |i, j| {
            let c = &self.coeff[i * d + j];
            if c.is_zero() {
                return Complex64::new(0.0, 0.0);
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let radical: f64 = roots[lo + 1..=hi].iter().product();
            Complex64::new(c.to_f64().unwrap_or(f64::NAN) * radical, 0.0)
        })
    }
}
