//! Polynomial test paths.
//!
//! Quadratic Lagrangians evaluated on polynomial paths are polynomials in
//! `t`, so actions over `[0, 1]` integrate exactly and Euler–Lagrange
//! expressions can be formed by exact differentiation.

use num_complex::Complex64;
use rand::Rng;

/// Dense polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn zero() -> Self {
        Poly(vec![])
    }

    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// `∫₀¹ p(t) dt`
    pub fn integral_unit(&self) -> Complex64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &c)| c / (i as f64 + 1.0))
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Poly(self.0.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Self {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly(
            (0..n)
                .map(|i| *self.0.get(i).unwrap_or(&zero) + *other.0.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Self {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Vector-valued polynomial path `q(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPath(pub Vec<Poly>);

impl PolyPath {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Random path with complex coefficients of modulus ≤ 1.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, degree: usize) -> Self {
        PolyPath(
            (0..dim)
                .map(|_| {
                    Poly(
                        (0..=degree)
                            .map(|_| {
                                Complex64::new(
                                    rng.random_range(-0.7..0.7),
                                    rng.random_range(-0.7..0.7),
                                )
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn derivative(&self) -> Self {
        PolyPath(self.0.iter().map(Poly::derivative).collect())
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        self.0.iter().map(|p| p.eval(t)).collect()
    }

    pub fn add(&self, other: &PolyPath) -> Self {
        assert_eq!(self.dim(), other.dim());
        PolyPath(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }
}
