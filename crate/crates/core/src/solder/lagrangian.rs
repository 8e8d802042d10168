use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{epsilon, metric, Mat};
use super::path::{Poly, PolyPath};
use crate::error::{Error, Result};
use crate::params::exact::{RationalChiral, RationalDho};
use crate::params::{ChiralParams, DhoParams};
use crate::scalar::Scalar;
use crate::wire::{self, MatrixWire};

/// `L = ½ ẋᵀ M ẋ + xᵀ A ẋ - ½ xᵀ K x`
///
/// Stored canonically: `M` and `K` symmetric, `A` antisymmetric. The
/// symmetric part of a raw `A` is `d/dt(½ xᵀ A_s x)` and is dropped on
/// construction, so two Lagrangians are equal up to a total derivative
/// exactly when their stored coefficients agree.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticLagrangian<S = Complex64> {
    m: Mat<S>,
    a: Mat<S>,
    k: Mat<S>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn sign<S: Scalar>(self) -> S {
        match self {
            Chirality::Plus => S::one(),
            Chirality::Minus => -S::one(),
        }
    }
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl<S: Scalar> QuadraticLagrangian<S> {
    /// Canonicalizes `m`, `a`, `k`; `labels` defaults to `x1..xn` when empty.
    pub fn new(m: Mat<S>, a: Mat<S>, k: Mat<S>, labels: Vec<String>) -> Result<Self> {
        let n = m.rows();
        for (name, x) in [("M", &m), ("A", &a), ("K", &k)] {
            if x.rows() != n || x.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    x.rows(),
                    x.cols()
                )));
            }
        }
        let labels = if labels.is_empty() {
            default_labels("x", n)
        } else {
            labels
        };
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {n} variables",
                labels.len()
            )));
        }
        Ok(Self {
            m: m.symmetric_part(),
            a: a.antisymmetric_part(),
            k: k.symmetric_part(),
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    /// `M`, coefficient of `½ ẋᵢ ẋⱼ`.
    pub fn kinetic(&self) -> &Mat<S> {
        &self.m
    }

    /// Antisymmetric `A`, coefficient of `xᵢ ẋⱼ`.
    pub fn coupling(&self) -> &Mat<S> {
        &self.a
    }

    /// `K`, coefficient of `-½ xᵢ xⱼ`.
    pub fn potential(&self) -> &Mat<S> {
        &self.k
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch("label count".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn is_first_order(&self) -> bool {
        self.m.iter().all(Scalar::is_zero)
    }

    /// Substitutes `x_old = T x_new` (time-independent `T`).
    pub fn change_variables(&self, t: &Mat<S>, labels: Vec<String>) -> Result<Self> {
        if t.rows() != self.n() {
            return Err(Error::DimensionMismatch("transformation rows".into()));
        }
        let tt = t.transpose();
        Self::new(
            &(&tt * &self.m) * t,
            &(&tt * &self.a) * t,
            &(&tt * &self.k) * t,
            labels,
        )
    }

    pub fn conj(&self) -> Self {
        Self {
            m: self.m.conj(),
            a: self.a.conj(),
            k: self.k.conj(),
            labels: self.labels.clone(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            m: self.m.scale(s),
            a: self.a.scale(s),
            k: self.k.scale(s),
            labels: self.labels.clone(),
        }
    }

    /// Largest coefficient difference across `M`, `A`, `K`.
    pub fn coefficient_deviation(&self, other: &Self) -> f64 {
        self.m
            .max_abs_diff(&other.m)
            .max(self.a.max_abs_diff(&other.a))
            .max(self.k.max_abs_diff(&other.k))
    }

    pub fn max_coefficient(&self) -> f64 {
        self.m.max_abs().max(self.a.max_abs()).max(self.k.max_abs())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> QuadraticLagrangian<T> {
        QuadraticLagrangian {
            m: self.m.map(f),
            a: self.a.map(f),
            k: self.k.map(f),
            labels: self.labels.clone(),
        }
    }

    pub fn to_complex(&self) -> QuadraticLagrangian<Complex64> {
        self.map(Scalar::to_complex)
    }

    pub(crate) fn raw_parts(&self) -> (&Mat<S>, &Mat<S>, &Mat<S>) {
        (&self.m, &self.a, &self.k)
    }
}

/// Two-variable composite form `(m/2) g ẋẋ - (γ/2) ε x ẋ - (k/2) g x x`.
pub fn composite_from<S: Scalar>(m: &S, gamma: &S, k: &S) -> QuadraticLagrangian<S> {
    let half = S::one() / S::from_i64(2);
    let g = metric::<S>();
    QuadraticLagrangian::new(
        g.scale(m),
        epsilon::<S>().scale(&(-(gamma.clone() * half))),
        g.scale(k),
        vec![],
    )
    .expect("2x2 blocks")
}

pub fn composite_lagrangian(p: &DhoParams) -> QuadraticLagrangian<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    composite_from(&c(p.m()), &c(p.gamma()), &c(p.k()))
}

pub fn composite_lagrangian_exact(
    p: &RationalDho,
) -> QuadraticLagrangian<num_rational::BigRational> {
    composite_from(&p.m, &p.gamma, &p.k)
}

/// `L± = ±(Γ/2) ε x ẋ - (k±/2) g x x`
pub fn chiral_from<S: Scalar>(sign: Chirality, gamma: &S, k: &S) -> QuadraticLagrangian<S> {
    let half = S::one() / S::from_i64(2);
    QuadraticLagrangian::new(
        Mat::zeros(2, 2),
        epsilon::<S>().scale(&(sign.sign::<S>() * gamma.clone() * half)),
        metric::<S>().scale(k),
        vec![],
    )
    .expect("2x2 blocks")
}

/// Member of the doublet. In the complex branch `L₋` is the coefficientwise
/// conjugate of `L₊`.
pub fn chiral_lagrangian(sign: Chirality, c: &ChiralParams) -> QuadraticLagrangian<Complex64> {
    let k = match sign {
        Chirality::Plus => c.k_plus,
        Chirality::Minus => c.k_minus,
    };
    chiral_from(sign, &c.gamma, &k)
}

pub fn chiral_lagrangian_exact(
    sign: Chirality,
    c: &RationalChiral,
) -> QuadraticLagrangian<num_rational::BigRational> {
    let k = match sign {
        Chirality::Plus => &c.k_plus,
        Chirality::Minus => &c.k_minus,
    };
    chiral_from(sign, &c.gamma, k)
}

/// Tolerance used by [`equivalent_mod_total_derivative`], relative to the
/// largest coefficient (or absolute when coefficients are below one).
pub const EQUIVALENCE_TOL: f64 = 1e-12;

/// Whether `l1 - l2` is a total time derivative. Returns the verdict and the
/// largest coefficient deviation.
pub fn equivalent_mod_total_derivative<S: Scalar>(
    l1: &QuadraticLagrangian<S>,
    l2: &QuadraticLagrangian<S>,
) -> Result<(bool, f64)> {
    if l1.n() != l2.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} variables",
            l1.n(),
            l2.n()
        )));
    }
    let dev = l1.coefficient_deviation(l2);
    let scale = l1.max_coefficient().max(l2.max_coefficient()).max(1.0);
    Ok((dev <= EQUIVALENCE_TOL * scale, dev))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &Mat<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn mat_path(m: &Mat<Complex64>, q: &PolyPath) -> PolyPath {
    PolyPath(
        (0..m.rows())
            .map(|i| (0..m.cols()).fold(Poly::zero(), |acc, j| acc.add(&q.0[j].scale(m[(i, j)]))))
            .collect(),
    )
}

fn path_dot(a: &PolyPath, b: &PolyPath) -> Poly {
    a.0.iter()
        .zip(&b.0)
        .fold(Poly::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

impl QuadraticLagrangian<Complex64> {
    /// Pointwise value at position `x` and velocity `v`.
    pub fn evaluate(&self, x: &[Complex64], v: &[Complex64]) -> Complex64 {
        let half = 0.5;
        dot(v, &mat_vec(&self.m, v)) * half + dot(x, &mat_vec(&self.a, v))
            - dot(x, &mat_vec(&self.k, x)) * half
    }

    /// `L(q(t), q̇(t))` as a polynomial in `t`.
    pub fn on_path(&self, q: &PolyPath) -> Poly {
        let v = q.derivative();
        path_dot(&v, &mat_path(&self.m, &v))
            .scale(Complex64::new(0.5, 0.0))
            .add(&path_dot(q, &mat_path(&self.a, &v)))
            .add(&path_dot(q, &mat_path(&self.k, q)).scale(Complex64::new(-0.5, 0.0)))
    }

    /// Exact action `∫₀¹ L dt` along a polynomial path.
    pub fn action(&self, q: &PolyPath) -> Complex64 {
        self.on_path(q).integral_unit()
    }

    /// Euler–Lagrange expression `∂L/∂q - d/dt ∂L/∂q̇ = 2Aq̇ - Kq - Mq̈`
    /// along a polynomial path.
    pub fn euler_lagrange(&self, q: &PolyPath) -> PolyPath {
        let v = q.derivative();
        let acc = v.derivative();
        let two_a = self.a.scale(&Complex64::new(2.0, 0.0));
        let mut out = mat_path(&two_a, &v);
        let kq = mat_path(&self.k, q);
        let ma = mat_path(&self.m, &acc);
        for i in 0..out.dim() {
            out.0[i] = out.0[i]
                .add(&kq.0[i].scale(Complex64::new(-1.0, 0.0)))
                .add(&ma.0[i].scale(Complex64::new(-1.0, 0.0)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: LagrangianWire = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_wire(&w)
    }

    pub fn to_wire(&self) -> LagrangianWire {
        let conv = |m: &Mat<Complex64>| -> MatrixWire {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| wire::pair(m[(i, j)])).collect())
                .collect()
        };
        LagrangianWire {
            n: self.n(),
            m: conv(&self.m),
            a: conv(&self.a),
            k: conv(&self.k),
            labels: self.labels.clone(),
        }
    }

    pub fn from_wire(w: &LagrangianWire) -> Result<Self> {
        let conv = |x: &MatrixWire, what: &str| -> Result<Mat<Complex64>> {
            let d = wire::wire_to_matrix(x, w.n, w.n, what)?;
            Ok(Mat::from_fn(w.n, w.n, |i, j| d[(i, j)]))
        };
        if w.n == 0 {
            return Err(Error::Parse("n must be positive".into()));
        }
        if w.labels.len() != w.n {
            return Err(Error::Parse(format!(
                "{} labels for n = {}",
                w.labels.len(),
                w.n
            )));
        }
        Self::new(
            conv(&w.m, "M")?,
            conv(&w.a, "A")?,
            conv(&w.k, "K")?,
            w.labels.clone(),
        )
    }
}

/// JSON shape `{n, M, A, K, labels}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianWire {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: MatrixWire,
    #[serde(rename = "A")]
    pub a: MatrixWire,
    #[serde(rename = "K")]
    pub k: MatrixWire,
    pub labels: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solder::path::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn composite_coefficients() {
        let l = composite_lagrangian(&DhoParams::new(1.0, 0.0, 1.0).unwrap());
        assert_eq!(l.kinetic(), &metric::<Complex64>());
        assert_eq!(l.coupling(), &Mat::zeros(2, 2));
        assert_eq!(l.potential(), &metric::<Complex64>());

        let l = composite_lagrangian(&DhoParams::new(1.0, 3.0, 2.0).unwrap());
        assert_eq!(l.coupling()[(0, 1)], c(-1.5, 0.0));
        assert_eq!(l.coupling()[(1, 0)], c(1.5, 0.0));
    }

    /// Oracle: the (x, y) form `m ẋẏ + (γ/2)(xẏ - ẋy) - kxy` evaluated by hand
    /// on x = t, y = 1, against the compact form on the hyperbolic path.
    #[test]
    fn composite_matches_xy_form_on_path() {
        let (m, gamma, k) = (1.0, 3.0, 2.0);
        let l = composite_lagrangian(&DhoParams::new(m, gamma, k).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // x1 = (x + y)/√2, x2 = (x - y)/√2 with x = t, y = 1
        let q = PolyPath(vec![
            Poly(vec![c(s, 0.0), c(s, 0.0)]),
            Poly(vec![c(-s, 0.0), c(s, 0.0)]),
        ]);
        for t in [0.0, 0.3, 1.0, 2.5] {
            let (x, y, xd, yd) = (t, 1.0, 1.0, 0.0);
            let want = m * xd * yd + 0.5 * gamma * (x * yd - xd * y) - k * x * y;
            let got = l.on_path(&q).eval(t);
            assert!(
                (got - c(want, 0.0)).norm() < 1e-14,
                "t={t}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn chiral_coefficients() {
        let cp = ChiralParams::real(1.0, -2.0, 1.0).unwrap();
        let l = chiral_lagrangian(Chirality::Plus, &cp);
        assert!(l.is_first_order());
        assert_eq!(l.coupling()[(0, 1)], c(0.5, 0.0));
        assert_eq!(l.potential()[(0, 0)], c(-2.0, 0.0));
        assert_eq!(l.potential()[(1, 1)], c(2.0, 0.0));

        let cc = ChiralParams::complex(1.0, c(1.0, 1.0)).unwrap();
        let lp = chiral_lagrangian(Chirality::Plus, &cc);
        let lm = chiral_lagrangian(Chirality::Minus, &cc);
        assert_eq!(lm, lp.conj());
        assert_eq!(lp.coupling()[(0, 1)], c(0.0, -0.5));
    }

    /// `-ig x₁ẋ₂ - (κ/2)(x₁² - x₂²)` differs from `L₊` by `d/dt(-(ig/2) x₁x₂)`.
    #[test]
    fn first_order_form_differs_by_total_derivative() {
        let (g, kappa) = (1.0, c(1.0, 1.0));
        let lp = chiral_lagrangian(Chirality::Plus, &ChiralParams::complex(g, kappa).unwrap());
        let q = PolyPath(vec![
            Poly(vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0)]),
            Poly(vec![c(-0.1, 0.2), c(0.7, -0.3)]),
        ]);
        let ig = c(0.0, g);
        let x1 = &q.0[0];
        let x2 = &q.0[1];
        let first_order = x1.mul(&x2.derivative()).scale(-ig).add(
            &x1.mul(x1)
                .add(&x2.mul(x2).scale(c(-1.0, 0.0)))
                .scale(-kappa * 0.5),
        );
        let boundary = x1.mul(x2).scale(-ig * 0.5).derivative();
        for t in [0.0, 0.4, 1.0] {
            let lhs = first_order.eval(t);
            let rhs = lp.on_path(&q).eval(t) + boundary.eval(t);
            assert!((lhs - rhs).norm() < 1e-14);
        }
        let raw = QuadraticLagrangian::new(
            Mat::zeros(2, 2),
            Mat::from_rows(vec![vec![c(0.0, 0.0), -ig], vec![c(0.0, 0.0), c(0.0, 0.0)]]),
            metric::<Complex64>().scale(&kappa),
            vec![],
        )
        .unwrap();
        assert!(equivalent_mod_total_derivative(&raw, &lp).unwrap().0);
    }

    #[test]
    fn equivalence_detects_scaling_and_total_derivatives() {
        let l = composite_lagrangian(&DhoParams::new(1.0, 3.0, 2.0).unwrap());
        let (eq, dev) = equivalent_mod_total_derivative(&l, &l.scale(&c(2.0, 0.0))).unwrap();
        assert!(!eq && dev > 0.5);

        // L + d/dt(x₁x₂) adds x₂ẋ₁ + x₁ẋ₂, a symmetric A
        let (m, a, k) = l.raw_parts();
        let shifted = QuadraticLagrangian::new(
            m.clone(),
            &a.clone() + &super::super::matrix::sigma_x(),
            k.clone(),
            vec![],
        )
        .unwrap();
        assert_eq!(
            equivalent_mod_total_derivative(&l, &shifted).unwrap(),
            (true, 0.0)
        );

        let three = QuadraticLagrangian::<Complex64>::new(
            Mat::zeros(3, 3),
            Mat::zeros(3, 3),
            Mat::zeros(3, 3),
            vec![],
        )
        .unwrap();
        assert!(matches!(
            equivalent_mod_total_derivative(&l, &three),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn json_wire_shape() {
        let l = composite_lagrangian(&DhoParams::new(1.0, 3.0, 2.0).unwrap());
        let s = l.to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["A"][0][1], serde_json::json!([-1.5, 0.0]));
        assert_eq!(v["labels"], serde_json::json!(["x1", "x2"]));
        assert_eq!(QuadraticLagrangian::from_json(&s).unwrap(), l);

        assert!(QuadraticLagrangian::from_json(
            r#"{"n":2,"M":[[[1,0]]],"A":[],"K":[],"labels":["a","b"]}"#
        )
        .is_err());
        assert!(
            QuadraticLagrangian::from_json(r#"{"n":0,"M":[],"A":[],"K":[],"labels":[]}"#).is_err()
        );
    }

    #[test]
    fn json_canonicalizes_symmetric_coupling() {
        let s = r#"{"n":2,"M":[[[0,0],[0,0]],[[0,0],[0,0]]],"A":[[[0,0],[2,0]],[[0,0],[0,0]]],"K":[[[1,0],[0,0]],[[0,0],[-1,0]]],"labels":["x1","x2"]}"#;
        let l = QuadraticLagrangian::from_json(s).unwrap();
        assert_eq!(l.coupling()[(0, 1)], c(1.0, 0.0));
        assert_eq!(l.coupling()[(1, 0)], c(-1.0, 0.0));
    }
}
