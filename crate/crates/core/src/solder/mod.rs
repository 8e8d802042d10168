//! Quadratic Lagrangians and the soldering of the chiral doublet.
//!
//! Two independent routes fuse `L₊(y)` and `L₋(z)` into the composite
//! oscillator:
//!
//! * [`solder_auxiliary`] gauges `δy = δz = δB = Λ(t)` with an auxiliary
//!   field, `L(y,z,B) = L₊(y) + L₋(z) - Bᵀ(J₊(y) + J₋(z)) - ½ Bᵀ(K₊ + K₋)B`,
//!   and eliminates `B` through its algebraic equation of motion.
//! * [`solder_direct`] substitutes `z = y - x` and eliminates `y`, which
//!   has no kinetic term once the opposite chiralities cancel.
//!
//! With `K± = k± g` the `B` quadratic term is `(k₊ + k₋)` contracted with
//! the pseudo-Euclidean metric. Only that contraction makes `L(y,z,B)`
//! gauge invariant and leaves a residual depending on `y - z` alone.
//!
//! Elimination is a linear solve on coefficient matrices. It runs unchanged
//! over `BigRational`, which makes the real branch exact.

pub mod lagrangian;
pub mod matrix;
pub mod path;

use num_complex::Complex64;

pub use lagrangian::{
    chiral_from, chiral_lagrangian, chiral_lagrangian_exact, composite_from, composite_lagrangian,
    composite_lagrangian_exact, equivalent_mod_total_derivative, Chirality, LagrangianWire,
    QuadraticLagrangian,
};
use matrix::Mat;
use path::PolyPath;

use crate::error::{Error, Result};
use crate::params::{identify, DhoParams};
use crate::scalar::Scalar;

/// Relative tolerance for structural checks in floating point. Exact
/// arithmetic yields exact zeros, so the same code path is exact there.
pub const SOLDER_TOL: f64 = 1e-12;

/// Pivot threshold (relative) below which `K_BB` is declared singular.
const SINGULAR_TOL: f64 = 1e-14;

/// The identification `(m, γ, k)` over the working field.
#[derive(Debug, Clone, PartialEq)]
pub struct Identified<S> {
    pub m: S,
    pub gamma: S,
    pub k: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolderReport<S = Complex64> {
    /// Residual Lagrangian in `x = y - z`.
    pub residual: QuadraticLagrangian<S>,
    pub identified: Identified<S>,
    /// Coefficient deviation of `residual` from the composite form built
    /// directly from `identified`.
    pub max_coefficient_deviation: f64,
}

impl SolderReport<Complex64> {
    /// Identified parameters as a physical triple; complex residue above
    /// `SOLDER_TOL` (relative) or a sign violation is `NonPhysical`.
    pub fn physical(&self) -> Result<DhoParams> {
        let Identified { m, gamma, k } = &self.identified;
        let scale = m.norm().max(gamma.norm()).max(k.norm()).max(1.0);
        let imag = m.im.abs().max(gamma.im.abs()).max(k.im.abs());
        if imag > SOLDER_TOL * scale {
            return Err(Error::NonPhysical(format!(
                "identified parameters carry imaginary parts up to {imag:e}"
            )));
        }
        DhoParams::new(m.re, gamma.re, k.re)
            .map_err(|_| Error::NonPhysical(format!("m={}, gamma={}, k={}", m.re, gamma.re, k.re)))
    }
}

/// Noether current `J = 2Aẋ - Kx` of a first-order Lagrangian.
///
/// For the doublet this is `J± = ±Γ ε ẋ - k± g x`, the generator of
/// `δx = Λ(t)` and also the Euler–Lagrange expression, so it vanishes
/// on-shell. It equals `g` times the `±Γ σ ẋ - k± x` form, which has the
/// same zero set.
pub fn noether_current(
    l: &QuadraticLagrangian<Complex64>,
    x: &[Complex64],
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    if !l.is_first_order() {
        return Err(Error::NotFirstOrder("kinetic matrix is nonzero".into()));
    }
    if x.len() != l.n() || v.len() != l.n() {
        return Err(Error::DimensionMismatch("state length".into()));
    }
    let (_, a, k) = l.raw_parts();
    Ok((0..l.n())
        .map(|i| {
            (0..l.n())
                .map(|j| a[(i, j)] * v[j] * 2.0 - k[(i, j)] * x[j])
                .sum()
        })
        .collect())
}

/// `(±Γ, k)` of a doublet member `±(Γ/2) ε x ẋ - (k/2) g x x`.
fn chiral_couplings<S: Scalar>(l: &QuadraticLagrangian<S>) -> Result<(S, S)> {
    if l.n() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "chiral form needs 2 variables, got {}",
            l.n()
        )));
    }
    if !l.is_first_order() {
        return Err(Error::NotFirstOrder(
            "chiral forms carry no kinetic term".into(),
        ));
    }
    let (_, a, k) = l.raw_parts();
    let tol = SOLDER_TOL * l.max_coefficient().max(1.0);
    let off = k[(0, 1)].magnitude();
    let trace = (k[(0, 0)].clone() + k[(1, 1)].clone()).magnitude();
    if off > tol || trace > tol {
        return Err(Error::InvalidParams(
            "potential is not proportional to the metric diag(1, -1)".into(),
        ));
    }
    Ok((a[(0, 1)].clone() * S::from_i64(2), k[(0, 0)].clone()))
}

fn block_diag<S: Scalar>(blocks: &[&Mat<S>]) -> Mat<S> {
    let n = blocks.iter().map(|b| b.rows()).sum();
    let mut out = Mat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.set_block(off, off, b);
        off += b.rows();
    }
    out
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `L(y, z, B)` over `(y₁, y₂, z₁, z₂, B₁, B₂)`.
pub fn auxiliary_lagrangian<S: Scalar>(
    lp: &QuadraticLagrangian<S>,
    lm: &QuadraticLagrangian<S>,
) -> Result<QuadraticLagrangian<S>> {
    chiral_couplings(lp)?;
    chiral_couplings(lm)?;
    let (_, ap, kp) = lp.raw_parts();
    let (_, am, km) = lm.raw_parts();
    let zero = Mat::zeros(2, 2);
    let two = S::from_i64(2);
    let minus_one = -S::one();

    let mut a = block_diag(&[ap, am, &zero]);
    // -Bᵀ(2A ẏ) → raw coefficient of B ẏ
    a.set_block(4, 0, &ap.scale(&(-two.clone())));
    a.set_block(4, 2, &am.scale(&(-two)));

    let mut k = block_diag(&[kp, km, &(kp + km)]);
    // +Bᵀ K y → K_By = -K₊ in the -½ xᵀKx convention
    let kpn = kp.scale(&minus_one);
    let kmn = km.scale(&minus_one);
    k.set_block(4, 0, &kpn);
    k.set_block(0, 4, &kpn.transpose());
    k.set_block(4, 2, &kmn);
    k.set_block(2, 4, &kmn.transpose());

    QuadraticLagrangian::new(
        Mat::zeros(6, 6),
        a,
        k,
        labels(&["y1", "y2", "z1", "z2", "B1", "B2"]),
    )
}

/// Eliminates variables without kinetic terms through their algebraic
/// equations of motion.
///
/// Writing the auxiliary block as `Bᵀ(P ẋ - Q x) - ½ Bᵀ K_BB B` (after moving
/// `Ḃ` onto the other variables by parts, `P = 2A_Bx`, `Q = K_Bx`), the
/// equation of motion gives `B = K_BB⁻¹(P ẋ - Q x)` and the reduced form gains
/// `½(Pẋ - Qx)ᵀ K_BB⁻¹ (Pẋ - Qx)`.
pub fn eliminate_auxiliary<S: Scalar>(
    l: &QuadraticLagrangian<S>,
    aux: &[usize],
) -> Result<QuadraticLagrangian<S>> {
    let n = l.n();
    if aux.iter().any(|&i| i >= n) {
        return Err(Error::DimensionMismatch(
            "auxiliary index out of range".into(),
        ));
    }
    let rest: Vec<usize> = (0..n).filter(|i| !aux.contains(i)).collect();
    let (m, a, k) = l.raw_parts();
    let all: Vec<usize> = (0..n).collect();
    let scale = l.max_coefficient().max(1.0);

    let kinetic = m
        .extract(aux, &all)
        .max_abs()
        .max(a.extract(aux, aux).max_abs());
    if kinetic > SOLDER_TOL * scale {
        return Err(Error::KineticResidue(kinetic));
    }

    let p = a.extract(aux, &rest).scale(&S::from_i64(2));
    let q = k.extract(aux, &rest);
    let kbb = k.extract(aux, aux);
    let s = kbb
        .solve(&Mat::identity(aux.len()), SINGULAR_TOL * scale)
        .ok_or(Error::DegenerateSum)?;

    let pt = p.transpose();
    let qt = q.transpose();
    let sp = &s * &p;
    let sq = &s * &q;
    let m_r = &m.extract(&rest, &rest) + &(&pt * &sp);
    let a_r = &a.extract(&rest, &rest) - &(&qt * &sp);
    let k_r = &k.extract(&rest, &rest) - &(&qt * &sq);
    let names = rest.iter().map(|&i| l.labels()[i].clone()).collect();
    QuadraticLagrangian::new(m_r, a_r, k_r, names)
}

/// Splits a 4-variable form over `(y, z)` into its dependence on `y - z`.
/// Returns the 2-variable form in `x = y - z` and the largest coefficient
/// that is not of the `[[N, -N], [-N, N]]` pattern.
fn difference_form<S: Scalar>(l: &QuadraticLagrangian<S>) -> Result<(QuadraticLagrangian<S>, f64)> {
    let (m, a, k) = l.raw_parts();
    let y = [0, 1];
    let mut dev = 0.0f64;
    let mut parts = Vec::with_capacity(3);
    for x in [m, a, k] {
        let n = x.extract(&y, &y);
        let neg = n.scale(&(-S::one()));
        let mut pattern = Mat::zeros(4, 4);
        pattern.set_block(0, 0, &n);
        pattern.set_block(0, 2, &neg);
        pattern.set_block(2, 0, &neg);
        pattern.set_block(2, 2, &n);
        dev = dev.max(x.max_abs_diff(&pattern));
        parts.push(n);
    }
    let kk = parts.pop().expect("three parts");
    let aa = parts.pop().expect("three parts");
    let mm = parts.pop().expect("three parts");
    Ok((
        QuadraticLagrangian::new(mm, aa, kk, labels(&["x1", "x2"]))?,
        dev,
    ))
}

fn finish<S: Scalar>(
    residual: QuadraticLagrangian<S>,
    lp: &QuadraticLagrangian<S>,
    lm: &QuadraticLagrangian<S>,
) -> Result<SolderReport<S>> {
    let (gamma, kp) = chiral_couplings(lp)?;
    let (_, km) = chiral_couplings(lm)?;
    let [m, damping, k] = identify(&gamma, &kp, &km)?;
    let direct = composite_from(&m, &damping, &k);
    let max_coefficient_deviation = residual.coefficient_deviation(&direct);
    Ok(SolderReport {
        residual,
        identified: Identified {
            m,
            gamma: damping,
            k,
        },
        max_coefficient_deviation,
    })
}

/// Soldering through the auxiliary field `B`.
pub fn solder_auxiliary<S: Scalar>(
    lp: &QuadraticLagrangian<S>,
    lm: &QuadraticLagrangian<S>,
) -> Result<SolderReport<S>> {
    let full = auxiliary_lagrangian(lp, lm)?;
    let reduced = eliminate_auxiliary(&full, &[4, 5])?;
    let (residual, dev) = difference_form(&reduced)?;
    if dev > SOLDER_TOL * reduced.max_coefficient().max(1.0) {
        return Err(Error::GaugeDependence(dev));
    }
    finish(residual, lp, lm)
}

/// Soldering by substituting `z = y - x` and eliminating `y`.
pub fn solder_direct<S: Scalar>(
    lp: &QuadraticLagrangian<S>,
    lm: &QuadraticLagrangian<S>,
) -> Result<SolderReport<S>> {
    chiral_couplings(lp)?;
    chiral_couplings(lm)?;
    let (_, ap, kp) = lp.raw_parts();
    let (_, am, km) = lm.raw_parts();
    let zero = Mat::zeros(4, 4);
    let sum = QuadraticLagrangian::new(
        zero,
        block_diag(&[ap, am]),
        block_diag(&[kp, km]),
        labels(&["y1", "y2", "z1", "z2"]),
    )?;
    // (y, z) = T (y, x)
    let one = S::one();
    let o = S::zero();
    let t = Mat::from_rows(vec![
        vec![one.clone(), o.clone(), o.clone(), o.clone()],
        vec![o.clone(), one.clone(), o.clone(), o.clone()],
        vec![one.clone(), o.clone(), -one.clone(), o.clone()],
        vec![o.clone(), one.clone(), o.clone(), -one],
    ]);
    let yx = sum.change_variables(&t, labels(&["y1", "y2", "x1", "x2"]))?;
    let residual = eliminate_auxiliary(&yx, &[0, 1])?;
    finish(residual, lp, lm)
}

/// Lifts a 2-component gauge function to `(y, z, B)`.
pub fn gauge_shift(lambda: &PolyPath) -> PolyPath {
    let mut out = Vec::with_capacity(6);
    for _ in 0..3 {
        out.extend(lambda.0.iter().cloned());
    }
    PolyPath(out)
}

/// How far a shift `q → q + s(t)` is from a symmetry: the largest coefficient
/// of `EL[L(q + s)] - EL[L(q)]` along the polynomial path `q`. Total-derivative
/// changes of `L` have vanishing Euler–Lagrange expression, so they do not
/// count.
pub fn gauge_variation_residual(
    l: &QuadraticLagrangian<Complex64>,
    q: &PolyPath,
    shift: &PolyPath,
) -> f64 {
    let before = l.euler_lagrange(q);
    let after = l.euler_lagrange(&q.add(shift));
    before
        .0
        .iter()
        .zip(&after.0)
        .map(|(b, a)| a.add(&b.scale(Complex64::new(-1.0, 0.0))).max_abs_coeff())
        .fold(0.0, f64::max)
}
