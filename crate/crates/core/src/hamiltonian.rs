//! Hamiltonian side: Legendre transform, the complex canonical map that
//! splits the composite oscillator into `H₊ ⊕ H₋`, and the first-order route
//! from a single chiral Lagrangian.
//!
//! Quadratic forms are stored as `H = ½ zᵀ 𝐇 z` over `z = (x₁..xₙ, p₁..pₙ)`.
//! A map `z' = T z` is canonical when `T J Tᵀ = J`, `J = [[0, 1], [-1, 0]]`;
//! brackets are computed on coefficient matrices, `{zᵢ, zⱼ} = Jᵢⱼ`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{frequencies, ChiralParams, DhoParams};
use crate::solder::{composite_lagrangian, QuadraticLagrangian};
use crate::wire::{self, MatrixWire};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance on `T J Tᵀ - J`.
pub const CANONICITY_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Standard symplectic unit for `n` degrees of freedom.
pub fn symplectic_unit(n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = c(1.0);
        j[(n + i, i)] = c(-1.0);
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    h: CMatrix,
    labels: Vec<String>,
}

impl QuadraticHamiltonian {
    /// Symmetrizes `h`; `labels` defaults to `x1..xn, p1..pn` when empty.
    pub fn new(h: CMatrix, labels: Vec<String>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() % 2 != 0 || h.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian matrix must be 2n x 2n, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let n = h.nrows() / 2;
        let labels = if labels.is_empty() {
            (1..=n)
                .map(|i| format!("x{i}"))
                .chain((1..=n).map(|i| format!("p{i}")))
                .collect()
        } else {
            labels
        };
        if labels.len() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} coordinates",
                labels.len(),
                2 * n
            )));
        }
        let h = (&h + h.transpose()) * c(0.5);
        Ok(Self { h, labels })
    }

    pub fn n(&self) -> usize {
        self.h.nrows() / 2
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn value(&self, z: &[Complex64]) -> Complex64 {
        let z = nalgebra::DVector::from_column_slice(z);
        (z.transpose() * &self.h * &z)[(0, 0)] * 0.5
    }

    /// Generator `F` of Hamilton's equations `ż = F z`, `F = J 𝐇`.
    pub fn flow_matrix(&self) -> CMatrix {
        symplectic_unit(self.n()) * &self.h
    }

    /// Form in new coordinates `z' = T z`: `T⁻ᵀ 𝐇 T⁻¹`.
    pub fn transform(&self, map: &CanonicalMap, labels: Vec<String>) -> Result<Self> {
        let inv = map.inverse();
        Self::new(inv.transpose() * &self.h * inv, labels)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&HamiltonianWire {
            n: self.n(),
            h: wire::matrix_to_wire(&self.h),
            labels: self.labels.clone(),
        })
        .expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: HamiltonianWire =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if w.n == 0 || w.n > wire::MAX_WIRE_DIM / 2 {
            return Err(Error::Parse(format!("n = {} out of range", w.n)));
        }
        if w.labels.len() != 2 * w.n {
            return Err(Error::Parse(format!(
                "{} labels for n = {}",
                w.labels.len(),
                w.n
            )));
        }
        Self::new(wire::wire_to_matrix(&w.h, 2 * w.n, 2 * w.n, "H")?, w.labels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HamiltonianWire {
    n: usize,
    #[serde(rename = "H")]
    h: MatrixWire,
    labels: Vec<String>,
}

/// Linear map `z' = T z` between phase-space coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMap {
    t: CMatrix,
}

impl CanonicalMap {
    /// Checks shape only; canonicity is measured, not assumed.
    pub fn new(t: CMatrix) -> Result<Self> {
        if t.nrows() != t.ncols() || t.nrows() % 2 != 0 || t.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "map must be 2n x 2n, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        Ok(Self { t })
    }

    pub fn n(&self) -> usize {
        self.t.nrows() / 2
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    /// `max |T B Tᵀ - J|` for old brackets `{zᵢ, zⱼ} = Bᵢⱼ`.
    pub fn bracket_residual(&self, old_bracket: &CMatrix) -> f64 {
        max_abs(&(&self.t * old_bracket * self.t.transpose() - symplectic_unit(self.n())))
    }

    /// `max |T J Tᵀ - J|`
    pub fn symplectic_residual(&self) -> f64 {
        self.bracket_residual(&symplectic_unit(self.n()))
    }

    /// `{z'ᵢ, z'ⱼ}` given old brackets `B`.
    pub fn brackets(&self, old_bracket: &CMatrix) -> CMatrix {
        &self.t * old_bracket * self.t.transpose()
    }

    /// `T⁻¹`; for a symplectic map this is `-J Tᵀ J`, otherwise LU.
    pub fn inverse(&self) -> CMatrix {
        let j = symplectic_unit(self.n());
        if self.symplectic_residual() <= CANONICITY_TOL {
            -(&j * self.t.transpose() * &j)
        } else {
            self.t.clone().try_inverse().unwrap_or_else(|| {
                CMatrix::from_element(self.t.nrows(), self.t.ncols(), c(f64::NAN))
            })
        }
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        (&self.t * nalgebra::DVector::from_column_slice(z))
            .iter()
            .copied()
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MapWire {
            n: self.n(),
            t: wire::matrix_to_wire(&self.t),
        })
        .expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: MapWire = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if w.n == 0 || w.n > wire::MAX_WIRE_DIM / 2 {
            return Err(Error::Parse(format!("n = {} out of range", w.n)));
        }
        Self::new(wire::wire_to_matrix(&w.t, 2 * w.n, 2 * w.n, "T")?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MapWire {
    n: usize,
    #[serde(rename = "T")]
    t: MatrixWire,
}

/// Legendre transform of `L = ½ẋᵀMẋ + xᵀAẋ - ½xᵀKx`.
///
/// `p = Mẋ - Ax` and `H = ½(p + Ax)ᵀM⁻¹(p + Ax) + ½xᵀKx`.
pub fn legendre(l: &QuadraticLagrangian) -> Result<QuadraticHamiltonian> {
    let n = l.n();
    let m = l.kinetic().to_nalgebra();
    let a = l.coupling().to_nalgebra();
    let k = l.potential().to_nalgebra();
    let mi = m
        .try_inverse()
        .ok_or_else(|| Error::InvalidParams("kinetic matrix is singular".into()))?;
    let at = a.transpose();
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&(&at * &mi * &a + k));
    h.view_mut((0, n), (n, n)).copy_from(&(&at * &mi));
    h.view_mut((n, 0), (n, n)).copy_from(&(&mi * &a));
    h.view_mut((n, n), (n, n)).copy_from(&mi);
    let labels = l
        .labels()
        .iter()
        .cloned()
        .chain(l.labels().iter().map(|s| s.replacen('x', "p", 1)))
        .collect();
    QuadraticHamiltonian::new(h, labels)
}

/// `H = (1/2m)(p₁ - γx₂/2)² + (k/2)x₁² - (1/2m)(p₂ + γx₁/2)² - (k/2)x₂²`
/// with `p₁ = mẋ₁ + γx₂/2`, `p₂ = -mẋ₂ - γx₁/2`.
pub fn legendre_composite(p: &DhoParams) -> QuadraticHamiltonian {
    legendre(&composite_lagrangian(p)).expect("m > 0 makes the kinetic matrix invertible")
}

/// Canonical momenta `p = Mẋ - Ax` of `l` at `(x, ẋ)`, returned as the full
/// phase point `(x, p)`.
pub fn phase_point(
    l: &QuadraticLagrangian,
    x: &[Complex64],
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = l.n();
    if x.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch("state length".into()));
    }
    let xv = nalgebra::DVector::from_column_slice(x);
    let vv = nalgebra::DVector::from_column_slice(v);
    let p = l.kinetic().to_nalgebra() * vv - l.coupling().to_nalgebra() * &xv;
    Ok(x.iter().copied().chain(p.iter().copied()).collect())
}

/// Residual of `Mẍ - 2Aẋ + Kx = 0` implied by Hamilton's equations of
/// `legendre(l)`, computed on coefficient matrices: with `ż = Fz`,
/// `M (F²)ₓ - 2A Fₓ + [K 0]` must vanish identically in `z`.
pub fn equations_of_motion_residual(l: &QuadraticLagrangian, h: &QuadraticHamiltonian) -> f64 {
    let n = l.n();
    let f = h.flow_matrix();
    let f2 = &f * &f;
    let m = l.kinetic().to_nalgebra();
    let a = l.coupling().to_nalgebra();
    let mut kz = CMatrix::zeros(n, 2 * n);
    kz.view_mut((0, 0), (n, n))
        .copy_from(&l.potential().to_nalgebra());
    let r = m * f2.rows(0, n) - a * f.rows(0, n) * c(2.0) + kz;
    max_abs(&r)
}

/// The complex canonical map `(x₁, x₂, p₁, p₂) → (x₊, x₋, p₊, p₋)`:
///
/// ```text
/// x± = √(mΩ/2ω±) x₁ ± i √(1/2mΩω±) p₂
/// p± = √(ω±/2mΩ) p₁ ± i √(mΩω±/2) x₂
/// ```
///
/// with principal square roots and `ω± = Ω ± iγ/2m`.
pub fn canonical_map_ct(p: &DhoParams) -> Result<CanonicalMap> {
    let f = frequencies(p)?;
    let (m, om) = (p.m(), f.omega);
    let mut t = CMatrix::zeros(4, 4);
    for (r, w, s) in [(0, f.omega_plus, 1.0), (1, f.omega_minus, -1.0)] {
        let si = Complex64::new(0.0, s);
        t[(r, 0)] = (c(m * om) / (w * 2.0)).sqrt();
        t[(r, 3)] = si * (c(1.0) / (w * (2.0 * m * om))).sqrt();
        t[(r + 2, 2)] = (w / (2.0 * m * om)).sqrt();
        t[(r + 2, 1)] = si * (w * (m * om / 2.0)).sqrt();
    }
    let map = CanonicalMap::new(t)?;
    let res = map.symplectic_residual();
    if !(res <= CANONICITY_TOL) {
        return Err(Error::BranchInconsistency(res));
    }
    Ok(map)
}

/// `H₊ ⊕ H₋` read off from the composite Hamiltonian in `(x₊, x₋, p₊, p₋)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitHamiltonian {
    /// Over `(x₊, p₊)`.
    pub plus: QuadraticHamiltonian,
    /// Over `(x₋, p₋)`.
    pub minus: QuadraticHamiltonian,
    pub map: CanonicalMap,
    /// Largest coefficient coupling the `+` and `-` sectors.
    pub off_block_residual: f64,
    /// Largest deviation of the blocks from `diag(ω±², 1)`.
    pub block_residual: f64,
}

impl SplitHamiltonian {
    /// `max |conj(𝐇₊) - 𝐇₋|`; `𝐇₊` is symmetric so this is the `H₊† = H₋`
    /// pairing.
    pub fn conjugacy_residual(&self) -> f64 {
        max_abs(&(self.plus.matrix().conjugate() - self.minus.matrix()))
    }
}

/// `½(p² + ω²x²)` as a one-degree-of-freedom form.
pub fn oscillator(omega: Complex64, labels: Vec<String>) -> QuadraticHamiltonian {
    QuadraticHamiltonian::new(
        CMatrix::from_row_slice(2, 2, &[omega * omega, c(0.0), c(0.0), c(1.0)]),
        labels,
    )
    .expect("2x2")
}

pub fn split_hamiltonian(p: &DhoParams) -> Result<SplitHamiltonian> {
    let f = frequencies(p)?;
    let map = canonical_map_ct(p)?;
    let h = legendre_composite(p).transform(&map, names(&["x+", "x-", "p+", "p-"]))?;
    let hm = h.matrix();
    let block = |a: usize, b: usize| CMatrix::from_fn(2, 2, |i, j| hm[([a, b][i], [a, b][j])]);
    let plus = QuadraticHamiltonian::new(block(0, 2), names(&["x+", "p+"]))?;
    let minus = QuadraticHamiltonian::new(block(1, 3), names(&["x-", "p-"]))?;
    let mut off = 0.0f64;
    for i in [0, 2] {
        for j in [1, 3] {
            off = off.max(hm[(i, j)].norm()).max(hm[(j, i)].norm());
        }
    }
    let dp = max_abs(&(plus.matrix() - oscillator(f.omega_plus, vec![]).matrix()));
    let dm = max_abs(&(minus.matrix() - oscillator(f.omega_minus, vec![]).matrix()));
    Ok(SplitHamiltonian {
        plus,
        minus,
        map,
        off_block_residual: off,
        block_residual: dp.max(dm),
    })
}

fn names(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

/// `H = ½ xᵀ h x` with a non-canonical bracket `{xᵢ, xⱼ} = Bᵢⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderHamiltonian {
    pub h: CMatrix,
    pub bracket: CMatrix,
}

impl FirstOrderHamiltonian {
    /// `ẋ = {x, H} = B h x`
    pub fn flow_matrix(&self) -> CMatrix {
        &self.bracket * &self.h
    }

    pub fn value(&self, x: &[Complex64]) -> Complex64 {
        let v = nalgebra::DVector::from_column_slice(x);
        (v.transpose() * &self.h * &v)[(0, 0)] * 0.5
    }

    /// Form and bracket in coordinates `z = T x`.
    pub fn transform(&self, map: &CanonicalMap) -> Result<(QuadraticHamiltonian, CMatrix)> {
        let inv = map
            .matrix()
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParams("map is singular".into()))?;
        let h = QuadraticHamiltonian::new(inv.transpose() * &self.h * inv, names(&["x", "p"]))?;
        Ok((h, map.brackets(&self.bracket)))
    }
}

/// `H = (κ/2)(x₁² - x₂²)` with `{xᵢ, xⱼ} = -(i/g) εᵢⱼ`, read off from the
/// `+` member of the complex doublet.
pub fn first_order_hamiltonian(g: f64, kappa: Complex64) -> Result<FirstOrderHamiltonian> {
    ChiralParams::complex(g, kappa)?;
    let z = c(0.0);
    let b = Complex64::new(0.0, -1.0 / g);
    Ok(FirstOrderHamiltonian {
        h: CMatrix::from_row_slice(2, 2, &[kappa, z, z, -kappa]),
        bracket: CMatrix::from_row_slice(2, 2, &[z, b, -b, z]),
    })
}

/// Map `(x₁, x₂) → (x, pₓ)` defined by `x₁ = (i/√(-κ)) pₓ`,
/// `x₂ = (√(-κ)/g) x` with the principal root. It takes the first-order form
/// to `pₓ²/2 + (κ/g)² x²/2` and `{x₁, x₂} = -i/g` to `{x, pₓ} = 1`.
pub fn first_order_map(g: f64, kappa: Complex64) -> Result<CanonicalMap> {
    if kappa == c(0.0) {
        return Err(Error::ZeroCoupling);
    }
    let fo = first_order_hamiltonian(g, kappa)?;
    let s = (-kappa).sqrt();
    let z = c(0.0);
    let map = CanonicalMap::new(CMatrix::from_row_slice(
        2,
        2,
        &[z, c(g) / s, -Complex64::i() * s, z],
    ))?;
    let res = map.bracket_residual(&fo.bracket);
    if !(res <= CANONICITY_TOL * (1.0 + g.abs() + kappa.norm())) {
        return Err(Error::BranchInconsistency(res));
    }
    Ok(map)
}

/// `first_order_map ∘ first_order_hamiltonian` as a one-degree-of-freedom form.
pub fn first_order_route(g: f64, kappa: Complex64) -> Result<QuadraticHamiltonian> {
    let (h, _) = first_order_hamiltonian(g, kappa)?.transform(&first_order_map(g, kappa)?)?;
    h.with_labels(names(&["x+", "p+"]))
}

impl QuadraticHamiltonian {
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch("label count".into()));
        }
        self.labels = labels;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{chiral_flow, integrate_doubled, PhaseState};
    use crate::ode::IntegratorOptions;
    use crate::params::physical_to_chiral;
    use rand::{Rng, SeedableRng};

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn anchor() -> DhoParams {
        DhoParams::new(0.5, 1.0, 1.0).unwrap()
    }

    /// Independent Poisson bracket of two linear functions `aᵀz`, `bᵀz`.
    fn bracket(a: &[Complex64; 4], b: &[Complex64; 4]) -> Complex64 {
        a[0] * b[2] - a[2] * b[0] + a[1] * b[3] - a[3] * b[1]
    }

    #[test]
    fn legendre_anchor_value() {
        let h = legendre_composite(&anchor());
        let z = [cz(1.0, 0.0), cz(0.0, 0.0), cz(0.0, 0.0), cz(0.0, 0.0)];
        assert!((h.value(&z) - cz(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn legendre_matches_written_form() {
        let p = DhoParams::new(0.7, 0.3, 1.9).unwrap();
        let h = legendre_composite(&p);
        let (m, g, k) = (p.m(), p.gamma(), p.k());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let z: Vec<Complex64> = (0..4)
                .map(|_| cz(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let (x1, x2, p1, p2) = (z[0], z[1], z[2], z[3]);
            let want = (p1 - x2 * (g / 2.0)).powi(2) / (2.0 * m) + x1 * x1 * (k / 2.0)
                - (p2 + x1 * (g / 2.0)).powi(2) / (2.0 * m)
                - x2 * x2 * (k / 2.0);
            assert!((h.value(&z) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn hamilton_equations_reproduce_lagrangian_dynamics() {
        for p in [
            anchor(),
            DhoParams::new(1.0, 3.0, 2.0).unwrap(),
            DhoParams::new(2.0, 0.0, 5.0).unwrap(),
        ] {
            let l = composite_lagrangian(&p);
            assert!(equations_of_motion_residual(&l, &legendre(&l).unwrap()) < 1e-13);
            // ẍ₁ = -(γ/m) ẋ₂ - (k/m) x₁ as a map of (x, ẋ)
            let h = legendre_composite(&p);
            let f = h.flow_matrix();
            let z = phase_point(
                &l,
                &[cz(0.3, 0.0), cz(-0.4, 0.0)],
                &[cz(1.1, 0.0), cz(0.2, 0.0)],
            )
            .unwrap();
            let zv = nalgebra::DVector::from_vec(z);
            let zdot = &f * &zv;
            let zddot = &f * &zdot;
            let want = -(p.gamma() / p.m()) * 0.2 - (p.k() / p.m()) * 0.3;
            assert!((zdot[0] - cz(1.1, 0.0)).norm() < 1e-13);
            assert!((zddot[0] - cz(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn undamped_legendre_decouples() {
        let h = legendre_composite(&DhoParams::new(1.0, 0.0, 1.0).unwrap());
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cz(1.0, 0.0),
            cz(-1.0, 0.0),
            cz(1.0, 0.0),
            cz(-1.0, 0.0),
        ]));
        assert!(max_abs(&(h.matrix() - want)) < 1e-15);
    }

    #[test]
    fn energy_conserved_along_flow() {
        let p = anchor();
        let l = composite_lagrangian(&p);
        let h = legendre_composite(&p);
        let init =
            PhaseState::with_velocity(cz(0.8, 0.0), cz(0.1, 0.0), cz(-0.3, 0.0), cz(0.5, 0.0));
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let traj = integrate_doubled(&p, &init, &grid, &IntegratorOptions::default()).unwrap();
        let e = |s: &PhaseState| {
            let v = s.velocity.unwrap();
            h.value(&phase_point(&l, &[s.x1, s.x2], &v).unwrap())
        };
        let e0 = e(&traj.states()[0]);
        let drift = traj
            .states()
            .iter()
            .map(|s| (e(s) - e0).norm())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
    }

    #[test]
    fn ct_brackets() {
        let t = canonical_map_ct(&anchor()).unwrap();
        assert!(t.symplectic_residual() < 1e-14);
        let row = |i: usize| -> [Complex64; 4] { [0, 1, 2, 3].map(|j| t.matrix()[(i, j)]) };
        let (xp, xm, pp, pm) = (row(0), row(1), row(2), row(3));
        assert!((bracket(&xp, &pp) - cz(1.0, 0.0)).norm() < 1e-14);
        assert!((bracket(&xm, &pm) - cz(1.0, 0.0)).norm() < 1e-14);
        for (a, b) in [(&xp, &pm), (&xm, &pp), (&xp, &xm), (&pp, &pm)] {
            assert!(bracket(a, b).norm() < 1e-14);
        }
        let over = DhoParams::new(1.0, 3.0, 2.0).unwrap();
        assert!(matches!(
            canonical_map_ct(&over),
            Err(Error::NotOscillatory { .. })
        ));
    }

    #[test]
    fn ct_hermitian_limit() {
        let t = canonical_map_ct(&DhoParams::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let tm = t.matrix();
        for (i, j, want) in [
            (0, 0, cz(r, 0.0)),
            (0, 3, cz(0.0, r)),
            (1, 3, cz(0.0, -r)),
            (2, 2, cz(r, 0.0)),
            (3, 1, cz(0.0, -r)),
        ] {
            assert!((tm[(i, j)] - want).norm() < 1e-15);
        }
        let s = split_hamiltonian(&DhoParams::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(max_abs(&(s.plus.matrix() - CMatrix::identity(2, 2))) < 1e-14);
        assert!(max_abs(&(s.minus.matrix() - CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn split_anchor() {
        let s = split_hamiltonian(&anchor()).unwrap();
        assert!((s.plus.matrix()[(0, 0)] - cz(0.0, 2.0)).norm() < 1e-14);
        assert!((s.minus.matrix()[(0, 0)] - cz(0.0, -2.0)).norm() < 1e-14);
        assert!(s.off_block_residual < 1e-14 && s.block_residual < 1e-14);
        assert!(s.conjugacy_residual() < 1e-14);
    }

    #[test]
    fn split_value_identity() {
        let p = DhoParams::new(1.3, 0.4, 2.2).unwrap();
        let s = split_hamiltonian(&p).unwrap();
        let h = legendre_composite(&p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let z: Vec<Complex64> = (0..4)
                .map(|_| cz(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let w = s.map.apply(&z);
            let split = s.plus.value(&[w[0], w[2]]) + s.minus.value(&[w[1], w[3]]);
            assert!((h.value(&z) - split).norm() < 1e-10);
        }
    }

    #[test]
    fn first_order_flow_reproduces_chiral_equations() {
        let (g, kappa) = (1.0, cz(1.0, 1.0));
        let fo = first_order_hamiltonian(g, kappa).unwrap();
        let f = fo.flow_matrix();
        // ig ẋ₁ = -κ x₂ and ig ẋ₂ = -κ x₁
        let r = Complex64::i() * kappa / g;
        assert!(
            max_abs(&(f - CMatrix::from_row_slice(2, 2, &[cz(0.0, 0.0), r, r, cz(0.0, 0.0)])))
                < 1e-15
        );

        let init = PhaseState::new(cz(0.6, 0.0), cz(0.3, 0.0));
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let traj = chiral_flow(g, kappa, &init, &grid, &IntegratorOptions::default()).unwrap();
        let fo_flow = fo.flow_matrix();
        for (t, s) in grid.iter().zip(traj.states()) {
            let x = (&fo_flow * Complex64::from(*t)).exp()
                * nalgebra::DVector::from_vec(vec![init.x1, init.x2]);
            assert!((x[0] - s.x1).norm() < 1e-8 && (x[1] - s.x2).norm() < 1e-8);
        }
    }

    #[test]
    fn first_order_map_properties() {
        let (g, kappa) = (1.0, cz(1.0, 1.0));
        let map = first_order_map(g, kappa).unwrap();
        let fo = first_order_hamiltonian(g, kappa).unwrap();
        let (h, b) = fo.transform(&map).unwrap();
        assert!(max_abs(&(b - symplectic_unit(1))) < 1e-15);
        assert!((h.matrix()[(0, 0)] - cz(0.0, 2.0)).norm() < 1e-14);
        assert!((h.matrix()[(1, 1)] - cz(1.0, 0.0)).norm() < 1e-14);
        assert!(h.matrix()[(0, 1)].norm() < 1e-15);
        let s = (-kappa).sqrt();
        assert!(s.re >= 0.0 && (s * s + kappa).norm() < 1e-15);
        assert_eq!(first_order_map(1.0, cz(0.0, 0.0)), Err(Error::ZeroCoupling));
    }

    #[test]
    fn routes_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let m = rng.random_range(0.1..3.0);
            let gamma = rng.random_range(0.0..2.0);
            let k = gamma * gamma / (4.0 * m) + rng.random_range(0.1..3.0);
            let p = DhoParams::new(m, gamma, k).unwrap();
            let cp = physical_to_chiral(&p).unwrap();
            let route = first_order_route(cp.g().unwrap(), cp.kappa().unwrap()).unwrap();
            let split = split_hamiltonian(&p).unwrap();
            let scale = split
                .plus
                .matrix()
                .iter()
                .map(|z| z.norm())
                .fold(1.0, f64::max);
            assert!(max_abs(&(route.matrix() - split.plus.matrix())) < 1e-12 * scale);
        }
    }

    #[test]
    fn json_round_trip() {
        let h = legendre_composite(&anchor());
        assert_eq!(QuadraticHamiltonian::from_json(&h.to_json()).unwrap(), h);
        let t = canonical_map_ct(&anchor()).unwrap();
        assert_eq!(CanonicalMap::from_json(&t.to_json()).unwrap(), t);
        assert!(QuadraticHamiltonian::from_json(
            "{\"n\":1,\"H\":[[[1,0]]],\"labels\":[\"x\",\"p\"]}"
        )
        .is_err());
        assert!(CanonicalMap::from_json("[]").is_err());
    }
}
