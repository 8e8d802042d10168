//! Truncated Fock-space quantization of the complex-frequency oscillator
//! `H = p²/2 + ω² x²/2`.
//!
//! Two bases are used. In the Fock basis of `ω` itself (`FockOfOmega`) the
//! ladder operators are the standard real matrices and `H = ω(N + ½)` is
//! diagonal. In the Fock basis of a real reference frequency
//! (`FockOfReference`) `H` is a dense complex symmetric matrix and has to be
//! diagonalized biorthogonally. In both bases `η` is complex conjugation of
//! amplitudes and `ã = η⁻¹ a† η = aᵀ`.

pub mod eigen;
pub mod exact;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{frequencies, DhoParams};
use crate::wire::{self, ComplexPair, MatrixWire};
pub use eigen::CMatrix;
use exact::RadicalMatrix;

/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 64;
/// Eigenvalues closer than this (relative) cannot be paired reliably.
pub const PAIRING_TOL: f64 = 1e-9;
/// Tolerance on the conjugation relations checked by [`eta_operator`].
pub const ETA_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    FockOfOmega,
    FockOfReference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
    basis: BasisTag,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix, basis: BasisTag) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "operator must be D x D with D >= 2, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidParams("non-finite operator entry".into()));
        }
        Ok(Self { entries, basis })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn adjoint(&self) -> CMatrix {
        self.entries.adjoint()
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParams(format!(
            "truncation dimension must be >= 2, got {d}"
        )));
    }
    Ok(())
}

fn check_omega(omega: Complex64) -> Result<()> {
    if !(omega.re > 0.0 && omega.im.is_finite() && omega.re.is_finite()) {
        return Err(Error::BadFrequency(format!(
            "Re(omega) must be positive, got {omega}"
        )));
    }
    Ok(())
}

fn op(r: &RadicalMatrix, basis: BasisTag) -> OperatorMatrix {
    OperatorMatrix {
        entries: r.to_matrix(),
        basis,
    }
}

/// `a` and `ã = aᵀ` in the Fock basis of `ω`. Neither depends on `ω`.
pub fn build_ladder(omega: Complex64, d: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_omega(omega)?;
    check_dim(d)?;
    let a = RadicalMatrix::lowering(d);
    Ok((
        op(&a, BasisTag::FockOfOmega),
        op(&a.transpose(), BasisTag::FockOfOmega),
    ))
}

/// `x = (a + ã)/√(2ω)`, `p = -i√(ω/2)(a - ã)` in the Fock basis of `ω`.
pub fn position_momentum(omega: Complex64, d: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (a, at) = build_ladder(omega, d)?;
    let x = (&a.entries + &at.entries) / (omega * 2.0).sqrt();
    let p = (&a.entries - &at.entries) * (-Complex64::i() * (omega / 2.0).sqrt());
    Ok((
        OperatorMatrix::new(x, BasisTag::FockOfOmega)?,
        OperatorMatrix::new(p, BasisTag::FockOfOmega)?,
    ))
}

/// `N = ã a = diag(0, 1, …, D-1)` and `H = ω(N + ½)`.
pub fn number_and_hamiltonian(
    omega: Complex64,
    d: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_omega(omega)?;
    check_dim(d)?;
    let a = RadicalMatrix::lowering(d);
    let n = a.transpose().mul(&a).to_matrix();
    let h = (&n + CMatrix::identity(d, d) * c(0.5)) * omega;
    Ok((
        OperatorMatrix::new(n, BasisTag::FockOfOmega)?,
        OperatorMatrix::new(h, BasisTag::FockOfOmega)?,
    ))
}

/// Identities of the truncated ladder algebra, decided in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LadderAlgebra {
    pub dim: usize,
    /// `ã a = diag(0, …, D-1)`
    pub number_is_diagonal: bool,
    /// `[N, a] + a = 0`
    pub lowering_commutator: bool,
    /// `[N, ã] - ã = 0`
    pub raising_commutator: bool,
    /// `[a, ã] = 1` on the first `D - 1` basis states.
    pub canonical_leading_block: bool,
    /// `[x, p] - i = i([a, ã] - 1)` is supported on the final diagonal
    /// entry only, where it equals `-iD`.
    pub xp_defect_confined: bool,
}

impl LadderAlgebra {
    pub fn holds(&self) -> bool {
        self.number_is_diagonal
            && self.lowering_commutator
            && self.raising_commutator
            && self.canonical_leading_block
            && self.xp_defect_confined
    }
}

pub fn ladder_algebra(d: usize) -> Result<LadderAlgebra> {
    check_dim(d)?;
    let a = RadicalMatrix::lowering(d);
    let at = a.transpose();
    let n = at.mul(&a);
    let number_is_diagonal = (0..d).all(|i| {
        (0..d).all(|j| {
            let want = if i == j {
                num_bigint::BigInt::from(i)
            } else {
                num_bigint::BigInt::from(0)
            };
            n.coefficient(i, j) == &want
        })
    });
    let defect = a.commutator(&at).sub(&RadicalMatrix::identity(d));
    let support = defect.support();
    let last = d - 1;
    Ok(LadderAlgebra {
        dim: d,
        number_is_diagonal,
        lowering_commutator: n.commutator(&a).add(&a).is_zero(),
        raising_commutator: n.commutator(&at).sub(&at).is_zero(),
        canonical_leading_block: support.iter().all(|&(i, j)| i == last && j == last),
        xp_defect_confined: support == vec![(last, last)]
            && defect.coefficient(last, last) == &num_bigint::BigInt::from(-(d as i64)),
    })
}

/// Antilinear map `v ↦ U v̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearOp {
    u: CMatrix,
}

impl AntilinearOp {
    /// `U` must be unitary to `1e-12`.
    pub fn new(u: CMatrix) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch("U must be square".into()));
        }
        let dev = max_abs(&(u.adjoint() * &u - CMatrix::identity(u.nrows(), u.nrows())));
        if !(dev <= 1e-12) {
            return Err(Error::InvalidParams(format!(
                "U is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self { u })
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.u * v.conjugate()
    }

    /// `η A η⁻¹ = U Ā U†`
    pub fn conjugate_operator(&self, a: &CMatrix) -> CMatrix {
        &self.u * a.conjugate() * self.u.adjoint()
    }

    /// `η² = U Ū` as a linear map.
    pub fn square(&self) -> CMatrix {
        &self.u * self.u.conjugate()
    }
}

/// Residuals of `η x η⁻¹ = x†` and `η p η⁻¹ = -p†` for `x, p` of frequency
/// `ω` in the Fock basis of `ω`.
pub fn eta_conjugation_residual(eta: &AntilinearOp, omega: Complex64) -> Result<f64> {
    let (x, p) = position_momentum(omega, eta.dim())?;
    let rx = max_abs(&(eta.conjugate_operator(x.entries()) - x.adjoint()));
    let rp = max_abs(&(eta.conjugate_operator(p.entries()) + p.adjoint()));
    Ok(rx.max(rp))
}

/// `η` as complex conjugation of Fock amplitudes, verified against the
/// conjugation relations for a probe frequency off the real axis.
pub fn eta_operator(d: usize) -> Result<AntilinearOp> {
    check_dim(d)?;
    let eta = AntilinearOp::new(CMatrix::identity(d, d))?;
    let res = eta_conjugation_residual(&eta, Complex64::new(1.0, 1.0))?;
    if !(res <= ETA_TOL) {
        return Err(Error::VerificationFailed(format!(
            "eta conjugation residual {res:e}"
        )));
    }
    Ok(eta)
}

/// `‖H† - η H η⁻¹‖₂`
pub fn pseudo_hermiticity_residual(h: &OperatorMatrix, eta: &AntilinearOp) -> Result<f64> {
    if h.dim() != eta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}-dimensional, eta {}",
            h.dim(),
            eta.dim()
        )));
    }
    Ok(operator_norm(
        &(h.adjoint() - eta.conjugate_operator(h.entries())),
    ))
}

/// `p²/2 + ω²x²/2` with `x, p` of the real frequency `ω_ref`:
/// `α(a² + ã²) + β(aã + ãa)` with `α = (ω²/ω_ref - ω_ref)/4` and
/// `β = (ω²/ω_ref + ω_ref)/4`. Exactly symmetric.
pub fn fock_matrix_hamiltonian(
    omega: Complex64,
    omega_ref: f64,
    d: usize,
) -> Result<OperatorMatrix> {
    check_omega(omega)?;
    check_dim(d)?;
    if !(omega_ref > 0.0 && omega_ref.is_finite()) {
        return Err(Error::BadFrequency(format!(
            "reference frequency must be positive, got {omega_ref}"
        )));
    }
    let a = RadicalMatrix::lowering(d);
    let at = a.transpose();
    let squares = a.mul(&a).add(&at.mul(&at)).to_matrix();
    let mixed = a.mul(&at).add(&at.mul(&a)).to_matrix();
    let w2 = omega * omega / omega_ref;
    let alpha = (w2 - omega_ref) / 4.0;
    let beta = (w2 + omega_ref) / 4.0;
    OperatorMatrix::new(squares * alpha + mixed * beta, BasisTag::FockOfReference)
}

/// `a_ω = √(ω/2)(x + ip/ω)` and `ã_ω = √(ω/2)(x - ip/ω)` with `x, p` of
/// frequency `ω_ref`.
pub fn ladder_in_reference(
    omega: Complex64,
    omega_ref: f64,
    d: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_omega(omega)?;
    if !(omega_ref > 0.0 && omega_ref.is_finite()) {
        return Err(Error::BadFrequency(format!(
            "reference frequency must be positive, got {omega_ref}"
        )));
    }
    let (x, p) = position_momentum(c(omega_ref), d)?;
    let s = (omega / 2.0).sqrt();
    let ip = p.entries() * (Complex64::i() / omega);
    let a = (x.entries() + &ip) * s;
    let at = (x.entries() - &ip) * s;
    Ok((
        OperatorMatrix::new(a, BasisTag::FockOfReference)?,
        OperatorMatrix::new(at, BasisTag::FockOfReference)?,
    ))
}

#[derive(Debug, Clone, Default)]
pub struct DiagonalizeOptions {
    /// When set, each `ψₙ` is scaled so that `|⟨η⁻¹ψₙ|ψₙ⟩| = 1`, which makes
    /// `φₙ = η⁻¹ψₙ` up to phase. Otherwise `‖ψₙ‖ = 1`.
    pub eta: Option<AntilinearOp>,
}

/// Right eigenvectors `ψₙ` (columns of `psi`) and left eigenvectors `φₙ`
/// (eigenvectors of `H†` for `λₙ*`) with `⟨φₙ|ψₘ⟩ = δₙₘ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalSystem {
    eigenvalues: Vec<Complex64>,
    psi: CMatrix,
    phi: CMatrix,
}

impl BiorthogonalSystem {
    pub fn new(eigenvalues: Vec<Complex64>, psi: CMatrix, phi: CMatrix) -> Result<Self> {
        let r = eigenvalues.len();
        if psi.ncols() != r || phi.ncols() != r || psi.nrows() != phi.nrows() || r > psi.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{r} eigenvalues, psi {}x{}, phi {}x{}",
                psi.nrows(),
                psi.ncols(),
                phi.nrows(),
                phi.ncols()
            )));
        }
        Ok(Self {
            eigenvalues,
            psi,
            phi,
        })
    }

    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn psi(&self) -> &CMatrix {
        &self.psi
    }

    pub fn phi(&self) -> &CMatrix {
        &self.phi
    }

    pub fn right(&self, n: usize) -> DVector<Complex64> {
        self.psi.column(n).into_owned()
    }

    pub fn left(&self, n: usize) -> DVector<Complex64> {
        self.phi.column(n).into_owned()
    }

    /// `⟨φₙ|A|ψₘ⟩`
    pub fn matrix_element(&self, n: usize, a: &CMatrix, m: usize) -> Complex64 {
        (self.phi.column(n).adjoint() * a * self.psi.column(m))[(0, 0)]
    }

    /// `Φ†Ψ - 1`
    fn gram_defect(&self) -> CMatrix {
        self.phi.adjoint() * &self.psi - CMatrix::identity(self.len(), self.len())
    }

    /// `max |⟨φₙ|ψₘ⟩ - δₙₘ|`
    pub fn biorthonormality_residual(&self) -> f64 {
        max_abs(&self.gram_defect())
    }

    /// `maxₘ |⟨φₙ|ψₘ⟩ - δₙₘ|` for each `n`.
    pub fn mode_residuals(&self) -> Vec<f64> {
        let g = self.gram_defect();
        (0..self.len())
            .map(|n| g.row(n).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect()
    }

    /// `‖Σ|ψₙ⟩⟨φₙ| - 1‖₂`
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        operator_norm(&(&self.psi * self.phi.adjoint() - CMatrix::identity(d, d)))
    }

    /// Subsystem of the given modes, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        if idx.iter().any(|&i| i >= self.len()) {
            return Err(Error::DimensionMismatch("mode index out of range".into()));
        }
        Ok(Self {
            eigenvalues: idx.iter().map(|&i| self.eigenvalues[i]).collect(),
            psi: self.psi.select_columns(idx),
            phi: self.phi.select_columns(idx),
        })
    }

    /// `min over |α| = 1 of ‖α η|φₙ⟩ - |ψₙ⟩‖ / ‖ψₙ‖`
    pub fn eta_alignment_residual(&self, eta: &AntilinearOp, n: usize) -> f64 {
        let v = eta.apply(&self.left(n));
        let psi = self.right(n);
        let overlap = v.dotc(&psi);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            c(1.0)
        };
        (v * phase - &psi).norm() / psi.norm()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SystemWire {
            dim: self.dim(),
            eigenvalues: self.eigenvalues.iter().map(|&z| wire::pair(z)).collect(),
            psi: wire::matrix_to_wire(&self.psi),
            phi: wire::matrix_to_wire(&self.phi),
            biorthonormality_residual: Some(self.biorthonormality_residual()),
        })
        .expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: SystemWire = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let r = w.eigenvalues.len();
        if w.dim > wire::MAX_WIRE_DIM || r > w.dim {
            return Err(Error::Parse(format!("{r} modes in dimension {}", w.dim)));
        }
        let eigenvalues = w
            .eigenvalues
            .iter()
            .map(|&p| wire::unpair(p))
            .collect::<Result<Vec<_>>>()?;
        let psi = wire::wire_to_matrix(&w.psi, w.dim, r, "psi")?;
        let phi = wire::wire_to_matrix(&w.phi, w.dim, r, "phi")?;
        Self::new(eigenvalues, psi, phi)
    }
}

/// JSON shape: `psi` and `phi` are `dim × modes` arrays of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemWire {
    dim: usize,
    eigenvalues: Vec<ComplexPair>,
    psi: MatrixWire,
    phi: MatrixWire,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    biorthonormality_residual: Option<f64>,
}

fn cmp_eigen(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Diagonalizes `H` into a biorthonormal system ordered by ascending real
/// part, ties by imaginary part. The largest-magnitude component of each
/// `ψₙ` is real positive.
pub fn biorthogonal_diagonalize(
    h: &OperatorMatrix,
    opts: &DiagonalizeOptions,
) -> Result<BiorthogonalSystem> {
    let d = h.dim();
    if let Some(eta) = &opts.eta {
        if eta.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "eta is {}-dimensional, H {d}",
                eta.dim()
            )));
        }
    }
    let (lambda, right) = eigen::right_eigen(h.entries())?;
    let (mu, left) = eigen::right_eigen(&h.adjoint())?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| cmp_eigen(&lambda[i], &lambda[j]));

    for (x, &i) in order.iter().enumerate() {
        for &j in &order[x + 1..] {
            let gap = (lambda[i] - lambda[j]).norm();
            if gap <= PAIRING_TOL * lambda[i].norm().max(1.0) {
                let overlap = right.column(i).dotc(&right.column(j)).norm();
                return Err(if overlap > 1.0 - 1e-6 {
                    Error::DefectivePair(format!(
                        "eigenvalue {} has a deficient eigenspace",
                        lambda[i]
                    ))
                } else {
                    Error::PairingAmbiguity(format!(
                        "eigenvalues {} and {} are {gap:e} apart",
                        lambda[i], lambda[j]
                    ))
                });
            }
        }
    }

    let mut used = vec![false; d];
    let mut psi = CMatrix::zeros(d, d);
    let mut phi = CMatrix::zeros(d, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &i) in order.iter().enumerate() {
        let target = lambda[i].conj();
        let j = (0..d)
            .min_by(|&x, &y| (mu[x] - target).norm().total_cmp(&(mu[y] - target).norm()))
            .expect("d >= 2");
        if used[j] {
            return Err(Error::PairingAmbiguity(format!(
                "left eigenvalue {} matched twice",
                mu[j]
            )));
        }
        used[j] = true;

        let mut v = right.column(i).into_owned();
        if let Some(eta) = &opts.eta {
            let s = (v.transpose() * eta.unitary().conjugate() * &v)[(0, 0)];
            if s.norm() < 1e-14 {
                return Err(Error::DefectivePair(format!(
                    "eigenvector of {} is self-orthogonal",
                    lambda[i]
                )));
            }
            v /= c(s.norm().sqrt());
        }
        let k = (0..d).fold(0, |best, x| {
            if v[x].norm() > v[best].norm() {
                x
            } else {
                best
            }
        });
        let lead = v[k];
        v *= lead.conj() / lead.norm();

        let mut w = left.column(j).into_owned();
        let t = w.dotc(&v);
        if t.norm() < 1e-14 * w.norm() * v.norm() {
            return Err(Error::DefectivePair(format!(
                "left and right eigenvectors of {} are orthogonal",
                lambda[i]
            )));
        }
        w /= t.conj();
        psi.set_column(col, &v);
        phi.set_column(col, &w);
        eigenvalues.push(lambda[i]);
    }
    BiorthogonalSystem::new(eigenvalues, psi, phi)
}

/// For `n = 0..count`, the index of the mode whose `⟨φ|N|ψ⟩` is closest to
/// `n`; each mode is used at most once.
pub fn identify_levels(
    sys: &BiorthogonalSystem,
    number: &OperatorMatrix,
    count: usize,
) -> Result<Vec<usize>> {
    if count > sys.len() || number.dim() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{count} levels requested from {} modes of dimension {}",
            sys.len(),
            sys.dim()
        )));
    }
    let expect: Vec<Complex64> = (0..sys.len())
        .map(|j| sys.matrix_element(j, number.entries(), j))
        .collect();
    let mut used = vec![false; sys.len()];
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let target = c(n as f64);
        let j = (0..sys.len())
            .filter(|&j| !used[j])
            .min_by(|&x, &y| {
                (expect[x] - target)
                    .norm()
                    .total_cmp(&(expect[y] - target).norm())
            })
            .expect("count <= len");
        used[j] = true;
        out.push(j);
    }
    Ok(out)
}

/// `a|ψₙ⟩ = c|ψₙ₋₁⟩`, `⟨φₙ|ã = d⟨φₙ₋₁|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderReport {
    pub n: usize,
    pub c: Complex64,
    pub d: Complex64,
}

impl LadderReport {
    /// `|d - c*|`
    pub fn conjugacy_residual(&self) -> f64 {
        (self.d - self.c.conj()).norm()
    }

    /// `||c|² - n|`
    pub fn number_residual(&self) -> f64 {
        (self.c.norm_sqr() - self.n as f64).abs()
    }
}

/// `c = ⟨φₙ₋₁|a|ψₙ⟩` and `d = ⟨φₙ|ã|ψₙ₋₁⟩` for a system in level order
/// (mode `n` is level `n`). `|c|² = n` needs the `η` normalization of
/// [`DiagonalizeOptions`].
pub fn ladder_matrix_elements(
    sys: &BiorthogonalSystem,
    a: &OperatorMatrix,
    atilde: &OperatorMatrix,
    n: usize,
) -> Result<LadderReport> {
    if n == 0 {
        return Err(Error::InvalidParams(
            "ladder elements start at n = 1".into(),
        ));
    }
    let d = sys.dim();
    if n > d / 4 || n >= sys.len() {
        return Err(Error::TruncationContaminated { level: n, dim: d });
    }
    if a.dim() != d || atilde.dim() != d {
        return Err(Error::DimensionMismatch(
            "operator and system dimensions differ".into(),
        ));
    }
    Ok(LadderReport {
        n,
        c: sys.matrix_element(n - 1, a.entries(), n),
        d: sys.matrix_element(n, atilde.entries(), n - 1),
    })
}

/// `ω₊(n + ½) + ω₋(m + ½) = Ω(n + m + 1) + i(γ/2m)(n - m)`.
pub fn composite_spectrum(p: &DhoParams, n: u64, m: u64) -> Result<Complex64> {
    let f = frequencies(p)?;
    Ok(Complex64::new(
        f.omega * (n + m + 1) as f64,
        p.decay_rate() * (n as f64 - m as f64),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub eigenvalue: Complex64,
    pub biorth_residual: f64,
}

/// Pipeline for `H = p²/2 + ω²x²/2`: reference basis at `|ω|`, η-normalized
/// biorthogonal diagonalization, levels `0..D/4` identified through `N`.
#[derive(Debug, Clone)]
pub struct OscillatorSpectrum {
    pub omega: Complex64,
    pub omega_ref: f64,
    pub system: BiorthogonalSystem,
    /// `system` restricted to levels `0..D/4`, in level order.
    pub levels: BiorthogonalSystem,
    pub rows: Vec<SpectrumRow>,
    pub a: OperatorMatrix,
    pub atilde: OperatorMatrix,
    pub eta: AntilinearOp,
}

pub fn oscillator_spectrum(omega: Complex64, d: usize) -> Result<OscillatorSpectrum> {
    let omega_ref = omega.norm();
    let h = fock_matrix_hamiltonian(omega, omega_ref, d)?;
    let eta = eta_operator(d)?;
    let system = biorthogonal_diagonalize(
        &h,
        &DiagonalizeOptions {
            eta: Some(eta.clone()),
        },
    )?;
    let (a, atilde) = ladder_in_reference(omega, omega_ref, d)?;
    let number = OperatorMatrix::new(atilde.entries() * a.entries(), BasisTag::FockOfReference)?;
    let count = (d / 4).max(1);
    let idx = identify_levels(&system, &number, count)?;
    let residuals = system.mode_residuals();
    let rows = idx
        .iter()
        .enumerate()
        .map(|(n, &j)| SpectrumRow {
            n,
            eigenvalue: system.eigenvalues()[j],
            biorth_residual: residuals[j],
        })
        .collect();
    let levels = system.select(&idx)?;
    Ok(OscillatorSpectrum {
        omega,
        omega_ref,
        system,
        levels,
        rows,
        a,
        atilde,
        eta,
    })
}

/// Writes `n, re, im, biorth_residual`.
pub fn write_spectrum_csv<W: Write>(rows: &[SpectrumRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    out.write_record(["n", "re", "im", "biorth_residual"])
        .map_err(io)?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            r.eigenvalue.re.to_string(),
            r.eigenvalue.im.to_string(),
            format!("{:e}", r.biorth_residual),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Convenience for matrices built from a frequency-dependent closure.
pub fn diagonal(values: &[Complex64]) -> CMatrix {
    DMatrix::from_diagonal(&DVector::from_column_slice(values))
}
