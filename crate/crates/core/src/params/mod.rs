//! Damping regimes and the maps between the physical oscillator triple
//! `(m, γ, k)` and the couplings `(Γ, k₊, k₋)` of the chiral doublet.
//!
//! The chiral-to-physical direction is the identification
//!
//! ```text
//! m = -Γ² / (k₊ + k₋),   γ = Γ (k₊ - k₋) / (k₊ + k₋),   k = k₊ k₋ / (k₊ + k₋)
//! ```
//!
//! Real couplings can only produce overdamped motion. Underdamped motion needs
//! `k₊ = κ`, `k₋ = κ*` and `Γ = -i g` with `g > 0`, which reduces to
//! `m = g²/(2 Re κ)`, `γ = g Im κ / Re κ`, `k = |κ|²/(2 Re κ)`.
//!
//! The inverse maps are unique:
//!
//! * underdamped: `g = 2mΩ`, `κ = 2mΩ² + iγΩ`. This follows from
//!   `Re κ / g = Ω`, `Im κ / g = γ/2m` together with `m = g²/(2 Re κ)`, which
//!   pins the otherwise free overall scale of `(g, κ)`.
//! * overdamped: with `s = 4k - γ²/m`, `Γ = sqrt(γ² - 4km)`, `d = γ s / Γ`,
//!   `k± = (s ± d)/2`. Here `s = k₊ + k₋` and `d = k₊ - k₋`; substituting
//!   back gives `Γ² = γ² - 4km` identically, so `Γ` cannot be rescaled
//!   jointly with `k±` at fixed `(m, γ, k)`.

pub mod exact;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Band around `R = 1` treated as critical damping.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Physical parameters of `m ẍ + γ ẋ + k x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDho", into = "RawDho")]
pub struct DhoParams {
    m: f64,
    gamma: f64,
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDho {
    m: f64,
    gamma: f64,
    k: f64,
}

impl TryFrom<RawDho> for DhoParams {
    type Error = Error;
    fn try_from(r: RawDho) -> Result<Self> {
        DhoParams::new(r.m, r.gamma, r.k)
    }
}

impl From<DhoParams> for RawDho {
    fn from(p: DhoParams) -> Self {
        RawDho {
            m: p.m,
            gamma: p.gamma,
            k: p.k,
        }
    }
}

impl DhoParams {
    pub fn new(m: f64, gamma: f64, k: f64) -> Result<Self> {
        if !(m.is_finite() && gamma.is_finite() && k.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite parameters m={m}, gamma={gamma}, k={k}"
            )));
        }
        if m <= 0.0 || k <= 0.0 || gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "require m > 0, k > 0, gamma >= 0; got m={m}, gamma={gamma}, k={k}"
            )));
        }
        Ok(Self { m, gamma, k })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Decay rate `γ/2m` of the forward mode.
    pub fn decay_rate(&self) -> f64 {
        self.gamma / (2.0 * self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    Overdamped,
    Critical,
    Underdamped,
}

/// Classification by `R = k / (γ²/4m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// `f64::INFINITY` when `γ = 0`.
    pub ratio: f64,
}

pub fn classify(p: &DhoParams) -> Regime {
    if p.gamma == 0.0 {
        return Regime {
            kind: RegimeKind::Underdamped,
            ratio: f64::INFINITY,
        };
    }
    let ratio = 4.0 * p.m * p.k / (p.gamma * p.gamma);
    let kind = if (ratio - 1.0).abs() <= CRITICAL_TOL {
        RegimeKind::Critical
    } else if ratio > 1.0 {
        RegimeKind::Underdamped
    } else {
        RegimeKind::Overdamped
    };
    Regime { kind, ratio }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChiralRegime {
    RealOverdamped,
    ComplexUnderdamped,
}

/// Couplings of the doublet `L± = ±(Γ/2) εᵢⱼ xᵢ ẋⱼ - (k±/2) gᵢⱼ xᵢ xⱼ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiralParams {
    pub gamma: Complex64,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
    pub regime: ChiralRegime,
}

impl ChiralParams {
    /// Real couplings. Only finiteness is enforced here; the sign ledger is
    /// checked by [`chiral_to_physical`] so that degenerate doublets can still
    /// be built and fed to the soldering routes.
    pub fn real(gamma: f64, k_plus: f64, k_minus: f64) -> Result<Self> {
        if !(gamma.is_finite() && k_plus.is_finite() && k_minus.is_finite()) {
            return Err(Error::InvalidParams("non-finite chiral couplings".into()));
        }
        Ok(Self {
            gamma: Complex64::new(gamma, 0.0),
            k_plus: Complex64::new(k_plus, 0.0),
            k_minus: Complex64::new(k_minus, 0.0),
            regime: ChiralRegime::RealOverdamped,
        })
    }

    /// `Γ = -i g`, `k₊ = κ`, `k₋ = κ*`.
    pub fn complex(g: f64, kappa: Complex64) -> Result<Self> {
        if !(g.is_finite() && kappa.re.is_finite() && kappa.im.is_finite()) {
            return Err(Error::InvalidParams("non-finite chiral couplings".into()));
        }
        if g <= 0.0 {
            return Err(Error::InvalidParams(format!("g must be positive, got {g}")));
        }
        Ok(Self {
            gamma: Complex64::new(0.0, -g),
            k_plus: kappa,
            k_minus: kappa.conj(),
            regime: ChiralRegime::ComplexUnderdamped,
        })
    }

    /// `g` for the complex branch.
    pub fn g(&self) -> Option<f64> {
        match self.regime {
            ChiralRegime::ComplexUnderdamped => Some(-self.gamma.im),
            ChiralRegime::RealOverdamped => None,
        }
    }

    /// `κ = k₊` for the complex branch.
    pub fn kappa(&self) -> Option<Complex64> {
        match self.regime {
            ChiralRegime::ComplexUnderdamped => Some(self.k_plus),
            ChiralRegime::RealOverdamped => None,
        }
    }
}

/// The identification `(Γ, k₊, k₋) ↦ (m, γ, k)` evaluated over any field.
pub fn identify<S: Scalar>(gamma: &S, k_plus: &S, k_minus: &S) -> Result<[S; 3]> {
    let sum = k_plus.clone() + k_minus.clone();
    if sum.is_zero() {
        return Err(Error::DegenerateSum);
    }
    let m = -(gamma.clone() * gamma.clone()) / sum.clone();
    let damping = gamma.clone() * (k_plus.clone() - k_minus.clone()) / sum.clone();
    let k = k_plus.clone() * k_minus.clone() / sum;
    Ok([m, damping, k])
}

fn physical_or_err(m: f64, gamma: f64, k: f64) -> Result<DhoParams> {
    if !(m.is_finite() && gamma.is_finite() && k.is_finite()) || m <= 0.0 || k <= 0.0 || gamma < 0.0
    {
        return Err(Error::NonPhysical(format!("m={m}, gamma={gamma}, k={k}")));
    }
    DhoParams::new(m, gamma, k)
}

pub fn chiral_to_physical(c: &ChiralParams) -> Result<DhoParams> {
    match c.regime {
        ChiralRegime::RealOverdamped => {
            let [m, gamma, k] = identify(&c.gamma.re, &c.k_plus.re, &c.k_minus.re)?;
            physical_or_err(m, gamma, k)
        }
        ChiralRegime::ComplexUnderdamped => {
            let g = -c.gamma.im;
            let kappa = c.k_plus;
            if kappa.re == 0.0 {
                return Err(Error::NonPhysical(
                    "Re kappa = 0 gives infinite mass".into(),
                ));
            }
            let m = g * g / (2.0 * kappa.re);
            let gamma = g * kappa.im / kappa.re;
            let k = kappa.norm_sqr() / (2.0 * kappa.re);
            physical_or_err(m, gamma, k)
        }
    }
}

pub fn physical_to_chiral(p: &DhoParams) -> Result<ChiralParams> {
    let regime = classify(p);
    match regime.kind {
        RegimeKind::Critical => Err(Error::CriticalDamping),
        RegimeKind::Underdamped => {
            let omega = natural_frequency(p);
            let g = 2.0 * p.m * omega;
            let kappa = Complex64::new(2.0 * p.m * omega * omega, p.gamma * omega);
            ChiralParams::complex(g, kappa)
        }
        RegimeKind::Overdamped => {
            let s = 4.0 * p.k - p.gamma * p.gamma / p.m;
            let gamma_c = (p.gamma * p.gamma - 4.0 * p.k * p.m).sqrt();
            let d = p.gamma * s / gamma_c;
            ChiralParams::real(gamma_c, 0.5 * (s + d), 0.5 * (s - d))
        }
    }
}

/// Frequencies of the underdamped motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedFrequencies {
    pub omega: f64,
    pub omega_plus: Complex64,
    pub omega_minus: Complex64,
}

/// `Ω = sqrt((k - γ²/4m)/m)`; only meaningful when underdamped.
fn natural_frequency(p: &DhoParams) -> f64 {
    ((p.k - p.gamma * p.gamma / (4.0 * p.m)) / p.m).sqrt()
}

pub fn frequencies(p: &DhoParams) -> Result<DerivedFrequencies> {
    let regime = classify(p);
    if regime.kind != RegimeKind::Underdamped {
        return Err(Error::NotOscillatory {
            ratio: regime.ratio,
        });
    }
    let omega = natural_frequency(p);
    let omega_plus = Complex64::new(omega, p.decay_rate());
    Ok(DerivedFrequencies {
        omega,
        omega_plus,
        omega_minus: omega_plus.conj(),
    })
}

/// `R` computed directly from the couplings.
pub fn ratio_from_chiral(c: &ChiralParams) -> Result<f64> {
    match c.regime {
        ChiralRegime::RealOverdamped => {
            let (kp, km) = (c.k_plus.re, c.k_minus.re);
            if kp == km {
                return Err(Error::DegenerateCouplings("k+ = k-".into()));
            }
            let r = (kp + km) / (kp - km);
            Ok(1.0 - r * r)
        }
        ChiralRegime::ComplexUnderdamped => {
            let kappa = c.k_plus;
            if kappa.im == 0.0 {
                return Err(Error::DegenerateCouplings("Im kappa = 0".into()));
            }
            let r = kappa.re / kappa.im;
            Ok(1.0 + r * r)
        }
    }
}
