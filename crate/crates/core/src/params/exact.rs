//! Exact rational arithmetic for the real (overdamped) branch.
//!
//! The underdamped branch needs complex square roots and stays in floating
//! point.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{identify, DhoParams, RegimeKind};
use crate::error::{Error, Result};
use crate::scalar::rational_sqrt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalDho {
    pub m: BigRational,
    pub gamma: BigRational,
    pub k: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalChiral {
    pub gamma: BigRational,
    pub k_plus: BigRational,
    pub k_minus: BigRational,
}

impl RationalDho {
    pub fn new(m: BigRational, gamma: BigRational, k: BigRational) -> Result<Self> {
        if !m.is_positive() || !k.is_positive() || gamma.is_negative() {
            return Err(Error::InvalidParams(format!(
                "require m > 0, k > 0, gamma >= 0; got m={m}, gamma={gamma}, k={k}"
            )));
        }
        Ok(Self { m, gamma, k })
    }

    pub fn to_f64(&self) -> Result<DhoParams> {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        DhoParams::new(f(&self.m), f(&self.gamma), f(&self.k))
    }

    /// `R` as an exact rational; `None` when `γ = 0`.
    pub fn ratio(&self) -> Option<BigRational> {
        if self.gamma.is_zero() {
            return None;
        }
        let four = BigRational::from_integer(4.into());
        Some(four * &self.m * &self.k / (&self.gamma * &self.gamma))
    }

    pub fn regime(&self) -> RegimeKind {
        match self.ratio() {
            None => RegimeKind::Underdamped,
            Some(r) if r == BigRational::one() => RegimeKind::Critical,
            Some(r) if r > BigRational::one() => RegimeKind::Underdamped,
            Some(_) => RegimeKind::Overdamped,
        }
    }
}

pub fn chiral_to_physical_exact(c: &RationalChiral) -> Result<RationalDho> {
    let [m, gamma, k] = identify(&c.gamma, &c.k_plus, &c.k_minus)?;
    RationalDho::new(m.clone(), gamma.clone(), k.clone())
        .map_err(|_| Error::NonPhysical(format!("m={m}, gamma={gamma}, k={k}")))
}

/// Exact overdamped inverse. Fails when `γ² - 4km` is not the square of a
/// rational, since `Γ` would then be irrational.
pub fn physical_to_chiral_exact(p: &RationalDho) -> Result<RationalChiral> {
    match p.regime() {
        RegimeKind::Critical => return Err(Error::CriticalDamping),
        RegimeKind::Underdamped => {
            return Err(Error::ExactModeUnavailable(
                "the underdamped branch needs complex square roots".into(),
            ))
        }
        RegimeKind::Overdamped => {}
    }
    let four = BigRational::from_integer(4.into());
    let disc = &p.gamma * &p.gamma - &four * &p.k * &p.m;
    let gamma_c = rational_sqrt(&disc).ok_or_else(|| {
        Error::ExactModeUnavailable(format!("gamma^2 - 4km = {disc} is not a rational square"))
    })?;
    let s = four * &p.k - &p.gamma * &p.gamma / &p.m;
    let d = &p.gamma * &s / &gamma_c;
    let two = BigRational::from_integer(2.into());
    Ok(RationalChiral {
        gamma: gamma_c,
        k_plus: (&s + &d) / &two,
        k_minus: (&s - &d) / &two,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn anchor_round_trip_is_exact() {
        let c = RationalChiral {
            gamma: q(1, 1),
            k_plus: q(-2, 1),
            k_minus: q(1, 1),
        };
        let p = chiral_to_physical_exact(&c).unwrap();
        assert_eq!(p, RationalDho::new(q(1, 1), q(3, 1), q(2, 1)).unwrap());
        assert_eq!(p.ratio(), Some(q(8, 9)));
        assert_eq!(physical_to_chiral_exact(&p).unwrap(), c);
    }

    #[test]
    fn irrational_gamma_is_reported() {
        // γ² - 4km = 9 - 4·1·1 = 5
        let p = RationalDho::new(q(1, 1), q(3, 1), q(1, 1)).unwrap();
        assert!(matches!(
            physical_to_chiral_exact(&p),
            Err(Error::ExactModeUnavailable(_))
        ));
    }

    #[test]
    fn critical_and_underdamped_rejected() {
        let crit = RationalDho::new(q(1, 1), q(2, 1), q(1, 1)).unwrap();
        assert_eq!(physical_to_chiral_exact(&crit), Err(Error::CriticalDamping));
        let under = RationalDho::new(q(1, 2), q(1, 1), q(1, 1)).unwrap();
        assert!(matches!(
            physical_to_chiral_exact(&under),
            Err(Error::ExactModeUnavailable(_))
        ));
    }
}
