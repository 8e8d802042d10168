//! Canonical quantization of the damped harmonic oscillator through doubled
//! degrees of freedom.
//!
//! * [`params`]: damping regimes and the physical ↔ chiral parameter maps.
//! * [`solder`]: quadratic Lagrangians and the two soldering routes.
//! * [`classical`]: trajectories, closed forms, chiral flows, Noether charges.
//! * [`hamiltonian`]: Legendre transform, complex canonical maps, first-order route.
//! * [`pseudoq`]: truncated Fock-space quantization of the complex-frequency oscillator.
//! * [`checks`]: randomized invariant suites, also exposed by the CLI.

pub mod checks;
pub mod classical;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod ode;
pub mod params;
pub mod pseudoq;
pub mod scalar;
pub mod solder;
pub mod wire;

pub use error::{Error, Result};
pub use params::{ChiralParams, DhoParams, Regime, RegimeKind};
