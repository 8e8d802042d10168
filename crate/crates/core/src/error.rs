use thiserror::Error;

/// Every failure the library can report.
///
/// Variant names are part of the CLI contract: they are emitted verbatim in
/// the machine-readable error JSON, see [`Error::name`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid oscillator parameters: {0}")]
    InvalidParams(String),
    #[error("identified parameters are not physical: {0}")]
    NonPhysical(String),
    #[error("critical damping (R = 1) has no chiral decomposition")]
    CriticalDamping,
    #[error("motion is not oscillatory (R = {ratio})")]
    NotOscillatory { ratio: f64 },
    #[error("degenerate couplings: {0}")]
    DegenerateCouplings(String),
    #[error("integration step too large: estimated error {estimate:e} exceeds {tolerance:e}")]
    StepSizeTooLarge { estimate: f64, tolerance: f64 },
    #[error("k+ + k- vanishes; auxiliary elimination is singular")]
    DegenerateSum,
    #[error("soldered residual still depends on y + z (deviation {0:e})")]
    GaugeDependence(f64),
    #[error("a kinetic term for the eliminated variable survives (magnitude {0:e})")]
    KineticResidue(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lagrangian is not first order: {0}")]
    NotFirstOrder(String),
    #[error("canonicity check failed (residual {0:e}); square-root branches are inconsistent")]
    BranchInconsistency(f64),
    #[error("coupling kappa vanishes")]
    ZeroCoupling,
    #[error("frequency must have positive real part, got {0}")]
    BadFrequency(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("defective eigenvalue cluster near {0}")]
    DefectivePair(String),
    #[error("eigenvalues {0} cannot be paired unambiguously")]
    PairingAmbiguity(String),
    #[error("level {level} is too close to the truncation dimension {dim}")]
    TruncationContaminated { level: usize, dim: usize },
    #[error("exact rational arithmetic unavailable: {0}")]
    ExactModeUnavailable(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Variant name, stable across releases.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonPhysical(_) => "NonPhysical",
            Error::CriticalDamping => "CriticalDamping",
            Error::NotOscillatory { .. } => "NotOscillatory",
            Error::DegenerateCouplings(_) => "DegenerateCouplings",
            Error::StepSizeTooLarge { .. } => "StepSizeTooLarge",
            Error::DegenerateSum => "DegenerateSum",
            Error::GaugeDependence(_) => "GaugeDependence",
            Error::KineticResidue(_) => "KineticResidue",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotFirstOrder(_) => "NotFirstOrder",
            Error::BranchInconsistency(_) => "BranchInconsistency",
            Error::ZeroCoupling => "ZeroCoupling",
            Error::BadFrequency(_) => "BadFrequency",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::DefectivePair(_) => "DefectivePair",
            Error::PairingAmbiguity(_) => "PairingAmbiguity",
            Error::TruncationContaminated { .. } => "TruncationContaminated",
            Error::ExactModeUnavailable(_) => "ExactModeUnavailable",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
