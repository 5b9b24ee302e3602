use thiserror::Error;

/// Errors raised by the frame toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("bad dimension: {0}")]
    BadDim(String),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error(
        "matrix is not positive semidefinite (min eigenvalue {min_eig:e} below -{threshold:e})"
    )]
    NotPsd { min_eig: f64, threshold: f64 },
    #[error("random generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("weight {index} has zero modulus")]
    ZeroWeight { index: usize },
    #[error("system is not a tight K-g-frame")]
    NotTightKG,
    #[error("system is not a K-g-frame (range(K) is not contained in range(S))")]
    NotKGFrame,
    #[error("range(K) is not contained in range(S) (relative residual {residual:e})")]
    RangeCondFailed { residual: f64 },
    #[error("not an approximate K-g-dual (defect {defect} >= 1)")]
    NotApproxDual { defect: f64 },
    #[error("vector is not in range(K) (relative residual {residual:e})")]
    NotInRange { residual: f64 },
    #[error("family {index} is not a frame for its subspace")]
    NotAFrame { index: usize },
    #[error("index {index} out of range for a system with {len} blocks")]
    BadIndex { index: usize, len: usize },
    #[error("block {index} has operator norm {norm}, expected 1")]
    NotUnitNorm { index: usize, norm: f64 },
    #[error("K* is not bounded below (smallest singular value {lower:e})")]
    KStarNotBoundedBelow { lower: f64 },
    #[error("frame operator is singular")]
    FrameOpSingular,
    #[error("{count} subsets exceed the enumeration limit of {limit}")]
    TooManySubsets { count: u128, limit: u128 },
}

impl Error {
    /// True when the error stems from malformed input rather than from the
    /// mathematics of a well-formed instance.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimMismatch(_)
                | Error::BadDim(_)
                | Error::NonFinite(_)
                | Error::BadIndex { .. }
                | Error::ZeroWeight { .. }
                | Error::TooManySubsets { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
