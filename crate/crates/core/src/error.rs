use core::fmt;

/// Every failure the library can report.
///
/// Admissibility failures (`AsymmetricD` through `NotMinimal`) are kept as
/// separate variants so callers can name the violated assumption.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix dimensions do not fit together.
    DimensionMismatch(&'static str),
    /// A NaN or infinite entry was supplied.
    NonFinite(&'static str),
    /// Symmetric matrix with an eigenvalue below the positivity threshold.
    NotPositiveDefinite,
    /// Two eigenvalues have product (numerically) equal to one.
    NotUnmixed,
    /// Basis columns are not orthonormal.
    NotOrthonormal,
    /// Schur decomposition or block reordering failed.
    EigenFailure,
    /// Two eigenvalues coincide, so block sums do not cover every invariant subspace.
    RepeatedEigenvalues,
    /// A Schur block index is outside the structure.
    BlockIndexOutOfRange {
        index: usize,
        blocks: usize,
    },
    /// The feedthrough matrix D is singular.
    SingularD,
    /// The evaluation point is a pole of the transfer function.
    PoleHit,
    AsymmetricD,
    NotPDD,
    SingularGamma,
    MixedA,
    MixedGamma,
    NotMinimal,
    /// Random model generation exhausted its retry budget.
    GenerationFailure {
        attempts: usize,
        last: &'static str,
    },
    /// A has an eigenvalue at the origin, so poles cannot be flipped.
    SingularA,
    /// An anchor solution of a Stein equation is singular.
    SingularAnchor,
    /// The supplied subspace is not invariant under the relevant matrix.
    InvarianceViolation {
        error: f64,
        tol: f64,
    },
    /// A Riccati solution failed its residual check.
    ResidualTooLarge {
        residual: f64,
        tol: f64,
    },
    /// The kernel of a computed solution is not the requested subspace.
    KernelMismatch {
        expected: usize,
        found: usize,
    },
    /// I + BᵀQB is not positive definite.
    DeltaNotPD,
    /// The inverted middle term of a Riccati equation is singular.
    InnerSingular,
    /// The polar factor needed to normalize D_Q does not exist.
    PolarFailure,
}

impl Error {
    /// Short stable identifier, used in CLI messages and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NotUnmixed => "NotUnmixed",
            Error::NotOrthonormal => "NotOrthonormal",
            Error::EigenFailure => "EigenFailure",
            Error::RepeatedEigenvalues => "RepeatedEigenvalues",
            Error::BlockIndexOutOfRange { .. } => "BlockIndexOutOfRange",
            Error::SingularD => "SingularD",
            Error::PoleHit => "PoleHit",
            Error::AsymmetricD => "AsymmetricD",
            Error::NotPDD => "NotPDD",
            Error::SingularGamma => "SingularGamma",
            Error::MixedA => "MixedA",
            Error::MixedGamma => "MixedGamma",
            Error::NotMinimal => "NotMinimal",
            Error::GenerationFailure { .. } => "GenerationFailure",
            Error::SingularA => "SingularA",
            Error::SingularAnchor => "SingularAnchor",
            Error::InvarianceViolation { .. } => "InvarianceViolation",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::KernelMismatch { .. } => "KernelMismatch",
            Error::DeltaNotPD => "DeltaNotPD",
            Error::InnerSingular => "InnerSingular",
            Error::PolarFailure => "PolarFailure",
        }
    }

    /// True for the errors raised by the admissibility gate.
    pub fn is_admissibility(&self) -> bool {
        matches!(
            self,
            Error::AsymmetricD
                | Error::NotPDD
                | Error::SingularGamma
                | Error::MixedA
                | Error::MixedGamma
                | Error::NotMinimal
                | Error::SingularD
                | Error::DimensionMismatch(_)
                | Error::NonFinite(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch(what) => write!(f, "DimensionMismatch: {what}"),
            Error::NonFinite(what) => write!(f, "NonFinite: {what} has a NaN or infinite entry"),
            Error::NotPositiveDefinite => write!(f, "NotPositiveDefinite: matrix is not positive definite"),
            Error::NotUnmixed => write!(f, "NotUnmixed: two eigenvalues have product one"),
            Error::NotOrthonormal => write!(f, "NotOrthonormal: basis columns are not orthonormal"),
            Error::EigenFailure => write!(f, "EigenFailure: Schur decomposition did not converge"),
            Error::RepeatedEigenvalues => write!(f, "RepeatedEigenvalues: eigenvalues are not pairwise distinct"),
            Error::BlockIndexOutOfRange { index, blocks } => {
                write!(f, "BlockIndexOutOfRange: block {index} requested, structure has {blocks}")
            }
            Error::SingularD => write!(f, "SingularD: feedthrough matrix D is singular"),
            Error::PoleHit => write!(f, "PoleHit: evaluation point is a pole"),
            Error::AsymmetricD => write!(f, "AsymmetricD: D is not symmetric"),
            Error::NotPDD => write!(f, "NotPDD: D is not positive definite"),
            Error::SingularGamma => write!(f, "SingularGamma: numerator matrix A - B D^-1 C is singular"),
            Error::MixedA => write!(f, "MixedA: A is not unmixed"),
            Error::MixedGamma => write!(f, "MixedGamma: numerator matrix is not unmixed"),
            Error::NotMinimal => write!(f, "NotMinimal: realization is not controllable and observable"),
            Error::GenerationFailure { attempts, last } => {
                write!(f, "GenerationFailure: no admissible model after {attempts} attempts (last rejection: {last})")
            }
            Error::SingularA => write!(f, "SingularA: A has an eigenvalue at the origin"),
            Error::SingularAnchor => write!(f, "SingularAnchor: anchor Stein solution is singular"),
            Error::InvarianceViolation { error, tol } => {
                write!(f, "InvarianceViolation: invariance error {error:e} exceeds {tol:e}")
            }
            Error::ResidualTooLarge { residual, tol } => {
                write!(f, "ResidualTooLarge: residual {residual:e} exceeds {tol:e}")
            }
            Error::KernelMismatch { expected, found } => {
                write!(f, "KernelMismatch: kernel dimension {found}, expected {expected}")
            }
            Error::DeltaNotPD => write!(f, "DeltaNotPD: I + B'QB is not positive definite"),
            Error::InnerSingular => write!(f, "InnerSingular: inverted Riccati term is singular"),
            Error::PolarFailure => write!(f, "PolarFailure: D Delta^-1/2 is singular"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
