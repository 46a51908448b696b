use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shapes {first} and {second} overlap or touch (gap {gap:.3e})")]
    Overlap {
        first: usize,
        second: usize,
        gap: f64,
    },

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("scene must contain at least one shape")]
    EmptyScene,

    #[error("scale factor of an affine map must be nonzero")]
    ZeroScale,

    #[error("basis function evaluated at its pole or corner point {0}")]
    PoleEvaluation(num_complex::Complex64),

    #[error("point {0} lies on the branch cut of a corner-adapted function")]
    BranchCut(num_complex::Complex64),

    #[error("corner-adapted functions have no residue formula; use quadrature")]
    NonRationalBasis,

    #[error("pole at {0} lies on the integration circle")]
    PoleOnContour(num_complex::Complex64),

    #[error(
        "adaptive quadrature did not reach tolerance {tol:.1e} within depth {depth} near t={at:.6}"
    )]
    MaxDepth { tol: f64, depth: u32, at: f64 },

    #[error("gram matrix of size {n} is not numerically positive definite; try a smaller basis")]
    SingularGram { n: usize },

    #[error("lower bound {lower} exceeds upper bound {upper} beyond slack {slack:.3e}")]
    BracketInverted { lower: f64, upper: f64, slack: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("centers {0} and {1} coincide")]
    DuplicateCenter(usize, usize),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("split index {m} must lie in 1..={max}")]
    Split { m: usize, max: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Errors caused by the caller's input rather than by numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Overlap { .. }
                | Error::DegenerateShape(_)
                | Error::EmptyScene
                | Error::ZeroScale
                | Error::Domain(_)
                | Error::DuplicateCenter(..)
                | Error::Precondition(_)
                | Error::Split { .. }
                | Error::Schedule(_)
                | Error::Config(_)
        )
    }
}
