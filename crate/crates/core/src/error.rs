use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameters must satisfy alpha > -1 and beta > -1 (got alpha={alpha}, beta={beta})")]
    InvalidParameters { alpha: f64, beta: f64 },

    #[error("theta={0} must lie strictly inside (0, pi)")]
    ThetaOutOfRange(f64),

    #[error("Riesz potentials need alpha+beta != -1: the bottom eigenvalue vanishes for alpha={alpha}, beta={beta}")]
    SingularPair { alpha: f64, beta: f64 },

    #[error("parameter mismatch: operator expects (alpha={expected_alpha}, beta={expected_beta}), expansion has (alpha={found_alpha}, beta={found_beta})")]
    ParameterMismatch {
        expected_alpha: f64,
        expected_beta: f64,
        found_alpha: f64,
        found_beta: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("a quadrature rule with {nodes} nodes cannot resolve {modes} modes")]
    ResolutionMismatch { nodes: usize, modes: usize },

    #[error("quadrature of size {requested} exceeds the supported cap of {cap} nodes")]
    QuadratureCap { requested: usize, cap: usize },

    #[error("exponent p={p} lies outside the admissible interval ({lower}, {upper})")]
    ExponentOutsidePencil { p: f64, lower: f64, upper: f64 },

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("numerical integration did not converge: {0}")]
    NonConvergent(String),

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),

    #[error("eigenvalue iteration failed to converge for a Jacobi matrix of size {0}")]
    EigenFailure(usize),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergent(_)
                | Error::UnderResolved(_)
                | Error::NonFinite(_)
                | Error::EigenFailure(_)
        )
    }

    pub(crate) fn mismatch(
        expected: crate::ParameterPair,
        found: crate::ParameterPair,
    ) -> Self {
        Error::ParameterMismatch {
            expected_alpha: expected.alpha(),
            expected_beta: expected.beta(),
            found_alpha: found.alpha(),
            found_beta: found.beta(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
