use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling function vanishes identically")]
    ZeroCoupling,

    #[error("dispersion relation is bounded on the sampled range (max sampled value {max_sampled})")]
    BoundedDispersion { max_sampled: f64 },

    #[error("atom level epsilon must be positive, got {0}")]
    NegativeEpsilon(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integral diverges or fails to converge: {0}")]
    DivergentIntegral(String),

    #[error("integrand is not finite at r = {r}")]
    NonFiniteIntegrand { r: f64 },

    #[error("adaptive quadrature did not converge within {nodes} nodes (last two estimates {previous}, {last})")]
    NoConvergence { nodes: usize, previous: f64, last: f64 },

    #[error("{what}: z = {z} is outside the domain z < {limit}")]
    Domain { what: &'static str, z: f64, limit: f64 },

    #[error("no sign change of the Nevanlinna function found: {0}")]
    BracketFailure(String),

    #[error("diagonal part is not positive at node {node} (value {value})")]
    NonPositiveDelta { node: usize, value: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("no eigenvalue cluster detected: {0}")]
    NoCluster(String),

    #[error("matrix too large for dense treatment: dimension {0}")]
    TooLarge(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by front ends to choose an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ZeroCoupling
            | Error::BoundedDispersion { .. }
            | Error::NegativeEpsilon(_)
            | Error::InvalidModel(_)
            | Error::InvalidArgument(_)
            | Error::Json(_)
            | Error::NotApplicable(_)
            | Error::Domain { .. } => ErrorClass::Validation,
            Error::Io(_) | Error::Csv(_) => ErrorClass::Io,
            _ => ErrorClass::Numerical,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroCoupling => "ZeroCoupling",
            Error::BoundedDispersion { .. } => "BoundedDispersion",
            Error::NegativeEpsilon(_) => "NegativeEpsilon",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::DivergentIntegral(_) => "DivergentIntegral",
            Error::NonFiniteIntegrand { .. } => "NonFiniteIntegrand",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::Domain { .. } => "DomainError",
            Error::BracketFailure(_) => "BracketFailure",
            Error::NonPositiveDelta { .. } => "NonPositiveDelta",
            Error::NotApplicable(_) => "NotApplicable",
            Error::NoCluster(_) => "NoCluster",
            Error::TooLarge(_) => "TooLarge",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
