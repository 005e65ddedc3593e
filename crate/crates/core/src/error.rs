use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("argument {value} outside the domain [0, {bound}) of φ")]
    Domain { value: f64, bound: f64 },

    #[error("coordinate {index}: argument {value} outside the domain [0, {bound}) of φ")]
    CoordinateDomain {
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("value {value} is not in the range of φ")]
    Range { value: f64 },

    #[error("invalid Orlicz function: {0}")]
    InvalidPhi(String),

    #[error("degenerate body: radial value {value} is not positive")]
    Degenerate { value: f64 },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("integrand is not finite ({value}) at node {index}")]
    Integrand { index: usize, value: f64 },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("fixed point iteration did not converge in {iterations} iterations (last volumes {trace:?})")]
    FixedPoint { iterations: usize, trace: Vec<f64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("at direction {direction:?}: {source}")]
    AtDirection {
        direction: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("at quadrature node {index}: {source}")]
    AtNode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("at ε = {epsilon}: {source}")]
    AtEpsilon {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Root, bracket or fixed point failure, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Solver(_) | Error::FixedPoint { .. } => true,
            Error::AtDirection { source, .. }
            | Error::AtNode { source, .. }
            | Error::AtEpsilon { source, .. }
            | Error::Context { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    /// True for φ-domain violations, looking through location wrappers.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::Domain { .. } | Error::CoordinateDomain { .. } => true,
            Error::AtDirection { source, .. }
            | Error::AtNode { source, .. }
            | Error::AtEpsilon { source, .. }
            | Error::Context { source, .. } => source.is_domain(),
            _ => false,
        }
    }

    /// Innermost error below the location and context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtDirection { source, .. }
            | Error::AtNode { source, .. }
            | Error::AtEpsilon { source, .. }
            | Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn at_direction(self, u: &[f64]) -> Error {
        Error::AtDirection {
            direction: u.to_vec(),
            source: Box::new(self),
        }
    }

    pub(crate) fn at_node(self, index: usize) -> Error {
        Error::AtNode {
            index,
            source: Box::new(self),
        }
    }
}
