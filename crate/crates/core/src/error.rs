use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The configuration document could not be read.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configuration value violates its constraint.
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough quadrature nodes for an exact integral.
    #[error("quadrature needs at least {required} nodes, got {given}")]
    InsufficientNodes { required: usize, given: usize },

    /// The basis ceiling is too low to hold the excited wavepacket.
    #[error(
        "basis truncation: occupancy {occupancy:.3e} of the top two levels (j_max = {j_max}) \
         exceeds {tolerance:.1e}; rerun with j_max >= {suggested_j_max}"
    )]
    Truncation {
        occupancy: f64,
        tolerance: f64,
        j_max: u32,
        suggested_j_max: u32,
    },

    /// The integrator lost unitarity.
    #[error("norm drift {drift:.3e} exceeds {tolerance:.1e} at step {step_fs} fs; reduce the step")]
    NormDrift { drift: f64, tolerance: f64, step_fs: f64 },

    /// The population table leaves too much thermal weight above the cutoff.
    #[error("thermal tail above J = {j_cut} holds {tail:.3e} (tolerance {tolerance:.1e}); raise the cutoff")]
    TailMass { j_cut: u32, tail: f64, tolerance: f64 },

    /// A propagation failed for one member of the thermal ensemble.
    #[error("initial state J = {j}, M = {m}: {source}")]
    Member {
        j: u32,
        m: i32,
        #[source]
        source: Box<Error>,
    },

    /// A time or angle grid is unusable.
    #[error("grid error: {0}")]
    Grid(String),
}

impl Error {
    pub(crate) fn validation(key: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_convergence(&self) -> bool {
        match self {
            Error::Truncation { .. } | Error::NormDrift { .. } => true,
            Error::Member { source, .. } => source.is_convergence(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
