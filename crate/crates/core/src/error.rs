use std::path::PathBuf;

/// Errors produced by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid path parameters: {0}")]
    InvalidPath(String),

    #[error("invalid path set: {0}")]
    InvalidPathSet(String),

    #[error("invalid array geometry: {0}")]
    InvalidArray(String),

    #[error("invalid training pulse: {0}")]
    InvalidPulse(String),

    #[error(
        "observation window [{window_start:.3e}, {window_end:.3e}] s does not cover \
         the delay spread plus pulse tails [{needed_start:.3e}, {needed_end:.3e}] s"
    )]
    WindowTooShort {
        window_start: f64,
        window_end: f64,
        needed_start: f64,
        needed_end: f64,
    },

    #[error("invalid estimator configuration: {0}")]
    InvalidEstimator(String),

    #[error(
        "Fisher information matrix is singular (condition number {condition:.3e} > {threshold:.1e}); \
         paths are too close to be resolved, consider merging them with merge_close_paths"
    )]
    SingularFisher { condition: f64, threshold: f64 },

    #[error(
        "experiment aborted: {source}; separation report: max residual cross term {:.3}",
        report.max_cross_term
    )]
    Unresolvable {
        #[source]
        source: Box<Error>,
        report: Box<crate::bounds::SeparationReport>,
    },

    #[error("{path}: row {row}: {message}")]
    Parse { path: String, row: usize, message: String },

    #[error("unknown scenario recipe `{0}`")]
    UnknownRecipe(String),

    #[error("unknown bundled scenario `{0}`")]
    UnknownScenario(String),

    #[error("frequency grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
