use thiserror::Error;

/// Errors surfaced by the simulation and training layers.
#[derive(Error, Debug)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite field component at cell {cell} (t = {time:.3e} s)")]
    NumericalFailure { cell: usize, time: f64 },

    #[error(
        "integrator instability: norm drift {drift:.3e} exceeds 1e-6 at t = {time:.3e} s; \
         reduce the time step"
    )]
    Instability { drift: f64, time: f64 },

    /// Instability hit while driving a reservoir; carries the input index.
    #[error("reservoir drive failed at input step {step}: {source}")]
    DriveFailure {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("singular normal equations at lambda = {lambda:.3e}; use lambda > 0")]
    Singular { lambda: f64 },

    #[error("target sequence is constant; NMSE normalisation undefined")]
    DegenerateTarget,

    #[error("ingestion error at line {line}: {message}")]
    Ingestion { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
