use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not symplectic (residual {residual:.3e} > tol {tol:.1e})")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("D_omega has imaginary part {imag:.3e}; input is not symplectic")]
    ComplexDeterminant { imag: f64 },

    #[error("step too large at n = {n}: {reason}; increase N")]
    StepTooLarge { n: usize, reason: String },

    #[error("coefficient extraction failed: {0}")]
    Extraction(String),

    #[error("extraction at n = {n} failed ({reason}); refine N")]
    RefineN { n: usize, reason: String },

    #[error("block is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("unsupported standard path (m = {m}, j = {j}): {reason}")]
    UnsupportedStandardPath { m: usize, j: i64, reason: String },

    #[error("hermitian assembly residual {residual:.3e} exceeds 1e-12")]
    NotHermitian { residual: f64 },

    #[error("null index {m_zero} disagrees with Floquet nullity {nu} (smallest |eigenvalue| {smallest:.3e}, threshold {threshold:.3e})")]
    FloquetMismatch {
        m_zero: usize,
        nu: usize,
        smallest: f64,
        threshold: f64,
    },

    #[error("probe angle {theta:.3e} too large: scales disagree ({coarse:?} vs {fine:?})")]
    ProbeTooLarge {
        theta: f64,
        coarse: (i64, i64),
        fine: (i64, i64),
    },

    #[error("perturbed endpoint still degenerate (nullity {nullity}, theta0 {theta0:.3e})")]
    RetryPerturbation { nullity: usize, theta0: f64 },

    #[error("unresolved degeneracy: {0}")]
    UnresolvedDegeneracy(String),

    #[error("spectral flow not resolved: {0}")]
    FlowResolution(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error beneath any stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Input(_)
            | Error::Io { .. }
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Dimension(_)
            | Error::NotSymmetric { .. }
            | Error::UnsupportedStandardPath { .. } => 2,
            Error::FloquetMismatch { .. }
            | Error::ProbeTooLarge { .. }
            | Error::RetryPerturbation { .. }
            | Error::UnresolvedDegeneracy(_)
            | Error::FlowResolution(_)
            | Error::Integration(_)
            | Error::StepTooLarge { .. }
            | Error::RefineN { .. }
            | Error::Extraction(_) => 3,
            Error::NotSymplectic { .. }
            | Error::ComplexDeterminant { .. }
            | Error::NotHermitian { .. } => 1,
        }
    }
}
