use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("structure constants are not antisymmetric: |C[{k}][{i}][{j}] + C[{k}][{j}][{i}]| = {defect:e}")]
    NotAntisymmetric {
        k: usize,
        i: usize,
        j: usize,
        defect: f64,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate Lagrangian: {0}")]
    Degenerate(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("embedding cannot be decomposed: {0}")]
    Embedding(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            found,
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::dim(context, expected, found))
    }
}
