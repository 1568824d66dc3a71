use thiserror::Error;

/// Structural errors. Axiom checks that produce "verdicts" (pass/fail with
/// a witness) use dedicated report types instead; `Error` is for data that
/// cannot be worked with at all.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    BadField(String),
    #[error("cannot parse scalar `{0}`")]
    BadScalar(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("basis mismatch in degree {degree}: {detail}")]
    BasisMismatch { degree: i32, detail: String },
    #[error("window mismatch: {0}")]
    Window(String),
    #[error("not a complex in degree {degree}: d_out . d_in != 0")]
    NotAComplex { degree: i32 },
    #[error("axiom `{axiom}` fails at {witness}: {detail}")]
    Axiom {
        axiom: &'static str,
        witness: String,
        detail: String,
    },
    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub fn axiom(axiom: &'static str, witness: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Axiom {
            axiom,
            witness: witness.into(),
            detail: detail.into(),
        }
    }
}
