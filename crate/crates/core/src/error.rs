use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration or domain value broke one of its invariants.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("projection has no positive support")]
    EmptySupport,

    #[error("case {source_id}: found {found} clavicle component(s) of area >= {min_area}, need 2")]
    Landmarks {
        source_id: String,
        found: usize,
        min_area: usize,
    },

    #[error("{what} out of bounds: {detail}")]
    OutOfBounds { what: &'static str, detail: String },

    #[error("shape mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    ShapeMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
