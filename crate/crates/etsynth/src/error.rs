use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Synthesis(#[from] etsynth_core::Error),

    #[error("case {case_id}: {source}")]
    Case {
        case_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("no clavicle mask at {}", path.display())]
    MissingClavicleMask { path: PathBuf },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: missing required column(s): {}", missing.join(", "))]
    Schema { path: PathBuf, missing: Vec<String> },

    #[error("not enough eligible cases: need {needed}, have {available} ({detail})")]
    Shortfall {
        needed: usize,
        available: usize,
        detail: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_case(self, case_id: &str) -> Self {
        Error::Case {
            case_id: case_id.to_owned(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 for validation problems, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Case { source, .. } => source.exit_code(),
            Error::Io { .. } | Error::Image { .. } | Error::MissingClavicleMask { .. } => 2,
            Error::Csv { source, .. } if source.is_io_error() => 2,
            Error::Json { source, .. } if source.is_io() => 2,
            _ => 1,
        }
    }

    /// Per-case failures that the generator skips and replaces.
    pub fn is_skippable(&self) -> bool {
        match self {
            Error::Case { source, .. } => source.is_skippable(),
            Error::Synthesis(
                etsynth_core::Error::Landmarks { .. } | etsynth_core::Error::OutOfBounds { .. },
            ) => true,
            Error::MissingClavicleMask { .. } => true,
            _ => false,
        }
    }
}
