use std::fmt;
use std::process::ExitCode;

use absa_xai::aspects::AspectError;
use absa_xai::corpus::{CorpusError, FetchError, StoreError};
use absa_xai::explain::ExplainError;
use absa_xai::inference::InferenceError;
use absa_xai::report::ReportError;

/// Process exit statuses. Usage errors are reported by clap with status 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io = 1,
    Config = 3,
    Network = 4,
    Model = 5,
    Data = 6,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Data, message)
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind as u8)
    }

    fn label(&self) -> &'static str {
        match self.kind {
            ErrorKind::Io => "i/o error",
            ErrorKind::Config => "config error",
            ErrorKind::Network => "network error",
            ErrorKind::Model => "model error",
            ErrorKind::Data => "data error",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label(), self.message)
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        let kind = match e.root() {
            InferenceError::EmptyInput | InferenceError::EmptyAspect => ErrorKind::Data,
            InferenceError::UnknownLabel(_) => ErrorKind::Config,
            _ => ErrorKind::Model,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<FetchError> for CliError {
    fn from(e: FetchError) -> Self {
        let kind = match e {
            FetchError::InvalidQuery(_) => ErrorKind::Config,
            _ => ErrorKind::Network,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::Inference(inner) => inner.into(),
            ExplainError::TooManyPlayers { .. } | ExplainError::InvalidSamples => {
                Self::config(e.to_string())
            }
            ExplainError::Game(_) => Self::new(ErrorKind::Model, e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }
}

impl From<AspectError> for CliError {
    fn from(e: AspectError) -> Self {
        match e {
            AspectError::Inference(inner) => inner.into(),
            AspectError::Misaligned(inner) => inner.into(),
            AspectError::Classify { ref source, .. } => {
                let kind = CliError::from(source.clone()).kind;
                Self::new(kind, e.to_string())
            }
            AspectError::InvalidQuantile(_) => Self::config(e.to_string()),
            other => Self::data(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        let kind = match e {
            ReportError::Write { .. } | ReportError::Plot { .. } => ErrorKind::Io,
            _ => ErrorKind::Data,
        };
        Self::new(kind, e.to_string())
    }
}
