use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in an input a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// 1-based line of a text input.
    Line(usize),
    /// Track index and absolute tick of a MIDI event.
    Track { track: usize, tick: u64 },
    /// Byte offset into a binary input.
    Offset(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(line) => write!(f, "line {line}"),
            Location::Track { track, tick } => write!(f, "track {track}, tick {tick}"),
            Location::Offset(offset) => write!(f, "byte {offset}"),
        }
    }
}

fn located(location: &Option<Location>) -> String {
    match location {
        Some(l) => format!(" at {l}"),
        None => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error{}: {message}", located(.location))]
    Format {
        location: Option<Location>,
        message: String,
    },

    #[error("range error{}: {message}", located(.location))]
    Range {
        location: Option<Location>,
        message: String,
    },

    #[error("validation error{}: {message}", located(.location))]
    Validation {
        location: Option<Location>,
        message: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("training diverged at epoch {epoch}, batch {batch}{}", .context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Divergence {
        epoch: usize,
        batch: usize,
        context: Option<String>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(location: Option<Location>, message: impl Into<String>) -> Self {
        Error::Format {
            location,
            message: message.into(),
        }
    }

    pub(crate) fn range(location: Option<Location>, message: impl Into<String>) -> Self {
        Error::Range {
            location,
            message: message.into(),
        }
    }

    pub(crate) fn validation(location: Option<Location>, message: impl Into<String>) -> Self {
        Error::Validation {
            location,
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }

    /// Attach experiment context (e.g. labeling function and seed) to a divergence.
    pub fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::Divergence { epoch, batch, .. } => Error::Divergence {
                epoch,
                batch,
                context: Some(ctx.into()),
            },
            other => other,
        }
    }
}
