use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("degenerate peaks: top and bottom peaks coincide at t = {0}")]
    DegeneratePeaks(f64),

    #[error("mask covers the full cycle; pixel is unusable")]
    AllMasked,

    #[error("no samples are both valid and unmasked")]
    EmptySupport,

    #[error("no grid cell has usable support")]
    Unsolvable,

    #[error("ambiguous normal: {0}")]
    AmbiguousNormal(String),

    #[error("empty evaluation mask")]
    EmptyMask,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("pixel ({x}, {y}): {source}")]
    Pixel {
        x: usize,
        y: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_pixel(self, x: usize, y: usize) -> Self {
        Error::Pixel {
            x,
            y,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
