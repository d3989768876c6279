use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed PGM input; `offset` is the byte position of the problem.
    #[error("pgm parse error at byte {offset}: {message}")]
    Pgm { offset: usize, message: String },

    #[error("blank glyph for {ch:?}: no ink pixels")]
    BlankGlyph { ch: char },

    /// Malformed line in one of the TSV formats; `line` is 1-based.
    #[error("{format} line {line}: {message}")]
    Format {
        format: &'static str,
        line: usize,
        message: String,
    },

    #[error("character {0:?} not present in table")]
    MissingChar(char),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(format: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            format,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn pgm(offset: usize, message: impl Into<String>) -> Self {
        Error::Pgm {
            offset,
            message: message.into(),
        }
    }

    /// Attach the path of the file being processed.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
