use std::fmt;

/// Broad failure class; drives the CLI exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Config => "config",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index set too large: {requested} indices exceeds the cap of {cap}")]
    Sizing { requested: u128, cap: usize },

    #[error("quadrature of order {order} is not exact for polynomial degree {degree}")]
    Precision { order: usize, degree: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unstable time stepping: {0}")]
    Stability(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Sizing { .. } | Error::Parse { .. } => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            Error::Precision { .. }
            | Error::Shape(_)
            | Error::Stability(_)
            | Error::Numerical(_)
            | Error::RankDeficient(_) => ErrorKind::Numerical,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// One line, `key=value` pairs, suitable for log scraping.
    pub fn machine_line(&self) -> String {
        let reason = self.to_string().replace('\n', " ").replace('"', "'");
        format!(
            "error kind={} code={} reason=\"{}\"",
            self.kind(),
            self.exit_code(),
            reason
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
