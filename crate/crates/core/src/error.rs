use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gaze direction outside the forward hemisphere (z = {z})")]
    OutOfHemisphere { z: f64 },

    #[error("gaze ray is parallel to the screen plane; no intersection")]
    NoIntersection,

    #[error("eye lies behind the screen plane (z = {z} mm)")]
    EyeBehindScreen { z: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),

    #[error("normal equations are rank deficient; use a regularization strength > 0")]
    RankDeficient,

    #[error("degenerate scene: {0}")]
    SceneDegenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input too small: layer {layer} ({layer_desc}) collapses spatial dims to {height}x{width}")]
    InputTooSmall {
        layer: usize,
        layer_desc: String,
        height: i64,
        width: i64,
    },

    #[error("parse error in {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, msg: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            msg: msg.to_string(),
        }
    }

    /// Short stable identifier, used by the CLI for machine-parsable errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::OutOfHemisphere { .. } => "out-of-hemisphere",
            Error::NoIntersection => "no-intersection",
            Error::EyeBehindScreen { .. } => "eye-behind-screen",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::InvalidAnchor(_) => "invalid-anchor",
            Error::RankDeficient => "rank-deficient",
            Error::SceneDegenerate(_) => "scene-degenerate",
            Error::Config(_) => "config",
            Error::InputTooSmall { .. } => "input-too-small",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
