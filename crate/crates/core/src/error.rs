use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("resolution error: block {block} needs at least {required} points per axis, grid has {have}")]
    Resolution {
        block: usize,
        required: usize,
        have: usize,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search failed: {0}")]
    Search(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("dyadic block {0} is zero, ratio undefined")]
    ZeroBlock(usize),
    #[error("fit failed: {0}")]
    FitFailure(String),
    #[error("j0 = {j0} is inadmissible: p_n > 1 fails first at n = {n}")]
    InvalidJ0 { j0: u64, n: usize },
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
