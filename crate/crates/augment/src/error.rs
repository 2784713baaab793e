use thiserror::Error;

pub type Result<T, E = AugError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AugError {
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("degenerate {0}")]
    Degenerate(&'static str),
    #[error("missing overlay asset: {0}")]
    MissingAsset(String),
    #[error("no usable source images")]
    NoSources,
    #[error("empty image")]
    EmptyImage,
    #[error(transparent)]
    Core(#[from] copydesc_core::Error),
}
