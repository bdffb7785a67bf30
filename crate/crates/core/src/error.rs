use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("image has zero size")]
    EmptyImage,
    #[error("gray level count {0} outside 2..=256")]
    LevelCount(usize),
    #[error("plane dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("sample disc at ({x}, {y}) with radius {radius} leaves the {width}x{height} image")]
    OutOfBounds {
        x: i32,
        y: i32,
        radius: u32,
        width: u32,
        height: u32,
    },
    #[error("pixel set is empty")]
    EmptyPixelSet,
    #[error("co-occurrence matrix has zero total")]
    EmptyMatrix,
    #[error("invalid recipe: {0}")]
    Recipe(String),
    #[error("invalid training data: {0}")]
    TrainingData(String),
    #[error("vector has {found} features, model expects {expected}")]
    FeatureDimension { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unknown class tag {0:?}")]
    UnknownClass(String),
    #[error("version mismatch: {what} is version {found}, expected {expected}")]
    Version {
        what: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("failed to read {path}: {source}")]
    ImageRead { path: PathBuf, source: image::ImageError },
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
