use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gridsense::Error),
    #[error("a project needs at least two classes")]
    TooFewClasses,
    #[error("class {0:?} is declared twice")]
    DuplicateClass(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("no image registered as {0:?}")]
    UnknownImage(String),
    #[error("no sample with id {0}")]
    UnknownSample(u64),
    #[error("sample ({x}, {y}) tagged {class:?} already exists on image {image:?}")]
    DuplicateSample {
        image: String,
        x: i32,
        y: i32,
        class: String,
    },
    #[error("project has no trained model")]
    NoModel,
    #[error("a training job is already running")]
    Busy,
    #[error("unsupported project schema version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
