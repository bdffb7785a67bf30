//! Project files, curation operations, the `gridsense` command line and the
//! HTTP API used by the curation UI.

pub mod cli;
mod error;
pub mod maps;
pub mod project;
pub mod server;
pub mod train;

pub use error::{Error, Result};
pub use project::{ImageRecord, Project, SampleRecord, PROJECT_VERSION};
pub use train::{train_project, TrainRequest, TrialLog};
