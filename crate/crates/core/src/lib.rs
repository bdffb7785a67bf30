//! Trainable grid-sampled object detection.
//!
//! Circular samples taken at image grid points are described by
//! co-occurrence matrices (GLCM, orthogonal-gradient OGCM and the
//! gray level/radius GLRCM) plus optional spectral profiles, classified by an
//! RBF-kernel SVM whose `(C, gamma)` pair is found by randomized search, and
//! the resulting per-point class maps feed declarative alert rules.
//!
//! The modules follow the data flow:
//!
//! - [`imagery`]: planes, factorization, grid and disc geometry, masks
//! - [`features`]: matrices, statistics, spectra, vector assembly, selection
//! - [`classifier`]: SMO solver, probabilities, cross-validation, search, bundles
//! - [`mapping`]: grid maps, plausibility filtering, clustering, alert rules
//! - [`synth`]: procedural textures and scenes for demos and tests

pub mod classifier;
pub mod error;
pub mod features;
pub mod imagery;
pub mod mapping;
pub mod synth;

pub use error::{Error, Result};
