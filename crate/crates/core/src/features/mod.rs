//! Sample descriptors: co-occurrence matrices, their statistics, spectral
//! profiles, the recipe that combines them into vectors, and feature
//! selection.

mod matrix;
mod recipe;
mod select;
mod spectrum;
mod vector;

pub use matrix::{
    build_glcm, build_glrcm, build_ogcm, haralick_stats, ogcm_interior, CoocMatrix, HaralickStats, MatrixKind,
    OgcmPairs, DEFAULT_GLCM_OFFSETS,
};
pub use recipe::{
    ChannelMode, FeatureRecipe, FftSpec, GlcmSpec, GlrcmSpec, LineSpec, OgcmSpec, SelectionSpec, RECIPE_VERSION,
};
pub use select::{select_features, FeatureSelection};
pub use spectrum::{fft_power_bands, haar_detail_energies, inscribed_patch_side, line_spectrum, FreqBand};
pub use vector::{assemble_feature_vector, FeatureVector, PreparedImage};
