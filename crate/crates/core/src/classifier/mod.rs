//! RBF-kernel SVM training, calibrated prediction, cross-validation and
//! hyperparameter search, plus the pipeline that packages a trained model
//! with its feature recipe.

mod cv;
mod pipeline;
mod search;
mod smo;
mod svm;

pub use cv::{cross_validate, stratified_folds, CvConfig};
pub use pipeline::{
    extract_training_vectors, train_pipeline, ImageSource, ModelBundle, Scaler, SearchPlan, TrainOptions,
    TrainedPipeline, TrainingSample, TrainingSet, BUNDLE_VERSION,
};
pub use search::{
    grid_search, random_search, RandomSearch, SearchMethod, SearchMonitor, SearchReport, SearchSpace, StopReason, Trial,
};
pub use smo::{rbf, solve, BinarySolution, Gram, SolverParams};
pub use svm::{couple_probabilities, train_svm, Dataset, PairwiseFunction, Prediction, Sigmoid, SvmModel, SvmParams};
