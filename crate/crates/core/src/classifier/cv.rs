use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::smo::{Gram, SolverParams};
use super::svm::{train_all_pairs, vote, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    /// Seed of the per-class shuffle that assigns samples to folds.
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 5, seed: 0 }
    }
}

/// Fold index per sample: each class is shuffled and dealt round-robin, with
/// the dealing position carried over between classes so fold sizes stay
/// within one of each other.
pub fn stratified_folds(tags: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 || folds > tags.len() {
        return Err(Error::Parameter(format!(
            "fold count {folds} outside 2..={}",
            tags.len()
        )));
    }
    let n_classes = tags.iter().max().map_or(0, |&m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; tags.len()];
    let mut next = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..tags.len()).filter(|&i| tags[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Mean held-out accuracy over the folds described by `assignment`, using a
/// precomputed Gram matrix of the whole dataset.
pub(crate) fn cv_accuracy_with_gram(
    gram: &Gram,
    tags: &[usize],
    n_classes: usize,
    assignment: &[usize],
    folds: usize,
    c: f64,
    solver: &SolverParams,
) -> f64 {
    let per_fold: Vec<Option<f64>> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<usize> = (0..tags.len()).filter(|&i| assignment[i] != fold).collect();
            let test: Vec<usize> = (0..tags.len()).filter(|&i| assignment[i] == fold).collect();
            if test.is_empty() {
                return None;
            }
            let pairs = train_all_pairs(gram, tags, &train, n_classes, c, solver);
            let correct = test
                .iter()
                .filter(|&&t| {
                    let predicted = vote(
                        n_classes,
                        pairs.iter().map(|p| (p.first, p.second, p.decision(gram, t))),
                    );
                    predicted == tags[t]
                })
                .count();
            Some(correct as f64 / test.len() as f64)
        })
        .collect();
    let scored: Vec<f64> = per_fold.into_iter().flatten().collect();
    scored.iter().sum::<f64>() / scored.len() as f64
}

/// Stratified k-fold cross-validation accuracy of an RBF SVM.
pub fn cross_validate(data: &Dataset, cv: &CvConfig, c: f64, gamma: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 || gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Parameter("C and gamma must be positive".into()));
    }
    let assignment = stratified_folds(data.tags(), cv.folds, cv.seed)?;
    let gram = Gram::rbf(data.vectors(), gamma);
    Ok(cv_accuracy_with_gram(
        &gram,
        data.tags(),
        data.classes().len(),
        &assignment,
        cv.folds,
        c,
        &SolverParams::default(),
    ))
}
