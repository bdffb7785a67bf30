use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::CvConfig;
use super::search::{grid_search, random_search, RandomSearch, SearchMonitor, SearchReport, SearchSpace};
use super::svm::{train_svm, Dataset, Prediction, SvmModel, SvmParams};
use crate::error::{Error, Result};
use crate::features::{
    assemble_feature_vector, select_features, FeatureRecipe, FeatureSelection, FeatureVector, PreparedImage,
};
use crate::imagery::Point;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub image: String,
    pub center: Point,
    pub tag: String,
}

/// Tagged sample positions over a set of images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub classes: Vec<String>,
    pub samples: Vec<TrainingSample>,
}

impl TrainingSet {
    pub fn new(classes: Vec<String>) -> Self {
        Self {
            classes,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, image: impl Into<String>, center: Point, tag: impl Into<String>) {
        self.samples.push(TrainingSample {
            image: image.into(),
            center,
            tag: tag.into(),
        });
    }

    /// Class index of every sample, after checking the set is trainable.
    pub fn validated_tags(&self) -> Result<Vec<usize>> {
        if self.classes.len() < 2 {
            return Err(Error::TrainingData("at least two classes are required".into()));
        }
        let index: HashMap<&str, usize> = self.classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        if index.len() != self.classes.len() {
            return Err(Error::TrainingData("class names must be distinct".into()));
        }
        let tags = self
            .samples
            .iter()
            .map(|s| {
                index
                    .get(s.tag.as_str())
                    .copied()
                    .ok_or_else(|| Error::UnknownClass(s.tag.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut counts = vec![0usize; self.classes.len()];
        tags.iter().for_each(|&t| counts[t] += 1);
        if let Some(i) = counts.iter().position(|&c| c < 2) {
            return Err(Error::TrainingData(format!(
                "class {:?} has {} samples, at least 2 are required",
                self.classes[i], counts[i]
            )));
        }
        Ok(tags)
    }
}

/// Source of the images referenced by a [`TrainingSet`].
pub trait ImageSource: Sync {
    fn load(&self, id: &str) -> Result<RgbImage>;
}

impl ImageSource for HashMap<String, RgbImage> {
    fn load(&self, id: &str) -> Result<RgbImage> {
        self.get(id).cloned().ok_or_else(|| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no image {id:?}"),
            ))
        })
    }
}

impl ImageSource for BTreeMap<String, RgbImage> {
    fn load(&self, id: &str) -> Result<RgbImage> {
        self.get(id).cloned().ok_or_else(|| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no image {id:?}"),
            ))
        })
    }
}

/// Per-feature standardization; zero-spread features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(vectors: &[Vec<f64>]) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        let n = vectors.len() as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors {
            mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for v in vectors {
            var.iter_mut()
                .zip(v.iter().zip(&mean))
                .for_each(|(s, (x, m))| *s += (x - m) * (x - m));
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Everything needed to turn a sample into a prediction at mapping time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: u32,
    pub recipe: FeatureRecipe,
    pub selection: FeatureSelection,
    pub scaler: Scaler,
    pub svm: SvmModel,
}

impl ModelBundle {
    pub fn classes(&self) -> &[String] {
        &self.svm.classes
    }

    /// Checks the recipe → scaler → selection → SVM dimension chain.
    pub fn validate(&self) -> Result<()> {
        if self.version != BUNDLE_VERSION {
            return Err(Error::Version {
                what: "model bundle",
                expected: BUNDLE_VERSION,
                found: self.version,
            });
        }
        self.recipe.validate()?;
        let len = self.recipe.vector_len();
        let chain_ok = self.scaler.mean.len() == len
            && self.scaler.std.len() == len
            && self.selection.input_len() == len
            && self.selection.kept_indices.iter().all(|&i| i < len)
            && self.selection.kept_indices.windows(2).all(|w| w[0] < w[1])
            && !self.selection.kept_indices.is_empty()
            && self.svm.dim() == self.selection.output_len();
        if !chain_ok {
            return Err(Error::Recipe("bundle dimensions are inconsistent".into()));
        }
        Ok(())
    }

    pub fn prepare(&self, image: &RgbImage) -> Result<PreparedImage> {
        PreparedImage::new(image, &self.recipe)
    }

    /// Raw feature vector of a sample under the bundle's recipe.
    pub fn extract(&self, image: &PreparedImage, center: Point) -> Result<FeatureVector> {
        assemble_feature_vector(image, center, &self.recipe)
    }

    /// Standardizes and selects a raw vector into classifier input.
    pub fn transform(&self, raw: &FeatureVector) -> Result<Vec<f64>> {
        if raw.len() != self.scaler.mean.len() {
            return Err(Error::FeatureDimension {
                expected: self.scaler.mean.len(),
                found: raw.len(),
            });
        }
        Ok(self.selection.apply(&self.scaler.transform(raw.values())))
    }

    pub fn predict_vector(&self, raw: &FeatureVector) -> Result<Prediction> {
        self.svm.predict_proba(&self.transform(raw)?)
    }

    pub fn predict(&self, image: &PreparedImage, center: Point) -> Result<Prediction> {
        self.predict_vector(&self.extract(image, center)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: Self = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchPlan {
    Grid,
    Random(RandomSearch),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub plan: SearchPlan,
    pub space: SearchSpace,
    pub cv: CvConfig,
}

impl TrainOptions {
    pub fn random(budget: usize, seed: u64) -> Self {
        Self {
            plan: SearchPlan::Random(RandomSearch::new(budget, seed)),
            space: SearchSpace::default(),
            cv: CvConfig { folds: 5, seed },
        }
    }

    pub fn grid(seed: u64) -> Self {
        Self {
            plan: SearchPlan::Grid,
            space: SearchSpace::default(),
            cv: CvConfig { folds: 5, seed },
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedPipeline {
    pub bundle: ModelBundle,
    pub report: SearchReport,
    /// Raw training vectors in sample order.
    pub raw_vectors: Vec<FeatureVector>,
    /// Classifier inputs (standardized and selected) in sample order.
    pub inputs: Vec<Vec<f64>>,
    pub tags: Vec<usize>,
}

/// Raw feature vectors of every sample, in sample order.
pub fn extract_training_vectors(
    set: &TrainingSet,
    images: &dyn ImageSource,
    recipe: &FeatureRecipe,
) -> Result<Vec<FeatureVector>> {
    recipe.validate()?;
    let mut ids: Vec<&str> = set.samples.iter().map(|s| s.image.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let prepared: HashMap<&str, PreparedImage> = ids
        .into_iter()
        .map(|id| Ok((id, PreparedImage::new(&images.load(id)?, recipe)?)))
        .collect::<Result<_>>()?;
    set.samples
        .par_iter()
        .map(|s| assemble_feature_vector(&prepared[s.image.as_str()], s.center, recipe))
        .collect()
}

/// Extract, standardize, select, search `(C, gamma)`, then train the final
/// model on all samples at the best pair.
pub fn train_pipeline(
    set: &TrainingSet,
    images: &dyn ImageSource,
    recipe: &FeatureRecipe,
    options: &TrainOptions,
    monitor: &dyn SearchMonitor,
) -> Result<TrainedPipeline> {
    let tags = set.validated_tags()?;
    let raw_vectors = extract_training_vectors(set, images, recipe)?;
    let raw: Vec<Vec<f64>> = raw_vectors.iter().map(|v| v.0.clone()).collect();
    let scaler = Scaler::fit(&raw);
    let scaled: Vec<Vec<f64>> = raw.iter().map(|v| scaler.transform(v)).collect();
    let selection = select_features(
        &scaled,
        &tags,
        recipe.selection.keep_max,
        recipe.selection.redundancy_max,
    )?;
    let inputs: Vec<Vec<f64>> = scaled.iter().map(|v| selection.apply(v)).collect();
    let data = Dataset::new(inputs.clone(), tags.clone(), set.classes.clone())?;

    let report = match &options.plan {
        SearchPlan::Grid => grid_search(&data, &options.space, &options.cv, monitor)?,
        SearchPlan::Random(rs) => random_search(&data, &options.space, rs, &options.cv, monitor)?,
    };
    let best = report
        .best_trial()
        .ok_or_else(|| Error::TrainingData("search produced no trials".into()))?;
    let svm = train_svm(
        &data,
        &SvmParams {
            calibration_seed: options.cv.seed,
            ..SvmParams::new(best.c, best.gamma)
        },
    )?;
    let bundle = ModelBundle {
        version: BUNDLE_VERSION,
        recipe: recipe.clone(),
        selection,
        scaler,
        svm,
    };
    bundle.validate()?;
    Ok(TrainedPipeline {
        bundle,
        report,
        raw_vectors,
        inputs,
        tags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaler_handles_constant_features() {
        let s = Scaler::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.transform(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn training_set_validation() {
        let mut set = TrainingSet::new(vec!["a".into(), "b".into()]);
        set.push("img", Point::new(1, 1), "a");
        set.push("img", Point::new(2, 1), "a");
        set.push("img", Point::new(3, 1), "b");
        assert!(set.validated_tags().is_err());
        set.push("img", Point::new(4, 1), "b");
        assert_eq!(set.validated_tags().unwrap(), vec![0, 0, 1, 1]);
        set.push("img", Point::new(5, 1), "c");
        assert!(matches!(set.validated_tags(), Err(Error::UnknownClass(_))));
    }
}
