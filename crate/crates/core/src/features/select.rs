use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Subset of vector positions kept for classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    /// Strictly increasing positions into the full vector.
    pub kept_indices: Vec<usize>,
    /// Relevance of every original position.
    pub scores: Vec<f64>,
}

impl FeatureSelection {
    /// Keeps every position.
    pub fn identity(len: usize) -> Self {
        Self {
            kept_indices: (0..len).collect(),
            scores: vec![0.0; len],
        }
    }

    pub fn input_len(&self) -> usize {
        self.scores.len()
    }

    pub fn output_len(&self) -> usize {
        self.kept_indices.len()
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.kept_indices.iter().map(|&i| values[i]).collect()
    }
}

struct Column {
    centered: Vec<f64>,
    norm: f64,
}

impl Column {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { centered, norm }
    }

    /// Constant columns have no defined correlation; they count as 0.
    fn correlation(&self, other: &Column) -> f64 {
        if self.norm <= f64::EPSILON || other.norm <= f64::EPSILON {
            return 0.0;
        }
        let dot: f64 = self.centered.iter().zip(&other.centered).map(|(a, b)| a * b).sum();
        (dot / (self.norm * other.norm)).clamp(-1.0, 1.0)
    }

    fn is_constant(&self) -> bool {
        self.norm <= 1e-12 * (1.0 + self.centered.len() as f64)
    }
}

/// Correlation-based relevance/redundancy filter.
///
/// Relevance is the largest absolute correlation between a feature and any
/// one-vs-rest class indicator. Features are visited by decreasing relevance
/// (ties to the lower index) and kept while their absolute correlation with
/// every already-kept feature stays within `redundancy_max`, up to
/// `keep_max`. Constant features are never kept.
pub fn select_features(
    vectors: &[Vec<f64>],
    tags: &[usize],
    keep_max: usize,
    redundancy_max: f64,
) -> Result<FeatureSelection> {
    if vectors.len() != tags.len() || vectors.is_empty() {
        return Err(Error::TrainingData(
            "vectors and tags must be non-empty and aligned".into(),
        ));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::TrainingData("vectors have differing lengths".into()));
    }
    let n_classes = tags.iter().max().map_or(0, |&m| m + 1);
    let mut per_class = vec![0usize; n_classes];
    tags.iter().for_each(|&t| per_class[t] += 1);
    let present: Vec<usize> = (0..n_classes).filter(|&c| per_class[c] > 0).collect();
    if present.len() < 2 {
        return Err(Error::TrainingData(
            "feature selection needs at least two classes".into(),
        ));
    }
    if present.iter().any(|&c| per_class[c] < 2) {
        return Err(Error::TrainingData("every class needs at least two samples".into()));
    }

    let indicators: Vec<Column> = present
        .iter()
        .map(|&c| Column::new(tags.iter().map(|&t| if t == c { 1.0 } else { 0.0 })))
        .collect();
    let columns: Vec<Column> = (0..dim).map(|j| Column::new(vectors.iter().map(|v| v[j]))).collect();
    let scores: Vec<f64> = columns
        .iter()
        .map(|col| {
            indicators
                .iter()
                .map(|ind| col.correlation(ind).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    let mut order: Vec<usize> = (0..dim).filter(|&j| !columns[j].is_constant()).collect();
    if order.is_empty() {
        return Err(Error::TrainingData("all features are constant".into()));
    }
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut kept: Vec<usize> = Vec::new();
    for j in order {
        if kept.len() >= keep_max {
            break;
        }
        let redundant = kept
            .iter()
            .any(|&k| columns[j].correlation(&columns[k]).abs() > redundancy_max);
        if !redundant {
            kept.push(j);
        }
    }
    kept.sort_unstable();
    Ok(FeatureSelection {
        kept_indices: kept,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Vec<Vec<f64>>, Vec<usize>) {
        let tags = vec![0, 0, 0, 1, 1, 1, 2, 2];
        let vectors = tags
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let noise = ((i * 37) % 11) as f64 / 11.0;
                vec![
                    5.0,                            // constant
                    noise,                          // weak
                    if t == 1 { 1.0 } else { 0.0 }, // class indicator
                    if t == 1 { 3.0 } else { 1.0 }, // same up to scale
                    t as f64 + 0.3 * noise,         // informative
                ]
            })
            .collect();
        (vectors, tags)
    }

    #[test]
    fn indicator_ranks_first_and_duplicates_collapse() {
        let (v, t) = data();
        let s = select_features(&v, &t, 10, 0.95).unwrap();
        assert!((s.scores[2] - 1.0).abs() < 1e-12);
        assert_eq!(s.scores[0], 0.0);
        assert!(s.kept_indices.contains(&2));
        assert!(!s.kept_indices.contains(&3));
        assert!(!s.kept_indices.contains(&0));
        assert!(s.kept_indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn keep_max_limits_output() {
        let (v, t) = data();
        let s = select_features(&v, &t, 1, 1.0).unwrap();
        assert_eq!(s.kept_indices, vec![2]);
        assert_eq!(s.apply(&v[4]), vec![1.0]);
    }

    #[test]
    fn degenerate_inputs() {
        let (v, _) = data();
        assert!(select_features(&v, &[0; 8], 4, 0.9).is_err());
        let constant = vec![vec![1.0, 2.0]; 4];
        assert!(select_features(&constant, &[0, 0, 1, 1], 4, 0.9).is_err());
        assert!(select_features(&v[..3], &[0, 0, 1], 4, 0.9).is_err());
    }
}
