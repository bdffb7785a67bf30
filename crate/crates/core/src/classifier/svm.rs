use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::smo::{rbf, solve, Gram, SolverParams};
use crate::error::{Error, Result};

/// Labelled vectors; `tags[i]` indexes into `classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    vectors: Vec<Vec<f64>>,
    tags: Vec<usize>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new(vectors: Vec<Vec<f64>>, tags: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        if vectors.len() != tags.len() {
            return Err(Error::TrainingData(format!(
                "{} vectors but {} tags",
                vectors.len(),
                tags.len()
            )));
        }
        if vectors.is_empty() {
            return Err(Error::TrainingData("no samples".into()));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::TrainingData("vectors have no features".into()));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::FeatureDimension {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::TrainingData("non-finite feature value".into()));
            }
        }
        if let Some(&bad) = tags.iter().find(|&&t| t >= classes.len()) {
            return Err(Error::TrainingData(format!("tag index {bad} has no class")));
        }
        let distinct = {
            let mut seen = vec![false; classes.len()];
            tags.iter().for_each(|&t| seen[t] = true);
            seen.iter().filter(|&&s| s).count()
        };
        if distinct < 2 {
            return Err(Error::TrainingData("at least two classes are required".into()));
        }
        Ok(Self { vectors, tags, classes })
    }

    /// Builds a dataset with classes named by their index.
    pub fn from_indices(vectors: Vec<Vec<f64>>, tags: Vec<usize>) -> Result<Self> {
        let n = tags.iter().max().map_or(0, |&m| m + 1);
        Self::new(vectors, tags, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        self.tags.iter().for_each(|&t| counts[t] += 1);
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub solver: SolverParams,
    /// Seed for the internal folds used to fit probability sigmoids.
    pub calibration_seed: u64,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        Self {
            c,
            gamma,
            solver: SolverParams::default(),
            calibration_seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) || !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Parameter(format!(
                "C and gamma must be positive, got C={} gamma={}",
                self.c, self.gamma
            )));
        }
        Ok(())
    }
}

/// One-vs-one decision function over positions of a shared Gram matrix.
#[derive(Debug, Clone)]
pub(crate) struct IndexedPair {
    pub first: usize,
    pub second: usize,
    /// (sample index, α·y)
    pub terms: Vec<(usize, f64)>,
    pub rho: f64,
}

impl IndexedPair {
    pub fn decision(&self, gram: &Gram, target: usize) -> f64 {
        self.terms
            .iter()
            .map(|&(i, coef)| coef * gram.get(i, target))
            .sum::<f64>()
            - self.rho
    }
}

/// Trains a binary machine between `first` (+1) and `second` (−1) on the
/// given sample positions. Returns `None` when one side is empty.
pub(crate) fn train_pair(
    gram: &Gram,
    tags: &[usize],
    members: &[usize],
    first: usize,
    second: usize,
    c: f64,
    solver: &SolverParams,
) -> IndexedPair {
    let sub: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&i| tags[i] == first || tags[i] == second)
        .collect();
    let y: Vec<f64> = sub.iter().map(|&i| if tags[i] == first { 1.0 } else { -1.0 }).collect();
    let has_pos = y.iter().any(|&v| v > 0.0);
    let has_neg = y.iter().any(|&v| v < 0.0);
    if !(has_pos && has_neg) {
        // degenerate side: constant decision towards the present class
        return IndexedPair {
            first,
            second,
            terms: Vec::new(),
            rho: if has_pos { -1.0 } else { 1.0 },
        };
    }
    let sol = solve(gram, &sub, &y, c, solver);
    let terms = sub
        .iter()
        .zip(&sol.alpha)
        .zip(&y)
        .filter(|((_, &a), _)| a > 0.0)
        .map(|((&i, &a), &yy)| (i, a * yy))
        .collect();
    IndexedPair {
        first,
        second,
        terms,
        rho: sol.rho,
    }
}

pub(crate) fn train_all_pairs(
    gram: &Gram,
    tags: &[usize],
    members: &[usize],
    n_classes: usize,
    c: f64,
    solver: &SolverParams,
) -> Vec<IndexedPair> {
    let mut pairs = Vec::with_capacity(n_classes * (n_classes.saturating_sub(1)) / 2);
    for a in 0..n_classes {
        for b in a + 1..n_classes {
            pairs.push(train_pair(gram, tags, members, a, b, c, solver));
        }
    }
    pairs
}

/// Majority vote over pairwise decisions; ties go to the lower class index.
pub(crate) fn vote(n_classes: usize, decisions: impl Iterator<Item = (usize, usize, f64)>) -> usize {
    let mut votes = vec![0usize; n_classes];
    for (a, b, d) in decisions {
        votes[if d > 0.0 { a } else { b }] += 1;
    }
    let mut best = 0;
    for (k, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = k;
        }
    }
    best
}

/// Platt sigmoid `P(first | f) = 1 / (1 + exp(a·f + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

impl Sigmoid {
    pub fn predict(&self, decision: f64) -> f64 {
        let f = decision * self.a + self.b;
        if f >= 0.0 {
            (-f).exp() / (1.0 + (-f).exp())
        } else {
            1.0 / (1.0 + f.exp())
        }
    }

    /// Newton fit with backtracking on the regularized targets of Platt's method.
    pub fn fit(decisions: &[f64], positive: &[bool]) -> Self {
        let prior1 = positive.iter().filter(|&&p| p).count() as f64;
        let prior0 = positive.len() as f64 - prior1;
        let hi = (prior1 + 1.0) / (prior1 + 2.0);
        let lo = 1.0 / (prior0 + 2.0);
        let targets: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();
        let objective = |a: f64, b: f64| -> f64 {
            decisions
                .iter()
                .zip(&targets)
                .map(|(&d, &t)| {
                    let f = d * a + b;
                    if f >= 0.0 {
                        t * f + (1.0 + (-f).exp()).ln()
                    } else {
                        (t - 1.0) * f + (1.0 + f.exp()).ln()
                    }
                })
                .sum()
        };
        let (mut a, mut b) = (0.0, ((prior0 + 1.0) / (prior1 + 1.0)).ln());
        let mut fval = objective(a, b);
        const SIGMA: f64 = 1e-12;
        const EPS: f64 = 1e-5;
        const MIN_STEP: f64 = 1e-10;
        for _ in 0..100 {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
            for (&d, &t) in decisions.iter().zip(&targets) {
                let f = d * a + b;
                let (p, q) = if f >= 0.0 {
                    let e = (-f).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = f.exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                };
                let d2 = p * q;
                h11 += d * d * d2;
                h22 += d2;
                h21 += d * d2;
                let d1 = t - p;
                g1 += d * d1;
                g2 += d1;
            }
            if g1.abs() < EPS && g2.abs() < EPS {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            while step >= MIN_STEP {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = objective(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if step < MIN_STEP {
                break;
            }
        }
        Self { a, b }
    }
}

/// Couples pairwise probabilities `r[i][j] = P(i | i or j)` into one
/// distribution (second method of Wu, Lin and Weng).
pub fn couple_probabilities(r: &[Vec<f64>]) -> Vec<f64> {
    let k = r.len();
    let mut q = vec![vec![0.0; k]; k];
    for t in 0..k {
        for j in 0..k {
            if j != t {
                q[t][t] += r[j][t] * r[j][t];
                q[t][j] = -r[j][t] * r[t][j];
            }
        }
    }
    let mut p = vec![1.0 / k as f64; k];
    let mut qp = vec![0.0; k];
    let eps = 0.005 / k as f64;
    for _ in 0..100.max(k) {
        let mut pqp = 0.0;
        for t in 0..k {
            qp[t] = (0..k).map(|j| q[t][j] * p[j]).sum();
            pqp += p[t] * qp[t];
        }
        let max_error = (0..k).map(|t| (qp[t] - pqp).abs()).fold(0.0, f64::max);
        if max_error < eps {
            break;
        }
        for t in 0..k {
            let diff = (-qp[t] + pqp) / q[t][t];
            p[t] += diff;
            pqp = (pqp + diff * (diff * q[t][t] + 2.0 * qp[t])) / ((1.0 + diff) * (1.0 + diff));
            for j in 0..k {
                qp[j] = (qp[j] + diff * q[t][j]) / (1.0 + diff);
                p[j] /= 1.0 + diff;
            }
        }
    }
    let sum: f64 = p.iter().sum();
    p.iter().map(|v| v / sum).collect()
}

const MIN_PROB: f64 = 1e-7;

/// Held-out decision values for one pair, by internal stratification-free
/// `k`-fold CV as in Platt's recipe.
fn pair_cv_decisions(
    gram: &Gram,
    tags: &[usize],
    first: usize,
    second: usize,
    params: &SvmParams,
) -> (Vec<f64>, Vec<bool>) {
    let mut members: Vec<usize> = (0..tags.len())
        .filter(|&i| tags[i] == first || tags[i] == second)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.calibration_seed ^ ((first as u64) << 32 | second as u64));
    members.shuffle(&mut rng);
    let l = members.len();
    let folds = 5.min(l);
    let mut decisions = vec![0.0; l];
    for f in 0..folds {
        let (start, end) = (f * l / folds, (f + 1) * l / folds);
        let train: Vec<usize> = members[..start].iter().chain(&members[end..]).copied().collect();
        let pair = train_pair(gram, tags, &train, first, second, params.c, &params.solver);
        let has_pos = train.iter().any(|&i| tags[i] == first);
        let has_neg = train.iter().any(|&i| tags[i] == second);
        for (slot, &i) in decisions[start..end].iter_mut().zip(&members[start..end]) {
            *slot = match (has_pos, has_neg) {
                (true, true) => pair.decision(gram, i),
                (true, false) => 1.0,
                (false, true) => -1.0,
                (false, false) => 0.0,
            };
        }
    }
    let positive = members.iter().map(|&i| tags[i] == first).collect();
    (decisions, positive)
}

/// Decision function between classes `first` and `second` (positive means
/// `first`), expressed over the model's support vector table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseFunction {
    pub first: usize,
    pub second: usize,
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub rho: f64,
    pub sigmoid: Sigmoid,
}

/// Trained one-vs-one RBF SVM with calibrated probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub c: f64,
    pub gamma: f64,
    pub classes: Vec<String>,
    pub support_vectors: Vec<Vec<f64>>,
    pub pairs: Vec<PairwiseFunction>,
}

/// Class decision and full distribution for one vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class_index: usize,
    pub class: String,
    pub probabilities: Vec<f64>,
}

impl Prediction {
    pub fn probability(&self) -> f64 {
        self.probabilities[self.class_index]
    }
}

/// First index of the maximum; NaNs never win.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn train_svm(data: &Dataset, params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    let gram = Gram::rbf(data.vectors(), params.gamma);
    let k = data.classes().len();
    let all: Vec<usize> = (0..data.len()).collect();
    let indexed = train_all_pairs(&gram, data.tags(), &all, k, params.c, &params.solver);

    let mut sv_slot = vec![usize::MAX; data.len()];
    let mut support_vectors = Vec::new();
    let mut pairs = Vec::with_capacity(indexed.len());
    for pair in indexed {
        let (decisions, positive) = pair_cv_decisions(&gram, data.tags(), pair.first, pair.second, params);
        let sigmoid = Sigmoid::fit(&decisions, &positive);
        let mut support = Vec::with_capacity(pair.terms.len());
        let mut coefficients = Vec::with_capacity(pair.terms.len());
        for (i, coef) in pair.terms {
            if sv_slot[i] == usize::MAX {
                sv_slot[i] = support_vectors.len();
                support_vectors.push(data.vectors()[i].clone());
            }
            support.push(sv_slot[i]);
            coefficients.push(coef);
        }
        pairs.push(PairwiseFunction {
            first: pair.first,
            second: pair.second,
            support,
            coefficients,
            rho: pair.rho,
            sigmoid,
        });
    }
    Ok(SvmModel {
        c: params.c,
        gamma: params.gamma,
        classes: data.classes().to_vec(),
        support_vectors,
        pairs,
    })
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    pub fn class_index(&self, tag: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == tag)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if !self.support_vectors.is_empty() && x.len() != self.dim() {
            return Err(Error::FeatureDimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Decision values in pair order.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let kernel: Vec<f64> = self.support_vectors.iter().map(|sv| rbf(sv, x, self.gamma)).collect();
        Ok(self
            .pairs
            .iter()
            .map(|p| {
                p.support
                    .iter()
                    .zip(&p.coefficients)
                    .map(|(&s, &c)| c * kernel[s])
                    .sum::<f64>()
                    - p.rho
            })
            .collect())
    }

    /// Majority-vote class index.
    pub fn predict_vote(&self, x: &[f64]) -> Result<usize> {
        let d = self.decision_values(x)?;
        Ok(vote(
            self.classes.len(),
            self.pairs.iter().zip(d).map(|(p, v)| (p.first, p.second, v)),
        ))
    }

    /// Class probabilities; the returned class is their argmax (ties to the
    /// earlier class).
    pub fn predict_proba(&self, x: &[f64]) -> Result<Prediction> {
        let d = self.decision_values(x)?;
        let k = self.classes.len();
        let mut r = vec![vec![0.0; k]; k];
        for (p, v) in self.pairs.iter().zip(d) {
            let prob = p.sigmoid.predict(v).clamp(MIN_PROB, 1.0 - MIN_PROB);
            r[p.first][p.second] = prob;
            r[p.second][p.first] = 1.0 - prob;
        }
        let probabilities = couple_probabilities(&r);
        let class_index = argmax(&probabilities);
        Ok(Prediction {
            class_index,
            class: self.classes[class_index].clone(),
            probabilities,
        })
    }
}
