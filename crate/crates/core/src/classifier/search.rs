//! `(C, gamma)` selection by cross-validated trials: the exhaustive grid and
//! the randomized draw that usually reaches the same quality in a small
//! fraction of the trials.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cv_accuracy_with_gram, stratified_folds, CvConfig};
use super::smo::{Gram, SolverParams};
use super::svm::Dataset;
use crate::error::{Error, Result};

/// Log2 ranges for C and gamma plus the per-axis step count of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub log2_c: (f64, f64),
    pub log2_gamma: (f64, f64),
    pub grid_steps: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            log2_c: (-5.0, 15.0),
            log2_gamma: (-15.0, 3.0),
            grid_steps: 20,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.log2_c) || !ok(self.log2_gamma) {
            return Err(Error::Parameter("search ranges must satisfy lower < upper".into()));
        }
        Ok(())
    }

    /// Evenly spaced grid values of one axis, both ends included.
    pub fn axis(range: (f64, f64), steps: usize) -> Vec<f64> {
        match steps {
            0 => Vec::new(),
            1 => vec![range.0],
            _ => (0..steps)
                .map(|i| range.0 + (range.1 - range.0) * i as f64 / (steps - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Grid,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Budget exhausted (for the grid: every point evaluated).
    Budget,
    TargetReached,
    CallerStop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub log2_c: f64,
    pub log2_gamma: f64,
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
    /// Seconds spent on this trial.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub method: SearchMethod,
    pub trials: Vec<Trial>,
    /// Index into `trials` of the best accuracy (earliest on ties).
    pub best: Option<usize>,
    pub total_time: f64,
    pub stop_reason: StopReason,
}

impl SearchReport {
    pub fn best_trial(&self) -> Option<&Trial> {
        self.best.map(|i| &self.trials[i])
    }

    pub fn best_accuracy(&self) -> f64 {
        self.best_trial().map_or(0.0, |t| t.cv_accuracy)
    }

    /// Copy with every wall-clock field zeroed, for run-to-run comparison.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.total_time = 0.0;
        r.trials.iter_mut().for_each(|t| t.wall_time = 0.0);
        r
    }

    /// One JSON object per trial, newline terminated.
    pub fn write_json_lines(&self, mut out: impl Write) -> Result<()> {
        for t in &self.trials {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn best_index(trials: &[Trial]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, t) in trials.iter().enumerate() {
        if best.is_none_or(|b| t.cv_accuracy > trials[b].cv_accuracy) {
            best = Some(i);
        }
    }
    best
}

/// Receives trials as they complete and can ask the search to stop between
/// trials.
pub trait SearchMonitor: Sync {
    fn trial_done(&self, _trial: &Trial) {}

    fn should_stop(&self) -> bool {
        false
    }
}

impl SearchMonitor for () {}

struct Evaluator<'a> {
    data: &'a Dataset,
    assignment: Vec<usize>,
    folds: usize,
    solver: SolverParams,
}

impl<'a> Evaluator<'a> {
    fn new(data: &'a Dataset, cv: &CvConfig) -> Result<Self> {
        Ok(Self {
            data,
            assignment: stratified_folds(data.tags(), cv.folds, cv.seed)?,
            folds: cv.folds,
            solver: SolverParams::default(),
        })
    }

    fn run(&self, index: usize, log2_c: f64, log2_gamma: f64) -> Trial {
        let start = Instant::now();
        let (c, gamma) = (log2_c.exp2(), log2_gamma.exp2());
        let gram = Gram::rbf(self.data.vectors(), gamma);
        let cv_accuracy = cv_accuracy_with_gram(
            &gram,
            self.data.tags(),
            self.data.classes().len(),
            &self.assignment,
            self.folds,
            c,
            &self.solver,
        );
        Trial {
            index,
            log2_c,
            log2_gamma,
            c,
            gamma,
            cv_accuracy,
            wall_time: start.elapsed().as_secs_f64(),
        }
    }
}

/// Evaluates every point of the `grid_steps x grid_steps` log2 grid, C-major,
/// so the earliest-best rule prefers smaller C, then smaller gamma.
pub fn grid_search(
    data: &Dataset,
    space: &SearchSpace,
    cv: &CvConfig,
    monitor: &dyn SearchMonitor,
) -> Result<SearchReport> {
    space.validate()?;
    let eval = Evaluator::new(data, cv)?;
    let start = Instant::now();
    let cs = SearchSpace::axis(space.log2_c, space.grid_steps);
    let gammas = SearchSpace::axis(space.log2_gamma, space.grid_steps);
    let points: Vec<(f64, f64)> = cs.iter().flat_map(|&c| gammas.iter().map(move |&g| (c, g))).collect();

    let chunk = rayon::current_num_threads().max(1);
    let mut trials = Vec::with_capacity(points.len());
    let mut stop_reason = StopReason::Budget;
    for (chunk_no, block) in points.chunks(chunk).enumerate() {
        if monitor.should_stop() {
            stop_reason = StopReason::CallerStop;
            break;
        }
        let done: Vec<Trial> = block
            .par_iter()
            .enumerate()
            .map(|(k, &(c, g))| eval.run(chunk_no * chunk + k, c, g))
            .collect();
        for t in done {
            monitor.trial_done(&t);
            trials.push(t);
        }
    }
    Ok(SearchReport {
        method: SearchMethod::Grid,
        best: best_index(&trials),
        trials,
        total_time: start.elapsed().as_secs_f64(),
        stop_reason,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSearch {
    pub budget: usize,
    /// Seed of the parameter draws.
    pub seed: u64,
    /// Stop as soon as a trial reaches this accuracy.
    pub target_accuracy: Option<f64>,
}

impl RandomSearch {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            target_accuracy: None,
        }
    }

    /// The full `(log2 C, log2 gamma)` sequence; a pure function of the seed.
    pub fn draws(&self, space: &SearchSpace) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.budget)
            .map(|_| {
                let c = rng.gen_range(space.log2_c.0..space.log2_c.1);
                let g = rng.gen_range(space.log2_gamma.0..space.log2_gamma.1);
                (c, g)
            })
            .collect()
    }
}

/// Draws `(C, gamma)` log-uniformly from the space, one trial at a time, and
/// stops at the budget, at the target accuracy, or when the monitor asks.
pub fn random_search(
    data: &Dataset,
    space: &SearchSpace,
    search: &RandomSearch,
    cv: &CvConfig,
    monitor: &dyn SearchMonitor,
) -> Result<SearchReport> {
    space.validate()?;
    if search.budget == 0 {
        return Err(Error::Parameter("search budget must be at least 1".into()));
    }
    let eval = Evaluator::new(data, cv)?;
    let start = Instant::now();
    let mut trials = Vec::with_capacity(search.budget);
    let mut stop_reason = StopReason::Budget;
    for (index, (c, g)) in search.draws(space).into_iter().enumerate() {
        let t = eval.run(index, c, g);
        monitor.trial_done(&t);
        let hit = search.target_accuracy.is_some_and(|target| t.cv_accuracy >= target);
        trials.push(t);
        if hit {
            stop_reason = StopReason::TargetReached;
            break;
        }
        if trials.len() < search.budget && monitor.should_stop() {
            stop_reason = StopReason::CallerStop;
            break;
        }
    }
    Ok(SearchReport {
        method: SearchMethod::Random,
        best: best_index(&trials),
        trials,
        total_time: start.elapsed().as_secs_f64(),
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::synth;

    fn small_space() -> SearchSpace {
        SearchSpace {
            log2_c: (-2.0, 6.0),
            log2_gamma: (-6.0, 1.0),
            grid_steps: 4,
        }
    }

    #[test]
    fn default_grid_has_four_hundred_points() {
        let s = SearchSpace::default();
        assert_eq!(
            SearchSpace::axis(s.log2_c, s.grid_steps).len() * SearchSpace::axis(s.log2_gamma, s.grid_steps).len(),
            400
        );
        let axis = SearchSpace::axis((-5.0, 15.0), 20);
        assert_eq!(axis[0], -5.0);
        assert_eq!(axis[19], 15.0);
    }

    #[test]
    fn grid_counts_and_best_is_max() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (3.0, 0.0)], 12, 1.2, 5);
        let r = grid_search(&d, &small_space(), &CvConfig::default(), &()).unwrap();
        assert_eq!(r.trials.len(), 16);
        assert_eq!(r.stop_reason, StopReason::Budget);
        let max = r.trials.iter().map(|t| t.cv_accuracy).fold(0.0, f64::max);
        assert_eq!(r.best_accuracy(), max);
        let first_max = r.trials.iter().position(|t| t.cv_accuracy == max).unwrap();
        assert_eq!(r.best, Some(first_max));
    }

    #[test]
    fn ties_prefer_smallest_parameters() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (50.0, 0.0)], 6, 0.1, 2);
        let space = SearchSpace {
            log2_c: (0.0, 4.0),
            log2_gamma: (-8.0, -4.0),
            grid_steps: 3,
        };
        let r = grid_search(&d, &space, &CvConfig { folds: 3, seed: 0 }, &()).unwrap();
        assert!(r.trials.iter().all(|t| t.cv_accuracy == 1.0));
        let best = r.best_trial().unwrap();
        assert_eq!((best.log2_c, best.log2_gamma), (0.0, -8.0));
    }

    #[test]
    fn random_search_is_seeded_and_bounded() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (2.0, 0.0)], 10, 1.0, 3);
        let rs = RandomSearch::new(6, 42);
        let a = random_search(&d, &small_space(), &rs, &CvConfig::default(), &()).unwrap();
        let b = random_search(&d, &small_space(), &rs, &CvConfig::default(), &()).unwrap();
        assert_eq!(a.without_timings(), b.without_timings());
        assert_eq!(a.trials.len(), 6);
        assert_eq!(a.stop_reason, StopReason::Budget);
        let draws = rs.draws(&small_space());
        for (t, (c, g)) in a.trials.iter().zip(draws) {
            assert_eq!((t.log2_c, t.log2_gamma), (c, g));
            assert!((-2.0..6.0).contains(&c) && (-6.0..1.0).contains(&g));
        }
        let other = RandomSearch::new(6, 43).draws(&small_space());
        assert_ne!(other, rs.draws(&small_space()));
    }

    #[test]
    fn target_stops_early() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (20.0, 0.0)], 10, 0.5, 3);
        let rs = RandomSearch {
            target_accuracy: Some(0.95),
            ..RandomSearch::new(20, 1)
        };
        let r = random_search(&d, &small_space(), &rs, &CvConfig::default(), &()).unwrap();
        assert_eq!(r.stop_reason, StopReason::TargetReached);
        assert!(r.trials.last().unwrap().cv_accuracy >= 0.95);
        assert!(r.trials[..r.trials.len() - 1].iter().all(|t| t.cv_accuracy < 0.95));
    }

    struct StopAfter(usize, AtomicUsize);

    impl SearchMonitor for StopAfter {
        fn trial_done(&self, _: &Trial) {
            self.1.fetch_add(1, Ordering::SeqCst);
        }
        fn should_stop(&self) -> bool {
            self.1.load(Ordering::SeqCst) >= self.0
        }
    }

    #[test]
    fn caller_can_stop() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (2.0, 0.0)], 8, 1.0, 3);
        let m = StopAfter(3, AtomicUsize::new(0));
        let r = random_search(&d, &small_space(), &RandomSearch::new(10, 0), &CvConfig::default(), &m).unwrap();
        assert_eq!(r.trials.len(), 3);
        assert_eq!(r.stop_reason, StopReason::CallerStop);
    }

    #[test]
    fn invalid_inputs() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (2.0, 0.0)], 4, 1.0, 3);
        let empty = SearchSpace {
            log2_c: (1.0, 1.0),
            ..SearchSpace::default()
        };
        assert!(random_search(&d, &empty, &RandomSearch::new(3, 0), &CvConfig::default(), &()).is_err());
        assert!(random_search(&d, &small_space(), &RandomSearch::new(0, 0), &CvConfig::default(), &()).is_err());
        assert!(grid_search(&d, &small_space(), &CvConfig { folds: 99, seed: 0 }, &()).is_err());
    }

    #[test]
    fn json_lines_one_per_trial() {
        let d = synth::gaussian_blobs(&[(0.0, 0.0), (2.0, 0.0)], 6, 1.0, 3);
        let r = random_search(
            &d,
            &small_space(),
            &RandomSearch::new(3, 9),
            &CvConfig { folds: 3, seed: 0 },
            &(),
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_json_lines(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let t: Trial = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(t, r.trials[1]);
    }
}
