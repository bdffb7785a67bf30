use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use gridsense::classifier::{train_pipeline, SearchMethod, SearchMonitor, TrainOptions, TrainedPipeline, Trial};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::project::{Project, SampleRecord};

fn default_budget() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainRequest {
    pub search: SearchMethod,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

impl TrainRequest {
    pub fn options(&self) -> TrainOptions {
        match self.search {
            SearchMethod::Random => TrainOptions::random(self.budget, self.seed),
            SearchMethod::Grid => TrainOptions::grid(self.seed),
        }
    }
}

/// Search monitor that appends each trial to a JSON-lines log, keeps the
/// trials for status queries and honours a stop flag.
#[derive(Debug, Default)]
pub struct TrialLog {
    file: Option<Mutex<BufWriter<File>>>,
    trials: Arc<Mutex<Vec<Trial>>>,
    stop: Arc<AtomicBool>,
}

impl TrialLog {
    /// Truncates `path` and logs trials to it.
    pub fn to_file(path: &Path) -> Result<Self> {
        Ok(Self {
            file: Some(Mutex::new(BufWriter::new(File::create(path)?))),
            ..Self::default()
        })
    }

    pub fn trials(&self) -> Arc<Mutex<Vec<Trial>>> {
        Arc::clone(&self.trials)
    }

    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.stop)
    }
}

impl SearchMonitor for TrialLog {
    fn trial_done(&self, trial: &Trial) {
        if let Some(file) = &self.file {
            let mut f = file.lock().expect("log lock");
            // a failing log write must not abort the search
            let _ = serde_json::to_writer(&mut *f, trial)
                .map_err(std::io::Error::from)
                .and_then(|_| {
                    f.write_all(b"\n")?;
                    f.flush()
                });
        }
        self.trials.lock().expect("trial lock").push(trial.clone());
    }

    fn should_stop(&self) -> bool {
        self.stop.load(Ordering::SeqCst)
    }
}

/// Trains on a snapshot of the project without modifying it.
pub fn train_snapshot(
    project: &Project,
    request: &TrainRequest,
    monitor: &dyn SearchMonitor,
) -> Result<TrainedPipeline> {
    let set = project.training_set();
    set.validated_tags()?;
    Ok(train_pipeline(
        &set,
        &project.image_source(),
        &project.recipe,
        &request.options(),
        monitor,
    )?)
}

/// Stores a trained model in `project`. The project stays stale when its
/// samples changed after `trained_on` was taken.
pub fn install_model(project: &mut Project, trained: TrainedPipeline, trained_on: &[SampleRecord]) {
    project.model = Some(trained.bundle);
    project.report = Some(trained.report);
    project.stale = project.samples != trained_on;
}

/// Trains, stores the model and report, and saves the project. Trials are
/// streamed to the project's search log as they complete.
pub fn train_project(project: &mut Project, request: &TrainRequest, monitor: Option<&TrialLog>) -> Result<()> {
    let own;
    let monitor = match monitor {
        Some(m) => m,
        None => {
            own = TrialLog::to_file(&project.search_log_path())?;
            &own
        }
    };
    let trained = train_snapshot(project, request, monitor)?;
    let samples = project.samples.clone();
    install_model(project, trained, &samples);
    project.save()
}
