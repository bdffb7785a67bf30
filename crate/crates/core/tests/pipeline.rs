use std::sync::atomic::{AtomicUsize, Ordering};

use gridsense::classifier::{
    train_pipeline, RandomSearch, SearchMonitor, SearchPlan, SearchSpace, StopReason, TrainOptions, Trial,
};
use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::imagery::Point;
use gridsense::synth;
use gridsense::Error;

fn recipe() -> FeatureRecipe {
    FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![8],
        ..FeatureRecipe::default()
    }
}

struct StopAfter {
    limit: usize,
    seen: AtomicUsize,
}

impl SearchMonitor for StopAfter {
    fn trial_done(&self, _trial: &Trial) {
        self.seen.fetch_add(1, Ordering::SeqCst);
    }

    fn should_stop(&self) -> bool {
        self.seen.load(Ordering::SeqCst) >= self.limit
    }
}

#[test]
fn caller_can_stop_a_search() {
    let [a, b, _] = synth::three_textures();
    let (set, images) = synth::texture_training_set(&[("a", a), ("b", b)], 96, 8, 20, 10.0, 0);
    let monitor = StopAfter {
        limit: 3,
        seen: AtomicUsize::new(0),
    };
    let tp = train_pipeline(&set, &images, &recipe(), &TrainOptions::random(50, 0), &monitor).unwrap();
    assert_eq!(tp.report.trials.len(), 3);
    assert_eq!(tp.report.stop_reason, StopReason::CallerStop);
    assert!(tp.bundle.validate().is_ok());

    let mut log = Vec::new();
    tp.report.write_json_lines(&mut log).unwrap();
    let trials: Vec<Trial> = String::from_utf8(log)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(trials, tp.report.trials);
}

#[test]
fn target_accuracy_ends_search_early() {
    let [a, b, _] = synth::three_textures();
    let (set, images) = synth::texture_training_set(&[("a", a), ("b", b)], 96, 8, 20, 5.0, 1);
    let options = TrainOptions {
        plan: SearchPlan::Random(RandomSearch {
            target_accuracy: Some(0.5),
            ..RandomSearch::new(40, 1)
        }),
        ..TrainOptions::random(40, 1)
    };
    let tp = train_pipeline(&set, &images, &recipe(), &options, &()).unwrap();
    assert_eq!(tp.report.stop_reason, StopReason::TargetReached);
    assert!(tp.report.trials.len() < 40);
    assert!(tp.report.best_accuracy() >= 0.5);
}

#[test]
fn small_grid_plan() {
    let [a, b, c] = synth::three_textures();
    let (set, images) = synth::texture_training_set(&[("a", a), ("b", b), ("c", c)], 96, 8, 15, 10.0, 2);
    let options = TrainOptions {
        space: SearchSpace {
            grid_steps: 3,
            ..SearchSpace::default()
        },
        ..TrainOptions::grid(2)
    };
    let tp = train_pipeline(&set, &images, &recipe(), &options, &()).unwrap();
    assert_eq!(tp.report.trials.len(), 9);
    assert_eq!(tp.inputs.len(), 45);
    assert_eq!(tp.bundle.classes(), ["a", "b", "c"]);
}

#[test]
fn training_errors() {
    let [a, b, _] = synth::three_textures();
    let (mut set, images) = synth::texture_training_set(&[("a", a), ("b", b)], 96, 8, 10, 10.0, 3);
    let id = set.samples[0].image.clone();
    set.push(id.clone(), Point::new(2, 2), "a");
    assert!(matches!(
        train_pipeline(&set, &images, &recipe(), &TrainOptions::random(2, 0), &()),
        Err(Error::OutOfBounds { .. })
    ));
    set.samples.pop();
    set.push("missing-image", Point::new(40, 40), "a");
    assert!(train_pipeline(&set, &images, &recipe(), &TrainOptions::random(2, 0), &()).is_err());
    set.samples.pop();
    set.push(id, Point::new(40, 40), "zebra");
    assert!(matches!(
        train_pipeline(&set, &images, &recipe(), &TrainOptions::random(2, 0), &()),
        Err(Error::UnknownClass(_))
    ));
}
