//! Trains a three-class texture model with randomized `(C, gamma)` search,
//! compares it with the exhaustive grid and saves the model bundle.
//!
//! `cargo run --release --example train_and_search [budget] [bundle.json]`

use std::time::Instant;

use gridsense::classifier::{train_pipeline, ModelBundle, SearchMonitor, TrainOptions, Trial};
use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::synth;

struct Progress;

impl SearchMonitor for Progress {
    fn trial_done(&self, t: &Trial) {
        println!(
            "  trial {:3}: log2 C {:6.2}  log2 gamma {:7.2}  cv {:.4}",
            t.index, t.log2_c, t.log2_gamma, t.cv_accuracy
        );
    }
}

fn main() -> gridsense::Result<()> {
    let mut args = std::env::args().skip(1);
    let budget: usize = args
        .next()
        .map_or(20, |s| s.parse().expect("budget must be an integer"));
    let out = args
        .next()
        .unwrap_or_else(|| std::env::temp_dir().join("gridsense-bundle.json").display().to_string());

    let [a, b, c] = synth::three_textures();
    let (set, images) =
        synth::texture_training_set(&[("noise", a), ("stripes", b), ("spots", c)], 256, 16, 60, 40.0, 7);
    let recipe = FeatureRecipe {
        channels: ChannelMode::Luma,
        ..FeatureRecipe::default()
    };

    println!("random search, budget {budget}");
    let start = Instant::now();
    let random = train_pipeline(&set, &images, &recipe, &TrainOptions::random(budget, 1), &Progress)?;
    let random_time = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let grid = train_pipeline(&set, &images, &recipe, &TrainOptions::grid(1), &())?;
    let grid_time = start.elapsed().as_secs_f64();

    println!(
        "random: {} trials, best {:.4} in {random_time:.1}s; grid: {} trials, best {:.4} in {grid_time:.1}s",
        random.report.trials.len(),
        random.report.best_accuracy(),
        grid.report.trials.len(),
        grid.report.best_accuracy()
    );
    let bundle = &random.bundle;
    println!(
        "model: C {:.3}, gamma {:.5}, {} support vectors, {} of {} features kept",
        bundle.svm.c,
        bundle.svm.gamma,
        bundle.svm.support_vectors.len(),
        bundle.selection.output_len(),
        bundle.selection.input_len()
    );
    bundle.save(&out)?;
    assert_eq!(&ModelBundle::load(&out)?, bundle);
    println!("saved {out}");
    Ok(())
}
