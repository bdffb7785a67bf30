//! Watches a frame sequence with presence, absence, count and cluster-shift
//! rules.

use gridsense::classifier::{train_pipeline, TrainOptions};
use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::imagery::{ChangeParams, GridSpec, Rect};
use gridsense::mapping::{map_frame, AlertKind, AlertRule, RuleEvaluator};
use gridsense::synth::{self, Texture};

fn main() -> gridsense::Result<()> {
    let background = Texture::ValueNoise {
        grain: 4.0,
        low: 40.0,
        high: 210.0,
    };
    let target = synth::three_textures()[2];
    let (set, images) = synth::texture_training_set(&[("scene", background), ("target", target)], 160, 12, 40, 3.0, 1);
    let recipe = FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![12],
        ..FeatureRecipe::default()
    };
    let bundle = train_pipeline(&set, &images, &recipe, &TrainOptions::random(10, 0), &())?.bundle;

    let rect = Rect {
        x: 64,
        y: 48,
        width: 80,
        height: 80,
    };
    let frames = synth::appearance_sequence(&background, &target, rect, (256, 192), 12, 4, 3.0, 5);

    let presence = AlertRule {
        min_count: 3,
        limiter: 0.5,
        persistence: 2,
        ..AlertRule::new("arrived", AlertKind::Presence, "target")
    };
    let absence = AlertRule {
        min_count: 3,
        limiter: 0.5,
        ..AlertRule::new("empty", AlertKind::Absence, "target")
    };
    let count = AlertRule {
        limiter: 0.5,
        region: Some(rect),
        ..AlertRule::new("in_rect", AlertKind::Count, "target")
    };
    let shift = AlertRule {
        min_count: 1,
        ..AlertRule::new("moved", AlertKind::ClusterShift, "target")
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&[&presence, &absence, &count, &shift]).expect("rules serialize")
    );

    let mut evaluators = [presence, absence, count, shift]
        .into_iter()
        .map(RuleEvaluator::new)
        .collect::<gridsense::Result<Vec<_>>>()?;
    for (i, frame) in frames.iter().enumerate() {
        let map = map_frame(
            format!("frame{i:02}"),
            frame,
            &frames[0],
            &bundle,
            GridSpec::new(8)?,
            &ChangeParams::default(),
        )?;
        for evaluator in &mut evaluators {
            if let Some(event) = evaluator.push(&map)? {
                println!("frame {i:2}: {}", event.message);
            }
        }
    }
    Ok(())
}
