//! Counts iris-textured grid points while a lid closes over them.

use gridsense::classifier::{train_pipeline, TrainOptions};
use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::imagery::GridSpec;
use gridsense::mapping::{count_class_points, map_image};
use gridsense::synth::{self, Texture};

fn main() -> gridsense::Result<()> {
    let skin = Texture::ValueNoise {
        grain: 6.0,
        low: 150.0,
        high: 200.0,
    };
    let iris = synth::three_textures()[1];
    let (set, images) = synth::texture_training_set(&[("skin", skin), ("iris", iris)], 128, 8, 40, 3.0, 2);
    let recipe = FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![8],
        ..FeatureRecipe::default()
    };
    let bundle = train_pipeline(&set, &images, &recipe, &TrainOptions::random(10, 0), &())?.bundle;

    let frames = synth::occlusion_sequence(&skin, &iris, &skin, (160, 120), 40.0, 8, 10.0, 3);
    for (i, frame) in frames.iter().enumerate() {
        let map = map_image(
            format!("frame{i}"),
            &bundle.prepare(frame)?,
            &bundle,
            GridSpec::new(6)?,
            None,
        )?;
        let n = count_class_points(&map, "iris", 0.5, None)?;
        println!("frame {i}: {n:3} iris points {}", "#".repeat(n / 2));
    }
    Ok(())
}
