//! Maps a two-texture scene, filters points by the plausibility limiter and
//! writes the JSON-lines report and overlay PNG.
//!
//! `cargo run --release --example map_and_overlay [out_dir]`

use std::path::PathBuf;

use gridsense::classifier::{train_pipeline, TrainOptions};
use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::imagery::{luma_plane, make_grid, niblack_informative_mask, GridSpec, NiblackParams, Rect};
use gridsense::mapping::{count_class_points, map_image, render_overlay, Palette};
use gridsense::synth;

fn main() -> gridsense::Result<()> {
    let out = std::env::args().nth(1).map_or_else(std::env::temp_dir, PathBuf::from);
    let [noise, stripes, _] = synth::three_textures();
    let (set, images) = synth::texture_training_set(&[("noise", noise), ("stripes", stripes)], 192, 12, 50, 20.0, 3);
    let recipe = FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![12],
        ..FeatureRecipe::default()
    };
    let bundle = train_pipeline(&set, &images, &recipe, &TrainOptions::random(15, 0), &())?.bundle;

    let scene = synth::two_region_image(&noise, &stripes, 320, 160, 20.0, 99);
    let grid = GridSpec::new(8)?;
    let points = make_grid(scene.width(), scene.height(), grid, 12);
    let mask = niblack_informative_mask(&luma_plane(&scene)?, &points, 12, &NiblackParams::default())?;
    let map = map_image("scene", &bundle.prepare(&scene)?, &bundle, grid, Some(&mask))?;
    println!(
        "{} grid points, {} classified",
        map.entries.len(),
        map.classified_count()
    );

    let left = Rect {
        x: 0,
        y: 0,
        width: 160,
        height: 160,
    };
    for limiter in [0.0, 0.5, 0.8, 0.95] {
        let counts: Vec<String> = map
            .classes
            .iter()
            .map(|c| {
                let all = count_class_points(&map, c, limiter, None)?;
                let in_left = count_class_points(&map, c, limiter, Some(left))?;
                Ok(format!("{c} {all} ({in_left} left)"))
            })
            .collect::<gridsense::Result<_>>()?;
        println!("limiter {limiter:.2}: {}", counts.join(", "));
    }

    let report = out.join("scene.map.jsonl");
    let overlay = out.join("scene.overlay.png");
    map.save_json_lines(&report)?;
    render_overlay(&scene, &map, 0.8, None, &Palette::default())?.save(&overlay)?;
    println!("wrote {} and {}", report.display(), overlay.display());
    Ok(())
}
