use std::path::{Path, PathBuf};

use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::synth;
use gridsense_workbench::Project;

pub fn recipe() -> FeatureRecipe {
    FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![8],
        ..FeatureRecipe::default()
    }
}

/// Writes one texture image per class plus a two-region scene.
pub fn write_images(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let [a, b, _] = synth::three_textures();
    let left = dir.join("left.png");
    let right = dir.join("right.png");
    let scene = dir.join("scene.png");
    synth::render_rgb(&a, 96, 96, 1.0, 10.0, 1).save(&left).unwrap();
    synth::render_rgb(&b, 96, 96, 1.0, 10.0, 2).save(&right).unwrap();
    synth::two_region_image(&a, &b, 120, 64, 10.0, 3).save(&scene).unwrap();
    (left, right, scene)
}

#[allow(dead_code)]
/// Project with classes `noise` and `stripes` and `per_class` samples each.
pub fn project(dir: &Path, per_class: i32) -> Project {
    let (left, right, _) = write_images(dir);
    let mut p = Project::create(
        dir.join("project.json"),
        "demo",
        vec!["noise".into(), "stripes".into()],
        recipe(),
    )
    .unwrap();
    let l = p.register_image(&left).unwrap();
    let r = p.register_image(&right).unwrap();
    for i in 0..per_class {
        let (x, y) = (12 + (i * 13) % 70, 12 + (i * 29) % 70);
        p.add_sample(&l, x, y, "noise").unwrap();
        p.add_sample(&r, x, y, "stripes").unwrap();
    }
    p.save().unwrap();
    p
}
