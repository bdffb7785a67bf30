use std::path::{Path, PathBuf};

use gridsense::imagery::ChangeParams;
use gridsense::imagery::{load_rgb, GridSpec};
use gridsense::mapping::{
    map_frame, map_image, render_overlay, AlertEvent, AlertRule, GridMap, MapRecord, Palette, RuleEvaluator,
};
use image::RgbImage;

use crate::error::{Error, Result};
use crate::project::Project;

fn grid(project: &Project) -> Result<GridSpec> {
    Ok(GridSpec::new(project.grid_step)?)
}

pub fn map_rgb(project: &Project, id: &str, image: &RgbImage) -> Result<GridMap> {
    let bundle = project.model()?;
    let prepared = bundle.prepare(image)?;
    Ok(map_image(id, &prepared, bundle, grid(project)?, None)?)
}

/// Maps a registered image.
pub fn map_registered(project: &Project, id: &str) -> Result<GridMap> {
    project.model()?;
    map_rgb(project, id, &project.load_image(id)?)
}

#[derive(Debug, Clone, Default)]
pub struct MapOutputs {
    pub limiter: f64,
    /// Classes to mark; empty marks all.
    pub classes: Vec<String>,
    pub overlay: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Maps an image file and writes the requested report and overlay.
pub fn map_file(project: &Project, image: &Path, outputs: &MapOutputs) -> Result<GridMap> {
    project.model()?;
    let rgb = load_rgb(image)?;
    let id = image.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    let map = map_rgb(project, id, &rgb)?;
    if let Some(path) = &outputs.report {
        map.save_json_lines(path)?;
    }
    if let Some(path) = &outputs.overlay {
        let classes = (!outputs.classes.is_empty()).then_some(outputs.classes.as_slice());
        render_overlay(&rgb, &map, outputs.limiter, classes, &Palette::default())?.save(path)?;
    }
    Ok(map)
}

/// Records of the points that pass `limiter` for their argmax class.
pub fn filtered_records(map: &GridMap, limiter: f64) -> Result<Vec<MapRecord>> {
    if !(0.0..=1.0).contains(&limiter) {
        return Err(Error::Invalid(format!("limiter {limiter} outside [0, 1]")));
    }
    Ok(map
        .records()
        .zip(&map.entries)
        .filter(|(_, e)| e.probability().is_some_and(|p| p >= limiter))
        .map(|(r, _)| r)
        .collect())
}

/// Image files of a directory in file-name order.
pub fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| {
        p.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| ["png", "ppm", "pgm", "pnm"].contains(&e.to_ascii_lowercase().as_str()))
    });
    paths.sort();
    Ok(paths)
}

/// Maps every frame in `dir` against the first one and evaluates `rules`,
/// calling `on_event` as events occur.
pub fn watch_frames(
    project: &Project,
    dir: &Path,
    rules: &[AlertRule],
    change: &ChangeParams,
    mut on_event: impl FnMut(&AlertEvent),
) -> Result<Vec<AlertEvent>> {
    let bundle = project.model()?;
    let paths = frame_paths(dir)?;
    let Some(first) = paths.first() else {
        return Err(Error::Invalid(format!("no frames in {}", dir.display())));
    };
    let reference = load_rgb(first)?;
    let mut evaluators = rules
        .iter()
        .cloned()
        .map(RuleEvaluator::new)
        .collect::<gridsense::Result<Vec<_>>>()?;
    let mut events = Vec::new();
    for path in &paths {
        let frame = load_rgb(path)?;
        let id = path.file_name().and_then(|s| s.to_str()).unwrap_or("frame");
        let map = map_frame(id, &frame, &reference, bundle, grid(project)?, change)?;
        for evaluator in &mut evaluators {
            if let Some(event) = evaluator.push(&map)? {
                on_event(&event);
                events.push(event);
            }
        }
    }
    Ok(events)
}
