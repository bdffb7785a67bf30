use std::io::Write;
use std::path::Path;

use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::ModelBundle;
use crate::error::{Error, Result};
use crate::features::PreparedImage;
use crate::imagery::{frame_change_mask, luma_plane, make_grid, ChangeParams, GridSpec, InformativeMask, Point, Rect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub point: Point,
    pub informative: bool,
    /// Argmax class index; `None` for skipped points.
    pub class: Option<usize>,
    /// Calibrated per-class probabilities; empty for skipped points.
    pub probabilities: Vec<f64>,
}

impl MapEntry {
    pub fn probability(&self) -> Option<f64> {
        self.class.map(|c| self.probabilities[c])
    }
}

/// Classification of every grid point of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub image_id: String,
    pub grid: GridSpec,
    pub radius: u32,
    pub classes: Vec<String>,
    pub entries: Vec<MapEntry>,
}

/// One JSON-lines record of a [`GridMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub x: i32,
    pub y: i32,
    pub informative: bool,
    pub class: Option<String>,
    pub p: Vec<f64>,
}

/// Classifies every point of `make_grid` for the bundle's largest radius.
/// Points switched off by `mask` are recorded as non-informative.
pub fn map_image(
    image_id: impl Into<String>,
    image: &PreparedImage,
    bundle: &ModelBundle,
    grid: GridSpec,
    mask: Option<&InformativeMask>,
) -> Result<GridMap> {
    bundle.validate()?;
    let radius = bundle.recipe.max_radius();
    let points = make_grid(image.width(), image.height(), grid, radius);
    if let Some(m) = mask {
        if m.len() != points.len() {
            return Err(Error::Parameter(format!(
                "mask has {} flags for {} grid points",
                m.len(),
                points.len()
            )));
        }
    }
    let entries = points
        .par_iter()
        .enumerate()
        .map(|(i, &point)| {
            if mask.is_some_and(|m| !m.get(i)) {
                return Ok(MapEntry {
                    point,
                    informative: false,
                    class: None,
                    probabilities: Vec::new(),
                });
            }
            let prediction = bundle.predict(image, point)?;
            Ok(MapEntry {
                point,
                informative: true,
                class: Some(prediction.class_index),
                probabilities: prediction.probabilities,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridMap {
        image_id: image_id.into(),
        grid,
        radius,
        classes: bundle.classes().to_vec(),
        entries,
    })
}

/// Maps a video frame, classifying only grid points in blocks that differ
/// from `reference`.
pub fn map_frame(
    image_id: impl Into<String>,
    frame: &RgbImage,
    reference: &RgbImage,
    bundle: &ModelBundle,
    grid: GridSpec,
    change: &ChangeParams,
) -> Result<GridMap> {
    let changes = frame_change_mask(&luma_plane(frame)?, &luma_plane(reference)?, change)?;
    let points = make_grid(frame.width(), frame.height(), grid, bundle.recipe.max_radius());
    let mask = InformativeMask::from_changes(&points, &changes);
    let prepared = bundle.prepare(frame)?;
    map_image(image_id, &prepared, bundle, grid, Some(&mask))
}

fn check_limiter(limiter: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&limiter) {
        return Err(Error::Parameter(format!("limiter {limiter} outside [0, 1]")));
    }
    Ok(())
}

impl GridMap {
    pub fn class_index(&self, tag: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == tag)
            .ok_or_else(|| Error::UnknownClass(tag.to_string()))
    }

    pub fn classified_count(&self) -> usize {
        self.entries.iter().filter(|e| e.informative).count()
    }

    pub fn records(&self) -> impl Iterator<Item = MapRecord> + '_ {
        self.entries.iter().map(|e| MapRecord {
            x: e.point.x,
            y: e.point.y,
            informative: e.informative,
            class: e.class.map(|c| self.classes[c].clone()),
            p: e.probabilities.clone(),
        })
    }

    pub fn write_json_lines(&self, mut out: impl Write) -> Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_json_lines(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_json_lines(&mut file)?;
        file.flush()?;
        Ok(())
    }

    fn matching(&self, class: usize, limiter: f64) -> impl Iterator<Item = Point> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.class == Some(class) && e.probabilities[class] >= limiter)
            .map(|e| e.point)
    }
}

/// Points whose argmax class is `tag` with probability at least `limiter`.
pub fn filter_points(map: &GridMap, tag: &str, limiter: f64) -> Result<Vec<Point>> {
    check_limiter(limiter)?;
    let class = map.class_index(tag)?;
    Ok(map.matching(class, limiter).collect())
}

/// Size of [`filter_points`], optionally restricted to `region`.
pub fn count_class_points(map: &GridMap, tag: &str, limiter: f64, region: Option<Rect>) -> Result<usize> {
    check_limiter(limiter)?;
    let class = map.class_index(tag)?;
    Ok(map
        .matching(class, limiter)
        .filter(|&p| region.is_none_or(|r| r.contains(p)))
        .count())
}

/// Mark colors indexed by class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette(pub Vec<[u8; 3]>);

impl Default for Palette {
    fn default() -> Self {
        Self(vec![
            [255, 255, 255],
            [255, 64, 64],
            [64, 224, 64],
            [64, 128, 255],
            [255, 208, 0],
            [224, 64, 224],
            [0, 224, 224],
            [255, 128, 0],
        ])
    }
}

impl Palette {
    pub fn color(&self, class: usize) -> [u8; 3] {
        self.0[class % self.0.len()]
    }
}

/// Copy of `image` with a 3x3 mark on every filtered point of the selected
/// classes (all classes when `classes` is `None`).
pub fn render_overlay(
    image: &RgbImage,
    map: &GridMap,
    limiter: f64,
    classes: Option<&[String]>,
    palette: &Palette,
) -> Result<RgbImage> {
    check_limiter(limiter)?;
    let selected: Vec<usize> = match classes {
        Some(tags) => tags.iter().map(|t| map.class_index(t)).collect::<Result<_>>()?,
        None => (0..map.classes.len()).collect(),
    };
    let mut out = image.clone();
    for &class in &selected {
        let color = Rgb(palette.color(class));
        for p in map.matching(class, limiter) {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (x, y) = (p.x + dx, p.y + dy);
                    if x >= 0 && y >= 0 && (x as u32) < out.width() && (y as u32) < out.height() {
                        out.put_pixel(x as u32, y as u32, color);
                    }
                }
            }
        }
    }
    Ok(out)
}
