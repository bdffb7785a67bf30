//! Procedural textures, scenes and point clouds.
//!
//! Textures are continuous functions of the plane, so rendering one at
//! `scale = 2.0` produces the same pattern magnified twice. Every generator
//! is a pure function of its seed.

use std::collections::BTreeMap;

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classifier::{Dataset, TrainingSet};
use crate::imagery::{gray_to_rgb, GrayPlane, Point, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    /// Bilinearly interpolated random lattice with spacing `grain`.
    ValueNoise {
        grain: f64,
        low: f64,
        high: f64,
    },
    /// Cosine stripes across direction `angle` (radians).
    Stripes {
        period: f64,
        angle: f64,
        low: f64,
        high: f64,
    },
    Checker {
        cell: f64,
        low: f64,
        high: f64,
    },
    /// One randomly placed disc of radius `radius` per `cell x cell` tile.
    Spots {
        radius: f64,
        cell: f64,
        background: f64,
        spot: f64,
    },
    Flat {
        level: f64,
    },
}

fn hash01(i: i64, j: i64, seed: u64) -> f64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [i as u64, j as u64] {
        h ^= v.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = h.rotate_left(31).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 29;
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

impl Texture {
    /// Noise-free intensity at continuous pattern coordinates.
    pub fn value(&self, u: f64, v: f64, seed: u64) -> f64 {
        match *self {
            Texture::ValueNoise { grain, low, high } => {
                let (gu, gv) = (u / grain, v / grain);
                let (i, j) = (gu.floor(), gv.floor());
                let (fu, fv) = (gu - i, gv - j);
                let (i, j) = (i as i64, j as i64);
                let a = hash01(i, j, seed);
                let b = hash01(i + 1, j, seed);
                let c = hash01(i, j + 1, seed);
                let d = hash01(i + 1, j + 1, seed);
                let t = a * (1.0 - fu) * (1.0 - fv) + b * fu * (1.0 - fv) + c * (1.0 - fu) * fv + d * fu * fv;
                low + (high - low) * t
            }
            Texture::Stripes {
                period,
                angle,
                low,
                high,
            } => {
                let phase = hash01(7, 7, seed) * std::f64::consts::TAU;
                let s = u * angle.cos() + v * angle.sin();
                let t = 0.5 + 0.5 * (std::f64::consts::TAU * s / period + phase).cos();
                low + (high - low) * t
            }
            Texture::Checker { cell, low, high } => {
                let off = hash01(3, 9, seed) * cell;
                let parity = (((u + off) / cell).floor() as i64 + ((v + off) / cell).floor() as i64).rem_euclid(2);
                if parity == 0 {
                    low
                } else {
                    high
                }
            }
            Texture::Spots {
                radius,
                cell,
                background,
                spot,
            } => {
                let (i, j) = ((u / cell).floor() as i64, (v / cell).floor() as i64);
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let (ci, cj) = (i + di, j + dj);
                        let cx = (ci as f64 + hash01(ci, cj, seed)) * cell;
                        let cy = (cj as f64 + hash01(cj, ci, seed ^ 0xABCD)) * cell;
                        if (u - cx).powi(2) + (v - cy).powi(2) <= radius * radius {
                            return spot;
                        }
                    }
                }
                background
            }
            Texture::Flat { level } => level,
        }
    }
}

fn to_level(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Renders `texture` magnified by `scale`, with additive Gaussian pixel noise.
pub fn render(texture: &Texture, width: u32, height: u32, scale: f64, noise: f64, seed: u64) -> GrayPlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
    let normal = Normal::new(0.0, noise.max(1e-12)).expect("finite sigma");
    GrayPlane::from_fn(width, height, |x, y| {
        let v = texture.value(x as f64 / scale, y as f64 / scale, seed);
        let n = if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        to_level(v + n)
    })
    .expect("non-empty plane")
}

pub fn render_rgb(texture: &Texture, width: u32, height: u32, scale: f64, noise: f64, seed: u64) -> RgbImage {
    gray_to_rgb(&render(texture, width, height, scale, noise, seed))
}

/// Image whose left half shows `left` and right half shows `right`.
pub fn two_region_image(left: &Texture, right: &Texture, width: u32, height: u32, noise: f64, seed: u64) -> RgbImage {
    let a = render(left, width, height, 1.0, noise, seed);
    let b = render(right, width, height, 1.0, noise, seed.wrapping_add(1));
    let split = width / 2;
    let plane = GrayPlane::from_fn(width, height, |x, y| if x < split { a.get(x, y) } else { b.get(x, y) }).unwrap();
    gray_to_rgb(&plane)
}

/// Copies `patch` rendered into `rect` over `base`.
pub fn paste(base: &GrayPlane, rect: Rect, patch: &Texture, noise: f64, seed: u64) -> GrayPlane {
    let overlay = render(patch, base.width(), base.height(), 1.0, noise, seed);
    GrayPlane::from_fn(base.width(), base.height(), |x, y| {
        if rect.contains((x as i32, y as i32).into()) {
            overlay.get(x, y)
        } else {
            base.get(x, y)
        }
    })
    .unwrap()
}

/// Adds fresh Gaussian sensor noise to a frame.
pub fn jitter(base: &GrayPlane, noise: f64, seed: u64) -> GrayPlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(1e-12)).expect("finite sigma");
    GrayPlane::from_fn(base.width(), base.height(), |x, y| {
        to_level(base.get(x, y) as f64 + if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 })
    })
    .unwrap()
}

/// Isotropic Gaussian clouds in 2D, `per_class` points around each center.
pub fn gaussian_blobs(centers: &[(f64, f64)], per_class: usize, sigma: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut vectors = Vec::new();
    let mut tags = Vec::new();
    for (c, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..per_class {
            vectors.push(vec![cx + normal.sample(&mut rng), cy + normal.sample(&mut rng)]);
            tags.push(c);
        }
    }
    Dataset::from_indices(vectors, tags).expect("at least two centers")
}

/// Uniform random features with balanced, randomly assigned binary labels.
pub fn random_labels(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut tags: Vec<usize> = (0..n).map(|i| i % 2).collect();
    rand::seq::SliceRandom::shuffle(tags.as_mut_slice(), &mut rng);
    Dataset::from_indices(vectors, tags).expect("two classes")
}

/// Three textures with overlapping gray-level ranges and distinct structure,
/// used as a standard three-class problem.
pub fn three_textures() -> [Texture; 3] {
    [
        Texture::ValueNoise {
            grain: 3.0,
            low: 50.0,
            high: 200.0,
        },
        Texture::Stripes {
            period: 9.0,
            angle: 0.6,
            low: 60.0,
            high: 190.0,
        },
        Texture::Spots {
            radius: 3.0,
            cell: 11.0,
            background: 90.0,
            spot: 180.0,
        },
    ]
}

/// One `size x size` image per class, each showing only that class's
/// texture, with `per_class` random sample centers whose radius-`radius`
/// discs fit inside the image.
pub fn texture_training_set(
    classes: &[(&str, Texture)],
    size: u32,
    radius: u32,
    per_class: usize,
    noise: f64,
    seed: u64,
) -> (TrainingSet, BTreeMap<String, RgbImage>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = TrainingSet::new(classes.iter().map(|(name, _)| name.to_string()).collect());
    let mut images = BTreeMap::new();
    let (lo, hi) = (radius as i32, (size - radius) as i32);
    for (c, (name, texture)) in classes.iter().enumerate() {
        let id = format!("{name}-{seed}");
        images.insert(
            id.clone(),
            render_rgb(
                texture,
                size,
                size,
                1.0,
                noise,
                seed.wrapping_mul(31).wrapping_add(c as u64),
            ),
        );
        for _ in 0..per_class {
            set.push(
                id.clone(),
                Point::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi)),
                *name,
            );
        }
    }
    (set, images)
}

/// A static scene observed by a noisy camera: `background` everywhere, with
/// `target` filling `rect` from frame `appear_at` on.
#[allow(clippy::too_many_arguments)]
pub fn appearance_sequence(
    background: &Texture,
    target: &Texture,
    rect: Rect,
    size: (u32, u32),
    frames: usize,
    appear_at: usize,
    noise: f64,
    seed: u64,
) -> Vec<RgbImage> {
    let scene = render(background, size.0, size.1, 1.0, 0.0, seed);
    let with_target = paste(&scene, rect, target, 0.0, seed.wrapping_add(1));
    (0..frames)
        .map(|f| {
            let base = if f >= appear_at { &with_target } else { &scene };
            gray_to_rgb(&jitter(base, noise, seed.wrapping_add(100 + f as u64)))
        })
        .collect()
}

/// A `target` disc of radius `radius` on `background`, covered from the top
/// by a lid of texture `lid` that descends `lid_step` pixels per frame.
#[allow(clippy::too_many_arguments)]
pub fn occlusion_sequence(
    background: &Texture,
    target: &Texture,
    lid: &Texture,
    size: (u32, u32),
    radius: f64,
    frames: usize,
    lid_step: f64,
    seed: u64,
) -> Vec<RgbImage> {
    let (cx, cy) = (size.0 as f64 / 2.0, size.1 as f64 / 2.0);
    let top = cy - radius;
    (0..frames)
        .map(|f| {
            let lid_edge = top + lid_step * f as f64;
            let plane = GrayPlane::from_fn(size.0, size.1, |x, y| {
                let (u, v) = (x as f64, y as f64);
                let texture = if v < lid_edge {
                    lid
                } else if (u - cx).powi(2) + (v - cy).powi(2) <= radius * radius {
                    target
                } else {
                    background
                };
                to_level(texture.value(u, v, seed))
            })
            .unwrap();
            gray_to_rgb(&plane)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_seeded() {
        let t = Texture::ValueNoise {
            grain: 4.0,
            low: 0.0,
            high: 255.0,
        };
        assert_eq!(render(&t, 20, 20, 1.0, 3.0, 5), render(&t, 20, 20, 1.0, 3.0, 5));
        assert_ne!(render(&t, 20, 20, 1.0, 3.0, 5), render(&t, 20, 20, 1.0, 3.0, 6));
    }

    #[test]
    fn scale_magnifies() {
        let t = Texture::Checker {
            cell: 4.0,
            low: 0.0,
            high: 255.0,
        };
        let one = render(&t, 16, 16, 1.0, 0.0, 1);
        let two = render(&t, 32, 32, 2.0, 0.0, 1);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(one.get(x, y), two.get(2 * x, 2 * y));
            }
        }
    }

    #[test]
    fn appearance_changes_only_inside_rect() {
        let rect = Rect {
            x: 8,
            y: 8,
            width: 8,
            height: 8,
        };
        let frames = appearance_sequence(
            &Texture::Flat { level: 10.0 },
            &Texture::Flat { level: 200.0 },
            rect,
            (32, 32),
            4,
            2,
            0.0,
            0,
        );
        assert_eq!(frames[0], frames[1]);
        assert_eq!(frames[1].get_pixel(10, 10).0, [10; 3]);
        assert_eq!(frames[2].get_pixel(10, 10).0, [200; 3]);
        assert_eq!(frames[3].get_pixel(20, 20).0, [10; 3]);
    }

    #[test]
    fn training_set_discs_fit() {
        let (set, images) = texture_training_set(&three_textures().map(|t| ("t", t))[..1], 40, 8, 20, 5.0, 3);
        assert_eq!(images.len(), 1);
        assert_eq!(set.samples.len(), 20);
        assert!(set
            .samples
            .iter()
            .all(|s| (8..32).contains(&s.center.x) && (8..32).contains(&s.center.y)));
    }

    #[test]
    fn blobs_have_requested_shape() {
        let d = gaussian_blobs(&[(0.0, 0.0), (5.0, 5.0), (9.0, 0.0)], 7, 0.3, 0);
        assert_eq!(d.len(), 21);
        assert_eq!(d.class_counts(), vec![7, 7, 7]);
    }
}
