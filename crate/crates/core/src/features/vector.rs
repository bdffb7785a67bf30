use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::matrix::{build_glcm, build_glrcm, build_ogcm, haralick_stats, CoocMatrix};
use super::recipe::{ChannelMode, FeatureRecipe};
use super::spectrum::{fft_power_bands, inscribed_patch_side, line_spectrum};
use crate::error::{Error, Result};
use crate::imagery::{
    check_disc_inside, disc_pixels, factorize_plane, luma_plane, split_channels, FactorizedPlane, GrayPlane, Point,
    SampleGeometry,
};

/// Ordered numeric description of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Raw and factorized planes of one image, ready for repeated extraction.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    raw: Vec<GrayPlane>,
    factorized: Vec<FactorizedPlane>,
}

impl PreparedImage {
    pub fn new(image: &RgbImage, recipe: &FeatureRecipe) -> Result<Self> {
        let raw = match recipe.channels {
            ChannelMode::Rgb => split_channels(image)?.to_vec(),
            ChannelMode::Luma => vec![luma_plane(image)?],
        };
        Self::from_planes(raw, recipe.g_count)
    }

    pub fn from_planes(raw: Vec<GrayPlane>, g_count: usize) -> Result<Self> {
        let Some(first) = raw.first() else {
            return Err(Error::EmptyImage);
        };
        let (w, h) = (first.width(), first.height());
        for p in &raw {
            if (p.width(), p.height()) != (w, h) {
                return Err(Error::DimensionMismatch(w, h, p.width(), p.height()));
            }
        }
        let factorized = raw.iter().map(|p| factorize_plane(p, g_count)).collect::<Result<_>>()?;
        Ok(Self { raw, factorized })
    }

    pub fn width(&self) -> u32 {
        self.raw[0].width()
    }

    pub fn height(&self) -> u32 {
        self.raw[0].height()
    }

    pub fn channels(&self) -> &[GrayPlane] {
        &self.raw
    }

    pub fn factorized(&self) -> &[FactorizedPlane] {
        &self.factorized
    }
}

fn push_matrix(out: &mut Vec<f64>, recipe: &FeatureRecipe, m: &CoocMatrix, cells: Option<Vec<f64>>) -> Result<()> {
    if recipe.use_raw_matrix {
        match cells {
            Some(c) => out.extend(c),
            None => out.extend(m.normalized()?),
        }
    }
    if recipe.use_haralick {
        out.extend(haralick_stats(m)?.to_array());
    }
    Ok(())
}

/// Builds the feature vector of the sample centered at `center`.
///
/// Layout: channel, then radius, then family (GLCM, OGCM, GLRCM, FFT bands,
/// line spectra), then cell or bin. Matrix cells are divided by the matrix
/// total (or by ring size for per-ring GLRCM normalization).
pub fn assemble_feature_vector(image: &PreparedImage, center: Point, recipe: &FeatureRecipe) -> Result<FeatureVector> {
    if image.raw.len() != recipe.channels.count() {
        return Err(Error::Recipe(format!(
            "image has {} channels, recipe expects {}",
            image.raw.len(),
            recipe.channels.count()
        )));
    }
    if image.factorized[0].g_count() != recipe.g_count {
        return Err(Error::Recipe(
            "image was factorized with a different level count".into(),
        ));
    }
    for &r in &recipe.radii {
        check_disc_inside(center, r, image.width(), image.height())?;
    }
    let discs: Vec<_> = recipe.radii.iter().map(|&r| disc_pixels(center, r)).collect();
    let mut out = Vec::with_capacity(recipe.vector_len());
    for (raw, fact) in image.raw.iter().zip(&image.factorized) {
        for (&radius, disc) in recipe.radii.iter().zip(&discs) {
            if recipe.glcm.enabled {
                let m = build_glcm(fact, disc, &recipe.glcm.offsets, recipe.glcm.symmetric)?;
                push_matrix(&mut out, recipe, &m, None)?;
            }
            if recipe.ogcm.enabled {
                let m = build_ogcm(raw, disc, recipe.ogcm.pairs, recipe.ogcm_bins())?;
                push_matrix(&mut out, recipe, &m, None)?;
            }
            if recipe.glrcm.enabled {
                let geometry = SampleGeometry::new(center, radius, recipe.ring_width)?;
                let m = build_glrcm(fact, &geometry)?;
                let cells = recipe.glrcm.per_ring.then(|| m.row_normalized());
                push_matrix(&mut out, recipe, &m, cells)?;
            }
            if recipe.fft.enabled {
                out.extend(fft_power_bands(
                    raw,
                    center,
                    inscribed_patch_side(radius),
                    &recipe.fft.bands,
                )?);
            }
            if recipe.lines.enabled {
                out.extend(line_spectrum(
                    raw,
                    center,
                    radius,
                    recipe.lines.line_count,
                    recipe.lines.wavelet_levels,
                )?);
            }
        }
    }
    debug_assert_eq!(out.len(), recipe.vector_len());
    if let Some(bad) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::TrainingData(format!("feature {bad} is not finite")));
    }
    Ok(FeatureVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::recipe::{FftSpec, LineSpec};

    fn textured(w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            image::Rgb([
                ((x * 7 + y * 3) % 256) as u8,
                ((x * y) % 256) as u8,
                ((x ^ y) * 5 % 256) as u8,
            ])
        })
    }

    #[test]
    fn glrcm_only_single_channel_length() {
        let recipe = FeatureRecipe {
            channels: ChannelMode::Luma,
            ..FeatureRecipe::glrcm_only()
        };
        let img = PreparedImage::new(&textured(64, 64), &recipe).unwrap();
        let v = assemble_feature_vector(&img, Point::new(32, 32), &recipe).unwrap();
        assert_eq!(v.len(), 8 * 16);
        assert!((v.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_channels_concatenate() {
        let luma = FeatureRecipe {
            channels: ChannelMode::Luma,
            ..FeatureRecipe::default()
        };
        let rgb = FeatureRecipe::default();
        assert_eq!(rgb.vector_len(), 3 * luma.vector_len());
        let img = PreparedImage::new(&textured(64, 64), &rgb).unwrap();
        let v = assemble_feature_vector(&img, Point::new(30, 30), &rgb).unwrap();
        assert_eq!(v.len(), rgb.vector_len());
    }

    #[test]
    fn radii_are_laid_out_in_order() {
        let base = FeatureRecipe {
            channels: ChannelMode::Luma,
            ..FeatureRecipe::default()
        };
        let both = FeatureRecipe {
            radii: vec![16, 32],
            ..base.clone()
        };
        let r16 = FeatureRecipe {
            radii: vec![16],
            ..base.clone()
        };
        let r32 = FeatureRecipe {
            radii: vec![32],
            ..base
        };
        let img = PreparedImage::new(&textured(80, 80), &both).unwrap();
        let c = Point::new(40, 40);
        let v = assemble_feature_vector(&img, c, &both).unwrap();
        let mut expected = assemble_feature_vector(&img, c, &r16).unwrap().0;
        expected.extend(assemble_feature_vector(&img, c, &r32).unwrap().0);
        assert_eq!(v.0, expected);
    }

    #[test]
    fn all_families_match_declared_length() {
        let recipe = FeatureRecipe {
            use_haralick: true,
            fft: FftSpec {
                enabled: true,
                ..FftSpec::default()
            },
            lines: LineSpec {
                enabled: true,
                ..LineSpec::default()
            },
            radii: vec![8, 12],
            ..FeatureRecipe::default()
        };
        recipe.validate().unwrap();
        let img = PreparedImage::new(&textured(50, 50), &recipe).unwrap();
        let a = assemble_feature_vector(&img, Point::new(20, 20), &recipe).unwrap();
        let b = assemble_feature_vector(&img, Point::new(30, 25), &recipe).unwrap();
        assert_eq!(a.len(), recipe.vector_len());
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn out_of_bounds_disc_is_rejected() {
        let recipe = FeatureRecipe::default();
        let img = PreparedImage::new(&textured(40, 40), &recipe).unwrap();
        assert!(matches!(
            assemble_feature_vector(&img, Point::new(10, 20), &recipe),
            Err(Error::OutOfBounds { .. })
        ));
    }
}
