use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{OgcmPairs, DEFAULT_GLCM_OFFSETS};
use super::spectrum::{inscribed_patch_side, FreqBand};
use crate::error::{Error, Result};
use crate::imagery::DEFAULT_LEVELS;

pub const RECIPE_VERSION: u32 = 1;

/// Which planes of an RGB image are analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// R, G and B planes, each analyzed separately.
    Rgb,
    /// A single luma plane.
    Luma,
}

impl ChannelMode {
    pub fn count(self) -> usize {
        match self {
            ChannelMode::Rgb => 3,
            ChannelMode::Luma => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlcmSpec {
    pub enabled: bool,
    pub offsets: Vec<(i32, i32)>,
    pub symmetric: bool,
}

impl Default for GlcmSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            offsets: DEFAULT_GLCM_OFFSETS.to_vec(),
            symmetric: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OgcmSpec {
    pub enabled: bool,
    pub pairs: OgcmPairs,
    /// Gradient bins per axis; `None` uses the recipe's gray level count.
    pub bins: Option<usize>,
}

impl Default for OgcmSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            pairs: OgcmPairs::AxialAndDiagonal,
            bins: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlrcmSpec {
    pub enabled: bool,
    /// Normalize each ring histogram by its own pixel count instead of the
    /// matrix total.
    pub per_ring: bool,
}

impl Default for GlrcmSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            per_ring: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FftSpec {
    pub enabled: bool,
    pub bands: Vec<FreqBand>,
}

impl Default for FftSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            bands: vec![
                FreqBand::new(0.0, 0.0625),
                FreqBand::new(0.0625, 0.125),
                FreqBand::new(0.125, 0.25),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSpec {
    pub enabled: bool,
    pub line_count: usize,
    pub wavelet_levels: usize,
}

impl Default for LineSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            line_count: 4,
            wavelet_levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionSpec {
    pub keep_max: usize,
    /// Largest absolute correlation allowed between two kept features.
    pub redundancy_max: f64,
}

impl Default for SelectionSpec {
    fn default() -> Self {
        Self {
            keep_max: 64,
            redundancy_max: 0.95,
        }
    }
}

/// Parameters that fully determine how a sample becomes a feature vector.
///
/// Serialized as a versioned JSON document with every field written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureRecipe {
    pub version: u32,
    pub channels: ChannelMode,
    pub g_count: usize,
    /// Sample radii; several radii give a multi-resolution vector.
    pub radii: Vec<u32>,
    pub ring_width: u32,
    pub glcm: GlcmSpec,
    pub ogcm: OgcmSpec,
    pub glrcm: GlrcmSpec,
    /// Include normalized matrix cells.
    pub use_raw_matrix: bool,
    /// Include contrast, homogeneity, entropy and uniformity per matrix.
    pub use_haralick: bool,
    pub fft: FftSpec,
    pub lines: LineSpec,
    pub selection: SelectionSpec,
}

impl Default for FeatureRecipe {
    fn default() -> Self {
        Self {
            version: RECIPE_VERSION,
            channels: ChannelMode::Rgb,
            g_count: DEFAULT_LEVELS,
            radii: vec![16],
            ring_width: 2,
            glcm: GlcmSpec::default(),
            ogcm: OgcmSpec::default(),
            glrcm: GlrcmSpec::default(),
            use_raw_matrix: true,
            use_haralick: false,
            fft: FftSpec::default(),
            lines: LineSpec::default(),
            selection: SelectionSpec::default(),
        }
    }
}

impl FeatureRecipe {
    /// Recipe with only the GLRCM family enabled.
    pub fn glrcm_only() -> Self {
        Self {
            glcm: GlcmSpec {
                enabled: false,
                ..GlcmSpec::default()
            },
            ogcm: OgcmSpec {
                enabled: false,
                ..OgcmSpec::default()
            },
            ..Self::default()
        }
    }

    /// Recipe with only the GLCM family enabled.
    pub fn glcm_only() -> Self {
        Self {
            ogcm: OgcmSpec {
                enabled: false,
                ..OgcmSpec::default()
            },
            glrcm: GlrcmSpec {
                enabled: false,
                ..GlrcmSpec::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Recipe(m));
        if self.version != RECIPE_VERSION {
            return Err(Error::Version {
                what: "recipe",
                expected: RECIPE_VERSION,
                found: self.version,
            });
        }
        if !(2..=256).contains(&self.g_count) {
            return bad(format!("g_count {} outside 2..=256", self.g_count));
        }
        if self.radii.is_empty() {
            return bad("at least one radius is required".into());
        }
        if self.ring_width == 0 {
            return bad("ring_width must be positive".into());
        }
        for &r in &self.radii {
            if r < 2 {
                return bad(format!("radius {r} is too small"));
            }
            if r % self.ring_width != 0 {
                return bad(format!("ring width {} does not divide radius {r}", self.ring_width));
            }
        }
        let matrices = self.glcm.enabled || self.ogcm.enabled || self.glrcm.enabled;
        if matrices && !self.use_raw_matrix && !self.use_haralick {
            return bad("matrix families need use_raw_matrix or use_haralick".into());
        }
        if !matrices && !self.fft.enabled && !self.lines.enabled {
            return bad("no feature family enabled".into());
        }
        if self.glcm.enabled && self.glcm.offsets.is_empty() {
            return bad("GLCM needs at least one offset".into());
        }
        if self.ogcm_bins() == 0 {
            return bad("OGCM needs at least one bin".into());
        }
        if self.fft.enabled {
            if self.fft.bands.is_empty() {
                return bad("FFT family needs at least one band".into());
            }
            if self.radii.iter().any(|&r| inscribed_patch_side(r) < 2) {
                return bad("radius too small for an FFT patch".into());
            }
        }
        if self.lines.enabled {
            if self.lines.line_count == 0 {
                return bad("line spectrum needs at least one line".into());
            }
            for &r in &self.radii {
                let max_levels = (2 * r as usize + 1).next_power_of_two().trailing_zeros() as usize;
                if self.lines.wavelet_levels == 0 || self.lines.wavelet_levels > max_levels {
                    return bad(format!(
                        "radius {r} supports 1..={max_levels} wavelet levels, {} requested",
                        self.lines.wavelet_levels
                    ));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.selection.redundancy_max) {
            return bad("redundancy_max must lie in [0, 1]".into());
        }
        if self.selection.keep_max == 0 {
            return bad("keep_max must be positive".into());
        }
        Ok(())
    }

    pub fn ogcm_bins(&self) -> usize {
        self.ogcm.bins.unwrap_or(self.g_count)
    }

    pub fn max_radius(&self) -> u32 {
        self.radii.iter().copied().max().unwrap_or(0)
    }

    fn matrix_len(&self, cells: usize) -> usize {
        (if self.use_raw_matrix { cells } else { 0 }) + if self.use_haralick { 4 } else { 0 }
    }

    /// Features contributed by one channel at one radius.
    pub fn block_len(&self, radius: u32) -> usize {
        let mut n = 0;
        if self.glcm.enabled {
            n += self.matrix_len(self.g_count * self.g_count);
        }
        if self.ogcm.enabled {
            n += self.matrix_len(self.ogcm_bins() * self.ogcm_bins());
        }
        if self.glrcm.enabled {
            n += self.matrix_len((radius / self.ring_width) as usize * self.g_count);
        }
        if self.fft.enabled {
            n += self.fft.bands.len();
        }
        if self.lines.enabled {
            n += self.lines.line_count * self.lines.wavelet_levels;
        }
        n
    }

    /// Length of every vector produced under this recipe.
    pub fn vector_len(&self) -> usize {
        self.channels.count() * self.radii.iter().map(|&r| self.block_len(r)).sum::<usize>()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let recipe: Self = serde_json::from_str(text)?;
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_recipe_is_valid() {
        let r = FeatureRecipe::default();
        r.validate().unwrap();
        // 3 channels x (256 GLCM + 256 OGCM + 8x16 GLRCM)
        assert_eq!(r.vector_len(), 3 * (256 + 256 + 128));
    }

    #[test]
    fn json_writes_every_field() {
        let json = FeatureRecipe::default().to_json().unwrap();
        for key in [
            "version",
            "g_count",
            "ring_width",
            "offsets",
            "symmetric",
            "pairs",
            "bins",
            "per_ring",
            "bands",
            "line_count",
            "wavelet_levels",
            "keep_max",
            "redundancy_max",
            "use_haralick",
        ] {
            assert!(json.contains(&format!("\"{key}\"")), "missing {key}");
        }
        assert_eq!(FeatureRecipe::from_json(&json).unwrap(), FeatureRecipe::default());
    }

    #[test]
    fn missing_fields_take_defaults() {
        let r = FeatureRecipe::from_json(r#"{"version": 1, "g_count": 8, "radii": [12]}"#).unwrap();
        assert_eq!(r.g_count, 8);
        assert_eq!(r.ring_width, 2);
    }

    #[test]
    fn invalid_recipes() {
        let cases = [
            FeatureRecipe {
                ring_width: 3,
                ..FeatureRecipe::default()
            },
            FeatureRecipe {
                radii: vec![],
                ..FeatureRecipe::default()
            },
            FeatureRecipe {
                g_count: 1,
                ..FeatureRecipe::default()
            },
            FeatureRecipe {
                glcm: GlcmSpec {
                    enabled: false,
                    ..Default::default()
                },
                ogcm: OgcmSpec {
                    enabled: false,
                    ..Default::default()
                },
                glrcm: GlrcmSpec {
                    enabled: false,
                    ..Default::default()
                },
                ..FeatureRecipe::default()
            },
            FeatureRecipe {
                lines: LineSpec {
                    enabled: true,
                    line_count: 4,
                    wavelet_levels: 9,
                },
                ..FeatureRecipe::default()
            },
            FeatureRecipe {
                version: 7,
                ..FeatureRecipe::default()
            },
        ];
        for r in cases {
            assert!(r.validate().is_err(), "{r:?}");
        }
    }
}
