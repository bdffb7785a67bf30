use std::io::{Read, Write};
use std::path::Path;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of gray levels after factorization.
pub const DEFAULT_LEVELS: usize = 16;

/// Single-channel 8-bit raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayPlane {
    width: u32,
    height: u32,
    levels: Vec<u8>,
}

impl GrayPlane {
    pub fn new(width: u32, height: u32, levels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if levels.len() != width as usize * height as usize {
            return Err(Error::Geometry(format!(
                "{} levels for a {width}x{height} plane",
                levels.len()
            )));
        }
        Ok(Self { width, height, levels })
    }

    pub fn filled(width: u32, height: u32, level: u8) -> Result<Self> {
        Self::new(width, height, vec![level; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut levels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                levels.push(f(x, y));
            }
        }
        Self::new(width, height, levels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.levels[y as usize * self.width as usize + x as usize]
    }

    /// Level at signed coordinates, `None` outside the plane.
    #[inline]
    pub fn get_checked(&self, x: i32, y: i32) -> Option<u8> {
        if x < 0 || y < 0 || x as u32 >= self.width || y as u32 >= self.height {
            None
        } else {
            Some(self.get(x as u32, y as u32))
        }
    }

    /// Writes the raw dump: little-endian u32 width, u32 height, then the
    /// row-major bytes.
    pub fn write_raw(&self, mut out: impl Write) -> Result<()> {
        out.write_all(&self.width.to_le_bytes())?;
        out.write_all(&self.height.to_le_bytes())?;
        out.write_all(&self.levels)?;
        Ok(())
    }

    pub fn read_raw(mut input: impl Read) -> Result<Self> {
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let width = u32::from_le_bytes(word);
        input.read_exact(&mut word)?;
        let height = u32::from_le_bytes(word);
        let mut levels = vec![0u8; width as usize * height as usize];
        input.read_exact(&mut levels)?;
        Self::new(width, height, levels)
    }

    pub fn to_luma_image(&self) -> image::GrayImage {
        image::GrayImage::from_raw(self.width, self.height, self.levels.clone())
            .expect("plane buffer matches its dimensions")
    }
}

/// Plane quantized to `g_count` levels by [`factorize_plane`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizedPlane {
    width: u32,
    height: u32,
    g_count: usize,
    levels: Vec<u8>,
}

impl FactorizedPlane {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn g_count(&self) -> usize {
        self.g_count
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.levels[y as usize * self.width as usize + x as usize]
    }
}

/// Maps level `l` to `floor(l * g_count / 256)`.
#[inline]
pub fn factorize_level(level: u8, g_count: usize) -> u8 {
    (level as usize * g_count / 256) as u8
}

pub fn factorize_plane(plane: &GrayPlane, g_count: usize) -> Result<FactorizedPlane> {
    if !(2..=256).contains(&g_count) {
        return Err(Error::LevelCount(g_count));
    }
    let mut lut = [0u8; 256];
    for (level, slot) in lut.iter_mut().enumerate() {
        *slot = factorize_level(level as u8, g_count);
    }
    Ok(FactorizedPlane {
        width: plane.width,
        height: plane.height,
        g_count,
        levels: plane.levels.iter().map(|&l| lut[l as usize]).collect(),
    })
}

/// Splits an RGB raster into its R, G and B planes.
pub fn split_channels(image: &RgbImage) -> Result<[GrayPlane; 3]> {
    let (width, height) = image.dimensions();
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let n = width as usize * height as usize;
    let mut planes = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for px in image.pixels() {
        for (plane, &value) in planes.iter_mut().zip(px.0.iter()) {
            plane.push(value);
        }
    }
    let [r, g, b] = planes;
    Ok([
        GrayPlane::new(width, height, r)?,
        GrayPlane::new(width, height, g)?,
        GrayPlane::new(width, height, b)?,
    ])
}

/// Rec. 601 luma, rounded.
pub fn luma_plane(image: &RgbImage) -> Result<GrayPlane> {
    let (width, height) = image.dimensions();
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let levels = image
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
        })
        .collect();
    GrayPlane::new(width, height, levels)
}

/// Builds an RGB image with the plane copied into all three channels.
pub fn gray_to_rgb(plane: &GrayPlane) -> RgbImage {
    RgbImage::from_fn(plane.width, plane.height, |x, y| {
        let v = plane.get(x, y);
        image::Rgb([v, v, v])
    })
}

/// Loads a PNG or binary PGM/PPM file as 8-bit RGB.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|source| Error::ImageRead {
            path: path.to_path_buf(),
            source,
        })?;
    let rgb = img.to_rgb8();
    if rgb.width() == 0 || rgb.height() == 0 {
        return Err(Error::EmptyImage);
    }
    Ok(rgb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_single_pixel() {
        let img = RgbImage::from_pixel(1, 1, image::Rgb([10, 20, 30]));
        let [r, g, b] = split_channels(&img).unwrap();
        assert_eq!(r.levels(), &[10]);
        assert_eq!(g.levels(), &[20]);
        assert_eq!(b.levels(), &[30]);
    }

    #[test]
    fn split_gray_image_gives_identical_planes() {
        let img = RgbImage::from_fn(7, 5, |x, y| {
            let v = (x * 31 + y * 17) as u8;
            image::Rgb([v, v, v])
        });
        let [r, g, b] = split_channels(&img).unwrap();
        assert_eq!(r, g);
        assert_eq!(g, b);
        assert_eq!((r.width(), r.height()), (7, 5));
    }

    #[test]
    fn split_rejects_empty() {
        let img = RgbImage::new(0, 4);
        assert!(matches!(split_channels(&img), Err(Error::EmptyImage)));
    }

    #[test]
    fn factorize_buckets() {
        assert_eq!(factorize_level(255, 32), 31);
        assert_eq!(factorize_level(0, 16), 0);
        assert_eq!(factorize_level(127, 16), 7);
        assert_eq!(factorize_level(128, 16), 8);
        assert_eq!(factorize_level(255, 256), 255);
    }

    #[test]
    fn factorize_rejects_bad_counts() {
        let p = GrayPlane::filled(2, 2, 9).unwrap();
        assert!(matches!(factorize_plane(&p, 1), Err(Error::LevelCount(1))));
        assert!(matches!(factorize_plane(&p, 257), Err(Error::LevelCount(257))));
    }

    #[test]
    fn factorize_covers_every_bucket() {
        let p = GrayPlane::from_fn(256, 1, |x, _| x as u8).unwrap();
        for g in [2usize, 4, 8, 16, 32, 64, 128, 256] {
            let f = factorize_plane(&p, g).unwrap();
            let mut seen = vec![false; g];
            let mut prev = 0;
            for &v in f.levels() {
                assert!(v >= prev);
                prev = v;
                seen[v as usize] = true;
            }
            assert!(seen.iter().all(|&s| s), "g = {g}");
        }
    }

    #[test]
    fn raw_dump_layout() {
        let p = GrayPlane::from_fn(3, 2, |x, y| (10 * y + x) as u8).unwrap();
        let mut buf = Vec::new();
        p.write_raw(&mut buf).unwrap();
        assert_eq!(&buf[..8], &[3, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&buf[8..], &[0, 1, 2, 10, 11, 12]);
        assert_eq!(GrayPlane::read_raw(&buf[..]).unwrap(), p);
    }

    #[test]
    fn loads_pgm_and_png() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = dir.path().join("a.pgm");
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 50, 100, 150, 200, 250]);
        std::fs::write(&pgm, bytes).unwrap();
        let img = load_rgb(&pgm).unwrap();
        assert_eq!(img.dimensions(), (3, 2));
        assert_eq!(img.get_pixel(2, 1).0, [250, 250, 250]);

        let png = dir.path().join("b.png");
        RgbImage::from_pixel(4, 4, image::Rgb([1, 2, 3])).save(&png).unwrap();
        assert_eq!(load_rgb(&png).unwrap().get_pixel(3, 3).0, [1, 2, 3]);
    }
}
