use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::{check_disc_inside, disc_offsets, FactorizedPlane, GrayPlane, PixelSet, Point, SampleGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Glcm,
    Ogcm,
    Glrcm,
}

/// Counted 2D histogram; the sum of all cells always equals `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoocMatrix {
    kind: MatrixKind,
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    total: u64,
}

impl CoocMatrix {
    pub fn zeros(kind: MatrixKind, rows: usize, cols: usize) -> Self {
        Self {
            kind,
            rows,
            cols,
            counts: vec![0; rows * cols],
            total: 0,
        }
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    #[inline]
    pub fn increment(&mut self, row: usize, col: usize) {
        self.counts[row * self.cols + col] += 1;
        self.total += 1;
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.counts[row * self.cols..(row + 1) * self.cols].iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.kind, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.counts[c * self.rows + r] = self.get(r, c);
            }
        }
        t.total = self.total;
        t
    }

    /// Cells divided by the matrix total, row-major.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(Error::EmptyMatrix);
        }
        let t = self.total as f64;
        Ok(self.counts.iter().map(|&c| c as f64 / t).collect())
    }

    /// Cells divided by their row sum; empty rows stay zero.
    pub fn row_normalized(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.counts.len());
        for r in 0..self.rows {
            let s = self.row_sum(r);
            for c in 0..self.cols {
                out.push(if s == 0 { 0.0 } else { self.get(r, c) as f64 / s as f64 });
            }
        }
        out
    }
}

/// Default GLCM neighbour offsets: E, S, SE and NE at distance 1.
pub const DEFAULT_GLCM_OFFSETS: [(i32, i32); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

fn check_fits(pixels: &PixelSet, width: u32, height: u32) -> Result<()> {
    if pixels.is_empty() {
        return Err(Error::EmptyPixelSet);
    }
    if !pixels.fits(width, height) {
        return Err(Error::Geometry("pixel set extends beyond the plane".into()));
    }
    Ok(())
}

/// Gray level co-occurrence matrix over a pixel set.
///
/// Only pairs whose shifted partner is also in the set contribute; all
/// offsets accumulate into one `G x G` matrix.
pub fn build_glcm(
    plane: &FactorizedPlane,
    pixels: &PixelSet,
    offsets: &[(i32, i32)],
    symmetric: bool,
) -> Result<CoocMatrix> {
    check_fits(pixels, plane.width(), plane.height())?;
    let g = plane.g_count();
    let mut m = CoocMatrix::zeros(MatrixKind::Glcm, g, g);
    for &p in pixels.points() {
        let a = plane.get(p.x as u32, p.y as u32) as usize;
        for &(dx, dy) in offsets {
            let q = Point::new(p.x + dx, p.y + dy);
            if !pixels.contains(q) {
                continue;
            }
            let b = plane.get(q.x as u32, q.y as u32) as usize;
            m.increment(a, b);
            if symmetric {
                m.increment(b, a);
            }
        }
    }
    Ok(m)
}

/// Which orthogonal gradient pairs feed the OGCM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OgcmPairs {
    /// (south-north, east-west)
    Axial,
    /// (south-north, east-west) and (north-west, north-east)
    AxialAndDiagonal,
}

impl OgcmPairs {
    pub fn count(self) -> usize {
        match self {
            OgcmPairs::Axial => 1,
            OgcmPairs::AxialAndDiagonal => 2,
        }
    }

    fn neighbours(self) -> &'static [(i32, i32)] {
        const AXIAL: [(i32, i32); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];
        const ALL: [(i32, i32); 8] = [(0, -1), (0, 1), (-1, 0), (1, 0), (-1, -1), (1, -1), (-1, 1), (1, 1)];
        match self {
            OgcmPairs::Axial => &AXIAL,
            OgcmPairs::AxialAndDiagonal => &ALL,
        }
    }
}

#[inline]
pub(crate) fn gradient_bin(magnitude: f64, bins: usize) -> usize {
    ((magnitude * bins as f64 / 256.0).floor() as usize).min(bins - 1)
}

/// Pixels of the set whose gradient neighbours are all in the set too.
pub fn ogcm_interior(pixels: &PixelSet, pairs: OgcmPairs) -> Vec<Point> {
    pixels
        .points()
        .iter()
        .copied()
        .filter(|p| {
            pairs
                .neighbours()
                .iter()
                .all(|&(dx, dy)| pixels.contains(Point::new(p.x + dx, p.y + dy)))
        })
        .collect()
}

/// Orthogonal gradient co-occurrence matrix.
///
/// For every interior pixel and every configured pair, the central
/// differences `g1` (first direction) and `g2` (orthogonal direction) are
/// binned as `min(B-1, floor(|g| * B / 256))` and cell `(bin|g1|, bin|g2|)`
/// is incremented. Diagonal differences are divided by sqrt(2) first.
pub fn build_ogcm(plane: &GrayPlane, pixels: &PixelSet, pairs: OgcmPairs, bins: usize) -> Result<CoocMatrix> {
    if bins == 0 {
        return Err(Error::Parameter("OGCM needs at least one bin".into()));
    }
    check_fits(pixels, plane.width(), plane.height())?;
    let interior = ogcm_interior(pixels, pairs);
    if interior.is_empty() {
        return Err(Error::EmptyPixelSet);
    }
    let mut m = CoocMatrix::zeros(MatrixKind::Ogcm, bins, bins);
    let at = |x: i32, y: i32| plane.get(x as u32, y as u32) as i32;
    for p in interior {
        let (x, y) = (p.x, p.y);
        let sn = (at(x, y + 1) - at(x, y - 1)).abs();
        let ew = (at(x + 1, y) - at(x - 1, y)).abs();
        m.increment(gradient_bin(sn as f64, bins), gradient_bin(ew as f64, bins));
        if pairs == OgcmPairs::AxialAndDiagonal {
            let nw = (at(x + 1, y + 1) - at(x - 1, y - 1)).abs() as f64 / SQRT_2;
            let ne = (at(x - 1, y + 1) - at(x + 1, y - 1)).abs() as f64 / SQRT_2;
            m.increment(gradient_bin(nw, bins), gradient_bin(ne, bins));
        }
    }
    Ok(m)
}

/// Gray level / radius co-occurrence matrix: row `n` is the factorized
/// histogram of ring `n + 1` of the sample.
pub fn build_glrcm(plane: &FactorizedPlane, geometry: &SampleGeometry) -> Result<CoocMatrix> {
    let geometry = SampleGeometry::new(geometry.center, geometry.radius, geometry.ring_width)?;
    check_disc_inside(geometry.center, geometry.radius, plane.width(), plane.height())?;
    let rings = geometry.ring_count();
    let mut m = CoocMatrix::zeros(MatrixKind::Glrcm, rings, plane.g_count());
    let c = geometry.center;
    for (u, v) in disc_offsets(geometry.radius) {
        let level = plane.get((c.x + u) as u32, (c.y + v) as u32) as usize;
        m.increment(geometry.ring_of(u, v) - 1, level);
    }
    Ok(m)
}

/// Haralick-style summary statistics of a normalized matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaralickStats {
    pub contrast: f64,
    pub homogeneity: f64,
    /// Natural-log entropy.
    pub entropy: f64,
    pub uniformity: f64,
}

impl HaralickStats {
    pub fn to_array(self) -> [f64; 4] {
        [self.contrast, self.homogeneity, self.entropy, self.uniformity]
    }
}

pub fn haralick_stats(matrix: &CoocMatrix) -> Result<HaralickStats> {
    let p = matrix.normalized()?;
    let mut s = HaralickStats {
        contrast: 0.0,
        homogeneity: 0.0,
        entropy: 0.0,
        uniformity: 0.0,
    };
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let v = p[i * matrix.cols() + j];
            if v == 0.0 {
                continue;
            }
            let d = (i as f64 - j as f64).abs();
            s.contrast += d * d * v;
            s.homogeneity += v / (1.0 + d);
            s.entropy -= v * v.ln();
            s.uniformity += v * v;
        }
    }
    Ok(s)
}
