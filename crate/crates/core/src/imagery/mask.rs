use serde::{Deserialize, Serialize};

use super::geometry::{disc_offsets, Point};
use super::plane::GrayPlane;
use crate::error::{Error, Result};

/// Per-grid-point flag: `true` for points worth classifying.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformativeMask {
    flags: Vec<bool>,
}

impl InformativeMask {
    pub fn new(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    pub fn all(len: usize, value: bool) -> Self {
        Self {
            flags: vec![value; len],
        }
    }

    /// A point is informative when the block containing it changed.
    pub fn from_changes(points: &[Point], changes: &BlockChanges) -> Self {
        Self {
            flags: points.iter().map(|&p| changes.changed_at(p)).collect(),
        }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn informative_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiblackParams {
    pub window: u32,
    pub k: f64,
    pub edge_fraction_min: f64,
}

impl Default for NiblackParams {
    fn default() -> Self {
        Self {
            window: 15,
            k: -0.2,
            edge_fraction_min: 0.02,
        }
    }
}

/// Summed-area tables of levels and squared levels, with a zero border row/column.
struct Integral {
    stride: usize,
    sum: Vec<u64>,
    sq: Vec<u64>,
}

impl Integral {
    fn new(plane: &GrayPlane) -> Self {
        let (w, h) = (plane.width() as usize, plane.height() as usize);
        let stride = w + 1;
        let mut sum = vec![0u64; stride * (h + 1)];
        let mut sq = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0u64;
            let mut row_sq = 0u64;
            for x in 0..w {
                let v = plane.get(x as u32, y as u32) as u64;
                row_sum += v;
                row_sq += v * v;
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row_sum;
                sq[(y + 1) * stride + x + 1] = sq[y * stride + x + 1] + row_sq;
            }
        }
        Self { stride, sum, sq }
    }

    /// (count, sum, sum of squares) over `[x0, x1) x [y0, y1)`.
    fn window(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> (u64, u64, u64) {
        let s = self.stride;
        let at = |t: &[u64], x: usize, y: usize| t[y * s + x];
        let sum = at(&self.sum, x1, y1) + at(&self.sum, x0, y0) - at(&self.sum, x0, y1) - at(&self.sum, x1, y0);
        let sq = at(&self.sq, x1, y1) + at(&self.sq, x0, y0) - at(&self.sq, x0, y1) - at(&self.sq, x1, y0);
        (((x1 - x0) * (y1 - y0)) as u64, sum, sq)
    }
}

/// Niblack binarization of one pixel: `level > mean + k * stddev` over the
/// window centered on it (clipped at the image border).
///
/// Evaluated as `n·level − Σ > k·sqrt(n·Σ² − (Σ)²)`; both sides are exact
/// integers shifted identically by a constant offset, so the result does not
/// change when every level is raised by the same amount.
fn niblack_bit(plane: &GrayPlane, integral: &Integral, x: u32, y: u32, half: u32, k: f64) -> bool {
    let x0 = x.saturating_sub(half) as usize;
    let y0 = y.saturating_sub(half) as usize;
    let x1 = (x + half + 1).min(plane.width()) as usize;
    let y1 = (y + half + 1).min(plane.height()) as usize;
    let (n, sum, sq) = integral.window(x0, y0, x1, y1);
    let n = n as i128;
    let centered = n * plane.get(x, y) as i128 - sum as i128;
    let spread = n * sq as i128 - (sum as i128) * (sum as i128);
    centered as f64 > k * (spread.max(0) as f64).sqrt()
}

/// Binarizes each sample disc with Niblack thresholds and flags the grid
/// points whose fraction of 4-neighbour binary transitions inside the disc
/// reaches `edge_fraction_min`.
pub fn niblack_informative_mask(
    plane: &GrayPlane,
    points: &[Point],
    radius: u32,
    params: &NiblackParams,
) -> Result<InformativeMask> {
    if params.window < 3 || params.window.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "niblack window must be odd and at least 3, got {}",
            params.window
        )));
    }
    let integral = Integral::new(plane);
    let half = params.window / 2;
    let offsets = disc_offsets(radius);
    let side = 2 * radius as usize + 1;
    let r = radius as i32;
    let mut bits = vec![None::<bool>; side * side];

    let flags = points
        .iter()
        .map(|&c| {
            bits.iter_mut().for_each(|b| *b = None);
            let mut inside = 0usize;
            for &(u, v) in &offsets {
                let (x, y) = (c.x + u, c.y + v);
                if x < 0 || y < 0 || x as u32 >= plane.width() || y as u32 >= plane.height() {
                    continue;
                }
                inside += 1;
                let idx = (v + r) as usize * side + (u + r) as usize;
                bits[idx] = Some(niblack_bit(plane, &integral, x as u32, y as u32, half, params.k));
            }
            if inside == 0 {
                return false;
            }
            let lookup = |u: i32, v: i32| -> Option<bool> {
                if u < -r || u > r || v < -r || v > r {
                    None
                } else {
                    bits[(v + r) as usize * side + (u + r) as usize]
                }
            };
            let mut edges = 0usize;
            for &(u, v) in &offsets {
                let Some(b) = lookup(u, v) else { continue };
                let transition = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(du, dv)| lookup(u + du, v + dv).is_some_and(|n| n != b));
                if transition {
                    edges += 1;
                }
            }
            edges as f64 / inside as f64 >= params.edge_fraction_min
        })
        .collect();
    Ok(InformativeMask::new(flags))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeParams {
    pub block: u32,
    pub ncc_min: f64,
    pub mad_min: f64,
}

impl Default for ChangeParams {
    fn default() -> Self {
        Self {
            block: 16,
            ncc_min: 0.8,
            mad_min: 10.0,
        }
    }
}

/// Changed/unchanged flags for square blocks tiling a frame; edge blocks may
/// be partial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockChanges {
    pub block: u32,
    pub cols: u32,
    pub rows: u32,
    pub changed: Vec<bool>,
}

impl BlockChanges {
    pub fn is_changed(&self, col: u32, row: u32) -> bool {
        self.changed[(row * self.cols + col) as usize]
    }

    pub fn changed_at(&self, p: Point) -> bool {
        if p.x < 0 || p.y < 0 {
            return false;
        }
        let (col, row) = (p.x as u32 / self.block, p.y as u32 / self.block);
        col < self.cols && row < self.rows && self.is_changed(col, row)
    }

    pub fn changed_count(&self) -> usize {
        self.changed.iter().filter(|&&c| c).count()
    }
}

/// Compares an aligned frame against a reference block by block.
///
/// A block is changed when the normalized cross-correlation is below
/// `ncc_min`; when either block is flat the correlation is undefined and the
/// mean absolute difference is tested against `mad_min` instead.
pub fn frame_change_mask(frame: &GrayPlane, reference: &GrayPlane, params: &ChangeParams) -> Result<BlockChanges> {
    if frame.width() != reference.width() || frame.height() != reference.height() {
        return Err(Error::DimensionMismatch(
            frame.width(),
            frame.height(),
            reference.width(),
            reference.height(),
        ));
    }
    if params.block == 0 {
        return Err(Error::Parameter("block size must be positive".into()));
    }
    let b = params.block;
    let cols = frame.width().div_ceil(b);
    let rows = frame.height().div_ceil(b);
    let mut changed = Vec::with_capacity((cols * rows) as usize);
    for row in 0..rows {
        for col in 0..cols {
            let xs = col * b..((col + 1) * b).min(frame.width());
            let ys = row * b..((row + 1) * b).min(frame.height());
            let mut n = 0f64;
            let (mut sa, mut sb, mut saa, mut sbb, mut sab, mut sad) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
            for y in ys {
                for x in xs.clone() {
                    let a = frame.get(x, y) as f64;
                    let r = reference.get(x, y) as f64;
                    n += 1.0;
                    sa += a;
                    sb += r;
                    saa += a * a;
                    sbb += r * r;
                    sab += a * r;
                    sad += (a - r).abs();
                }
            }
            let var_a = saa - sa * sa / n;
            let var_b = sbb - sb * sb / n;
            let flat = var_a <= 1e-9 * n || var_b <= 1e-9 * n;
            let is_changed = if flat {
                sad / n > params.mad_min
            } else {
                let ncc = (sab - sa * sb / n) / (var_a * var_b).sqrt();
                ncc < params.ncc_min
            };
            changed.push(is_changed);
        }
    }
    Ok(BlockChanges {
        block: b,
        cols,
        rows,
        changed,
    })
}
