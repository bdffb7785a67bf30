use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

impl From<(i32, i32)> for Point {
    fn from((x, y): (i32, i32)) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned rectangle; contains `x <= px < x + width` and likewise for y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x
            && p.y >= self.y
            && (p.x as i64) < self.x as i64 + self.width as i64
            && (p.y as i64) < self.y as i64 + self.height as i64
    }
}

/// Lattice of sample centers with the same horizontal and vertical step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub step: u32,
}

impl GridSpec {
    pub fn new(step: u32) -> Result<Self> {
        if step == 0 {
            return Err(Error::Geometry("grid step must be at least 1".into()));
        }
        Ok(Self { step })
    }
}

/// A circular sample split into `radius / ring_width` concentric rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleGeometry {
    pub center: Point,
    pub radius: u32,
    pub ring_width: u32,
}

impl SampleGeometry {
    pub fn new(center: Point, radius: u32, ring_width: u32) -> Result<Self> {
        if radius == 0 || ring_width == 0 {
            return Err(Error::Geometry("radius and ring width must be positive".into()));
        }
        if !radius.is_multiple_of(ring_width) {
            return Err(Error::Geometry(format!(
                "ring width {ring_width} does not divide radius {radius}"
            )));
        }
        Ok(Self {
            center,
            radius,
            ring_width,
        })
    }

    pub fn ring_count(&self) -> usize {
        (self.radius / self.ring_width) as usize
    }

    /// 1-based ring index of an offset from the center; the center is in ring 1.
    #[inline]
    pub fn ring_of(&self, du: i32, dv: i32) -> usize {
        ring_index(du, dv, self.ring_width)
    }
}

/// Smallest `n >= 1` with `du² + dv² <= (n·w)²`.
#[inline]
pub(crate) fn ring_index(du: i32, dv: i32, ring_width: u32) -> usize {
    let d2 = du as i64 * du as i64 + dv as i64 * dv as i64;
    let w = ring_width as i64;
    let mut n = ((d2 as f64).sqrt() / w as f64).ceil().max(1.0) as i64;
    // correct the float estimate against the exact integer test
    while n > 1 && d2 <= (n - 1) * (n - 1) * w * w {
        n -= 1;
    }
    while d2 > n * n * w * w {
        n += 1;
    }
    n as usize
}

/// Grid points whose full radius-`radius` disc fits inside the image, row-major.
pub fn make_grid(width: u32, height: u32, grid: GridSpec, radius: u32) -> Vec<Point> {
    let axis = |extent: u32| -> Vec<i32> {
        let r = radius as i64;
        let last = extent as i64 - 1 - r;
        let mut out = Vec::new();
        let mut v = r;
        while v <= last {
            out.push(v as i32);
            v += grid.step.max(1) as i64;
        }
        out
    };
    let xs = axis(width);
    let ys = axis(height);
    let mut points = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            points.push(Point::new(x, y));
        }
    }
    points
}

/// Offsets `(u, v)` with `u² + v² <= radius²`, row-major.
pub fn disc_offsets(radius: u32) -> Vec<(i32, i32)> {
    let r = radius as i32;
    let r2 = radius as i64 * radius as i64;
    let mut out = Vec::new();
    for v in -r..=r {
        for u in -r..=r {
            if (u as i64 * u as i64 + v as i64 * v as i64) <= r2 {
                out.push((u, v));
            }
        }
    }
    out
}

/// All integer pixels within Euclidean distance `radius` of `center`.
pub fn disc_pixels(center: Point, radius: u32) -> PixelSet {
    PixelSet::from_points(
        disc_offsets(radius)
            .into_iter()
            .map(|(u, v)| Point::new(center.x + u, center.y + v)),
    )
}

pub fn disc_inside(center: Point, radius: u32, width: u32, height: u32) -> bool {
    let r = radius as i64;
    let (x, y) = (center.x as i64, center.y as i64);
    x - r >= 0 && y - r >= 0 && x + r < width as i64 && y + r < height as i64
}

pub fn check_disc_inside(center: Point, radius: u32, width: u32, height: u32) -> Result<()> {
    if disc_inside(center, radius, width, height) {
        Ok(())
    } else {
        Err(Error::OutOfBounds {
            x: center.x,
            y: center.y,
            radius,
            width,
            height,
        })
    }
}

/// A set of pixel coordinates with O(1) membership through a bounding-box bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelSet {
    points: Vec<Point>,
    origin: Point,
    box_width: usize,
    box_height: usize,
    member: Vec<bool>,
}

impl PixelSet {
    /// Duplicates are dropped; first occurrence order is kept.
    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        let raw: Vec<Point> = points.into_iter().collect();
        if raw.is_empty() {
            return Self {
                points: raw,
                origin: Point::new(0, 0),
                box_width: 0,
                box_height: 0,
                member: Vec::new(),
            };
        }
        let min_x = raw.iter().map(|p| p.x).min().unwrap();
        let min_y = raw.iter().map(|p| p.y).min().unwrap();
        let max_x = raw.iter().map(|p| p.x).max().unwrap();
        let max_y = raw.iter().map(|p| p.y).max().unwrap();
        let box_width = (max_x - min_x + 1) as usize;
        let box_height = (max_y - min_y + 1) as usize;
        let mut member = vec![false; box_width * box_height];
        let mut points = Vec::with_capacity(raw.len());
        for p in raw {
            let idx = (p.y - min_y) as usize * box_width + (p.x - min_x) as usize;
            if !member[idx] {
                member[idx] = true;
                points.push(p);
            }
        }
        Self {
            points,
            origin: Point::new(min_x, min_y),
            box_width,
            box_height,
            member,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let dx = p.x as i64 - self.origin.x as i64;
        let dy = p.y as i64 - self.origin.y as i64;
        if dx < 0 || dy < 0 || dx >= self.box_width as i64 || dy >= self.box_height as i64 {
            return false;
        }
        self.member[dy as usize * self.box_width + dx as usize]
    }

    /// True when every pixel lies inside a `width` x `height` raster.
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.is_empty()
            || (self.origin.x >= 0
                && self.origin.y >= 0
                && self.origin.x as usize + self.box_width <= width as usize
                && self.origin.y as usize + self.box_height <= height as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumeration() {
        let g = GridSpec::new(25).unwrap();
        let pts = make_grid(100, 100, g, 10);
        assert_eq!(pts.len(), 16);
        let xs: Vec<i32> = pts.iter().take(4).map(|p| p.x).collect();
        assert_eq!(xs, vec![10, 35, 60, 85]);
        assert_eq!(pts[4], Point::new(10, 35));
    }

    #[test]
    fn grid_infeasible_and_single() {
        assert!(make_grid(20, 20, GridSpec::new(5).unwrap(), 10).is_empty());
        assert_eq!(
            make_grid(100, 100, GridSpec::new(1000).unwrap(), 10),
            vec![Point::new(10, 10)]
        );
    }

    #[test]
    fn grid_step_zero_rejected() {
        assert!(GridSpec::new(0).is_err());
    }

    #[test]
    fn disc_sizes() {
        assert_eq!(disc_pixels(Point::new(4, 4), 0).points(), &[Point::new(4, 4)]);
        assert_eq!(disc_pixels(Point::new(0, 0), 1).len(), 5);
        assert_eq!(disc_pixels(Point::new(3, -2), 2).len(), 13);
    }

    #[test]
    fn ring_assignment() {
        let g = SampleGeometry::new(Point::new(0, 0), 2, 1).unwrap();
        assert_eq!(g.ring_of(0, 0), 1);
        assert_eq!(g.ring_of(1, 0), 1);
        assert_eq!(g.ring_of(1, 1), 2);
        assert_eq!(g.ring_of(0, 2), 2);
        assert!(SampleGeometry::new(Point::new(0, 0), 10, 3).is_err());
    }

    #[test]
    fn pixel_set_membership() {
        let s = PixelSet::from_points([Point::new(2, 3), Point::new(4, 3), Point::new(2, 3)]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(Point::new(4, 3)));
        assert!(!s.contains(Point::new(3, 3)));
        assert!(!s.contains(Point::new(-1, 0)));
        assert!(s.fits(5, 4));
        assert!(!s.fits(4, 4));
    }

    #[test]
    fn rect_contains_is_half_open() {
        let r = Rect {
            x: 0,
            y: 0,
            width: 10,
            height: 5,
        };
        assert!(r.contains(Point::new(9, 4)));
        assert!(!r.contains(Point::new(10, 4)));
        assert!(!r.contains(Point::new(0, 5)));
    }
}
