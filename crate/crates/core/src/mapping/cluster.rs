use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::Point;

pub const MAX_KMEANS_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster centers in ascending x (then y) order.
    pub centers: Vec<(f64, f64)>,
    /// Index into `centers` for every input point.
    pub assignment: Vec<usize>,
    pub iterations: usize,
}

fn dist2(p: Point, c: (f64, f64)) -> f64 {
    (p.x as f64 - c.0).powi(2) + (p.y as f64 - c.1).powi(2)
}

fn nearest(p: Point, centers: &[(f64, f64)]) -> usize {
    let mut best = 0;
    let mut best_d = dist2(p, centers[0]);
    for (i, &c) in centers.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// k-means over pixel positions: the first center is a seeded random point,
/// each further one the point farthest from the centers chosen so far.
/// Lloyd iterations run until the assignment stops changing, at most
/// [`MAX_KMEANS_ITERATIONS`] times. An emptied cluster keeps its center.
pub fn cluster_points(points: &[Point], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::Parameter(format!("k = {k} exceeds {} points", points.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let as_center = |p: Point| (p.x as f64, p.y as f64);
    let mut min_d: Vec<f64> = points.iter().map(|&p| dist2(p, as_center(points[chosen[0]]))).collect();
    while chosen.len() < k {
        let mut best = usize::MAX;
        for i in 0..points.len() {
            if chosen.contains(&i) {
                continue;
            }
            if best == usize::MAX || min_d[i] > min_d[best] {
                best = i;
            }
        }
        chosen.push(best);
        let c = as_center(points[best]);
        for (d, &p) in min_d.iter_mut().zip(points) {
            *d = d.min(dist2(p, c));
        }
    }
    let mut centers: Vec<(f64, f64)> = chosen.iter().map(|&i| as_center(points[i])).collect();
    let mut assignment: Vec<usize> = vec![usize::MAX; points.len()];
    let mut iterations = 0;
    while iterations < MAX_KMEANS_ITERATIONS {
        let next: Vec<usize> = points.iter().map(|&p| nearest(p, &centers)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
        iterations += 1;
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (&p, &a) in points.iter().zip(&assignment) {
            sums[a].0 += p.x as f64;
            sums[a].1 += p.y as f64;
            sums[a].2 += 1;
        }
        for (c, &(sx, sy, n)) in centers.iter_mut().zip(&sums) {
            if n > 0 {
                *c = (sx / n as f64, sy / n as f64);
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centers[a].partial_cmp(&centers[b]).expect("finite centers"));
    let mut rank = vec![0; k];
    for (r, &o) in order.iter().enumerate() {
        rank[o] = r;
    }
    Ok(Clustering {
        centers: order.iter().map(|&o| centers[o]).collect(),
        assignment: assignment.iter().map(|&a| rank[a]).collect(),
        iterations,
    })
}
