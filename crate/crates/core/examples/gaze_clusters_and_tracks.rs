//! Two-cluster k-means over detected points and gap filling of a center
//! track, as for the two eyes of a face across video frames.

use gridsense::imagery::Point;
use gridsense::mapping::{cluster_points, interpolate_missing, TrackPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gridsense::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut track = Vec::new();
    for frame in 0..12usize {
        let shift = frame as f64 * 3.0;
        let blinking = (5..=7).contains(&frame);
        let mut points = Vec::new();
        if !blinking {
            for eye in [(60.0, 80.0), (120.0, 82.0)] {
                for _ in 0..8 {
                    points.push(Point::new(
                        (eye.0 + shift + rng.gen_range(-4.0..4.0)) as i32,
                        (eye.1 + rng.gen_range(-4.0..4.0)) as i32,
                    ));
                }
            }
        }
        let center = if points.len() >= 2 {
            let clusters = cluster_points(&points, 2, 0)?;
            let [left, right] = [clusters.centers[0], clusters.centers[1]];
            println!(
                "frame {frame:2}: eyes at ({:.1}, {:.1}) and ({:.1}, {:.1}) after {} iterations",
                left.0, left.1, right.0, right.1, clusters.iterations
            );
            Some(((left.0 + right.0) / 2.0, (left.1 + right.1) / 2.0))
        } else {
            println!("frame {frame:2}: no detections");
            None
        };
        track.push(TrackPoint::new(frame, center));
    }
    for p in interpolate_missing(&track)? {
        let (x, y) = p.center.expect("filled track");
        println!("frame {:2}: midpoint ({x:.1}, {y:.1})", p.frame);
    }
    Ok(())
}
