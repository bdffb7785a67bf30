use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of a tracked object in one frame, if it was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub frame: usize,
    pub center: Option<(f64, f64)>,
}

impl TrackPoint {
    pub fn new(frame: usize, center: Option<(f64, f64)>) -> Self {
        Self { frame, center }
    }
}

/// Fills interior gaps linearly in the frame index and holds the nearest
/// present value across leading and trailing gaps.
pub fn interpolate_missing(track: &[TrackPoint]) -> Result<Vec<TrackPoint>> {
    if track.windows(2).any(|w| w[0].frame >= w[1].frame) {
        return Err(Error::Parameter("track frames must be strictly increasing".into()));
    }
    let present: Vec<usize> = (0..track.len()).filter(|&i| track[i].center.is_some()).collect();
    let (Some(&first), Some(&last)) = (present.first(), present.last()) else {
        return Err(Error::Parameter("track has no present points".into()));
    };
    let mut out = track.to_vec();
    for (i, slot) in out.iter_mut().enumerate() {
        if slot.center.is_some() {
            continue;
        }
        slot.center = if i < first {
            track[first].center
        } else if i > last {
            track[last].center
        } else {
            let after = present.partition_point(|&p| p < i);
            let (a, b) = (&track[present[after - 1]], &track[present[after]]);
            let (ca, cb) = (a.center.unwrap(), b.center.unwrap());
            let t = (slot.frame - a.frame) as f64 / (b.frame - a.frame) as f64;
            Some((ca.0 + t * (cb.0 - ca.0), ca.1 + t * (cb.1 - ca.1)))
        };
    }
    Ok(out)
}
