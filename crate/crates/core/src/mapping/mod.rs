//! Image mapping: classify every grid point with a model bundle, filter the
//! result by a plausibility limiter, and reason over maps with alert rules,
//! clustering and track interpolation.

mod alert;
mod cluster;
mod gridmap;
mod track;

pub use alert::{evaluate_rule, load_rules, AlertEvent, AlertKind, AlertRule, Measure, RuleEvaluator};
pub use cluster::{cluster_points, Clustering, MAX_KMEANS_ITERATIONS};
pub use gridmap::{
    count_class_points, filter_points, map_frame, map_image, render_overlay, GridMap, MapEntry, MapRecord, Palette,
};
pub use track::{interpolate_missing, TrackPoint};
