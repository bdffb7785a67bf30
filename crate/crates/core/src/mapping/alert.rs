use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cluster::cluster_points;
use super::gridmap::{count_class_points, filter_points, GridMap};
use crate::error::{Error, Result};
use crate::imagery::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertKind {
    Presence,
    Absence,
    Count,
    ClusterShift,
}

fn one() -> usize {
    1
}

/// Declarative rule over the maps of an image or frame sequence.
///
/// Presence holds on a frame when at least `min_count` points of `class`
/// pass the limiter inside `region`; absence is its negation. Either fires
/// once the predicate has held for `persistence` consecutive frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRule {
    pub id: String,
    pub kind: AlertKind,
    pub class: String,
    #[serde(default)]
    pub limiter: f64,
    #[serde(default = "one")]
    pub min_count: usize,
    #[serde(default)]
    pub region: Option<Rect>,
    #[serde(default = "one")]
    pub persistence: usize,
}

impl AlertRule {
    pub fn new(id: impl Into<String>, kind: AlertKind, class: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind,
            class: class.into(),
            limiter: 0.0,
            min_count: 1,
            region: None,
            persistence: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.limiter) {
            return Err(Error::Parameter(format!("rule {}: limiter outside [0, 1]", self.id)));
        }
        if self.min_count == 0 || self.persistence == 0 {
            return Err(Error::Parameter(format!(
                "rule {}: min_count and persistence must be at least 1",
                self.id
            )));
        }
        Ok(())
    }
}

/// Reads a JSON array of rules.
pub fn load_rules(path: impl AsRef<Path>) -> Result<Vec<AlertRule>> {
    let rules: Vec<AlertRule> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    rules.iter().try_for_each(AlertRule::validate)?;
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Count(usize),
    /// Displacement of each of the two cluster centers since the previous frame.
    Shift([(f64, f64); 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertEvent {
    pub rule: String,
    pub frame: usize,
    pub image_id: String,
    pub value: Measure,
    pub message: String,
}

/// Incremental evaluation of one rule over a frame stream.
#[derive(Debug, Clone)]
pub struct RuleEvaluator {
    rule: AlertRule,
    frame: usize,
    run: usize,
    classes: Option<Vec<String>>,
    previous_centers: Option<[(f64, f64); 2]>,
}

impl RuleEvaluator {
    pub fn new(rule: AlertRule) -> Result<Self> {
        rule.validate()?;
        Ok(Self {
            rule,
            frame: 0,
            run: 0,
            classes: None,
            previous_centers: None,
        })
    }

    pub fn rule(&self) -> &AlertRule {
        &self.rule
    }

    /// Feeds the next frame's map; returns the event it triggers, if any.
    pub fn push(&mut self, map: &GridMap) -> Result<Option<AlertEvent>> {
        match &self.classes {
            Some(classes) if *classes != map.classes => {
                return Err(Error::Parameter("maps in one sequence must share classes".into()));
            }
            Some(_) => {}
            None => self.classes = Some(map.classes.clone()),
        }
        let frame = self.frame;
        self.frame += 1;
        let rule = &self.rule;
        let count = count_class_points(map, &rule.class, rule.limiter, rule.region)?;
        let event = |value: Measure, message: String| AlertEvent {
            rule: rule.id.clone(),
            frame,
            image_id: map.image_id.clone(),
            value,
            message,
        };
        Ok(match rule.kind {
            AlertKind::Presence | AlertKind::Absence => {
                let present = count >= rule.min_count;
                let holds = present == (rule.kind == AlertKind::Presence);
                self.run = if holds { self.run + 1 } else { 0 };
                (self.run >= rule.persistence).then(|| {
                    let what = if present { "present" } else { "absent" };
                    event(
                        Measure::Count(count),
                        format!("{}: {} {what} ({count} points) in frame {frame}", rule.id, rule.class),
                    )
                })
            }
            AlertKind::Count => Some(event(
                Measure::Count(count),
                format!("{}: {count} {} points in frame {frame}", rule.id, rule.class),
            )),
            AlertKind::ClusterShift => {
                let points: Vec<_> = filter_points(map, &rule.class, rule.limiter)?
                    .into_iter()
                    .filter(|&p| rule.region.is_none_or(|r| r.contains(p)))
                    .collect();
                let centers = if points.len() >= 2 && count >= rule.min_count {
                    let c = cluster_points(&points, 2, 0)?;
                    Some([c.centers[0], c.centers[1]])
                } else {
                    None
                };
                let previous = std::mem::replace(&mut self.previous_centers, centers);
                match (previous, centers) {
                    (Some(p), Some(c)) => {
                        let shift = [(c[0].0 - p[0].0, c[0].1 - p[0].1), (c[1].0 - p[1].0, c[1].1 - p[1].1)];
                        Some(event(
                            Measure::Shift(shift),
                            format!(
                                "{}: {} clusters moved by ({:.1}, {:.1}) and ({:.1}, {:.1}) in frame {frame}",
                                rule.id, rule.class, shift[0].0, shift[0].1, shift[1].0, shift[1].1
                            ),
                        ))
                    }
                    _ => None,
                }
            }
        })
    }
}

/// Evaluates `rule` over `maps` in order; frame indices are positions in `maps`.
pub fn evaluate_rule(maps: &[GridMap], rule: &AlertRule) -> Result<Vec<AlertEvent>> {
    let mut evaluator = RuleEvaluator::new(rule.clone())?;
    let mut events = Vec::new();
    for map in maps {
        events.extend(evaluator.push(map)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::{GridSpec, Point};
    use crate::mapping::MapEntry;

    /// A map with `n_hit` points of class "x" at probability 0.9 and the rest "y".
    fn map_with(n_hit: usize, total: usize) -> GridMap {
        GridMap {
            image_id: format!("f{n_hit}"),
            grid: GridSpec { step: 5 },
            radius: 2,
            classes: vec!["x".into(), "y".into()],
            entries: (0..total)
                .map(|i| {
                    let hit = i < n_hit;
                    MapEntry {
                        point: Point::new(5 * i as i32, 0),
                        informative: true,
                        class: Some(usize::from(!hit)),
                        probabilities: if hit { vec![0.9, 0.1] } else { vec![0.2, 0.8] },
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn presence_fires_from_appearance() {
        let maps: Vec<_> = (0..10).map(|f| map_with(if f >= 7 { 3 } else { 0 }, 6)).collect();
        let rule = AlertRule::new("p", AlertKind::Presence, "x");
        let frames: Vec<usize> = evaluate_rule(&maps, &rule).unwrap().iter().map(|e| e.frame).collect();
        assert_eq!(frames, vec![7, 8, 9]);
        let rule = AlertRule::new("a", AlertKind::Absence, "x");
        let frames: Vec<usize> = evaluate_rule(&maps, &rule).unwrap().iter().map(|e| e.frame).collect();
        assert_eq!(frames, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn absence_with_persistence() {
        let maps: Vec<_> = (0..6).map(|_| map_with(0, 4)).collect();
        let mut rule = AlertRule::new("a", AlertKind::Absence, "x");
        rule.persistence = 3;
        let frames: Vec<usize> = evaluate_rule(&maps, &rule).unwrap().iter().map(|e| e.frame).collect();
        assert_eq!(frames, vec![2, 3, 4, 5]);
    }

    #[test]
    fn count_on_single_map() {
        let rule = AlertRule::new("c", AlertKind::Count, "x");
        let events = evaluate_rule(&[map_with(2, 5)], &rule).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].value, Measure::Count(2));
    }

    #[test]
    fn cluster_shift_tracks_both_centers() {
        let mut a = map_with(0, 0);
        let mut b = map_with(0, 0);
        for (m, dx) in [(&mut a, 0), (&mut b, 3)] {
            for p in [(10, 10), (12, 10), (100, 40), (102, 40)] {
                m.entries.push(MapEntry {
                    point: Point::new(p.0 + dx, p.1),
                    informative: true,
                    class: Some(0),
                    probabilities: vec![1.0, 0.0],
                });
            }
        }
        let rule = AlertRule::new("s", AlertKind::ClusterShift, "x");
        let events = evaluate_rule(&[a, b], &rule).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].value, Measure::Shift([(3.0, 0.0), (3.0, 0.0)]));
    }

    #[test]
    fn unknown_class_and_bad_rules() {
        let rule = AlertRule::new("u", AlertKind::Presence, "nope");
        assert!(evaluate_rule(&[map_with(1, 2)], &rule).is_err());
        let mut rule = AlertRule::new("u", AlertKind::Presence, "x");
        rule.min_count = 0;
        assert!(evaluate_rule(&[map_with(1, 2)], &rule).is_err());
    }

    #[test]
    fn rules_parse_with_defaults() {
        let text = r#"[{"id":"door","kind":"presence","class":"person","limiter":0.3,
            "region":{"x":0,"y":0,"width":50,"height":50}},
            {"id":"gaze","kind":"cluster_shift","class":"pupil"}]"#;
        let rules: Vec<AlertRule> = serde_json::from_str(text).unwrap();
        assert_eq!(rules[0].min_count, 1);
        assert_eq!(rules[0].persistence, 1);
        assert_eq!(rules[1].kind, AlertKind::ClusterShift);
        assert_eq!(rules[1].limiter, 0.0);
    }
}
