//! Verbal value, hue and saturation feedback for matched cluster pairs.

use serde::{Deserialize, Serialize};

use super::score::SimilarityBreakdown;
use crate::error::{Error, Result};
use crate::imagecore::color::{lab_to_hsv, wrap_degrees};
use crate::palette::{ClusterMode, DominantCluster};

pub const WARM_POLE_DEG: f64 = 30.0;
pub const COOL_POLE_DEG: f64 = 210.0;

/// Dead zones inside which a difference counts as a match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// L\* units.
    pub value: f64,
    /// Degrees of hue.
    pub hue: f64,
    /// Saturation percentage points.
    pub saturation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            value: 3.0,
            hue: 3.0,
            saturation: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HueCategory {
    Red,
    Yellow,
    Green,
    Cyan,
    Blue,
    Magenta,
}

impl HueCategory {
    pub const ALL: [HueCategory; 6] = [
        HueCategory::Red,
        HueCategory::Yellow,
        HueCategory::Green,
        HueCategory::Cyan,
        HueCategory::Blue,
        HueCategory::Magenta,
    ];

    /// 60° sector whose center is nearest; sectors are `[center − 30, center + 30)`.
    pub fn of_hue(h: f64) -> HueCategory {
        let sector = (wrap_degrees(h + 30.0) / 60.0).floor() as usize;
        Self::ALL[sector.min(5)]
    }

    pub fn center(self) -> f64 {
        match self {
            HueCategory::Red => 0.0,
            HueCategory::Yellow => 60.0,
            HueCategory::Green => 120.0,
            HueCategory::Cyan => 180.0,
            HueCategory::Blue => 240.0,
            HueCategory::Magenta => 300.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HueCategory::Red => "red",
            HueCategory::Yellow => "yellow",
            HueCategory::Green => "green",
            HueCategory::Cyan => "cyan",
            HueCategory::Blue => "blue",
            HueCategory::Magenta => "magenta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackDimension {
    Value,
    Hue,
    Saturation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lighten,
    Darken,
    Warmer,
    Cooler,
    TowardCategory(HueCategory),
    LessVibrant,
    MoreVibrant,
    Match,
}

/// `magnitude` is the absolute difference in the dimension's units (L\*,
/// degrees, or saturation points); it is within tolerance iff `direction`
/// is `Match`. The text shows it rounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackMessage {
    pub dimension: FeedbackDimension,
    pub direction: Direction,
    pub magnitude: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    #[serde(rename = "canvas")]
    pub canvas_cluster: DominantCluster,
    #[serde(rename = "reference")]
    pub reference_cluster: DominantCluster,
    pub score: SimilarityBreakdown,
    pub feedback: Vec<FeedbackMessage>,
}

pub fn render_value_feedback(pair: &MatchPair, tol: &Tolerances) -> Result<FeedbackMessage> {
    if pair.canvas_cluster.mode != ClusterMode::Value || pair.reference_cluster.mode != ClusterMode::Value {
        return Err(Error::ModeMismatch);
    }
    Ok(value_message(
        pair.canvas_cluster.center_lab.l,
        pair.reference_cluster.center_lab.l,
        tol,
    ))
}

pub fn value_message(canvas_l: f64, reference_l: f64, tol: &Tolerances) -> FeedbackMessage {
    let delta = canvas_l - reference_l;
    let magnitude = delta.abs();
    let shown = magnitude.round();
    let (direction, text) = if magnitude <= tol.value {
        (Direction::Match, "This value matches the reference well.".to_string())
    } else if delta < 0.0 {
        (
            Direction::Lighten,
            format!("This value is darker than the reference; lighten it by about {shown} L*."),
        )
    } else {
        (
            Direction::Darken,
            format!("This value is lighter than the reference; darken it by about {shown} L*."),
        )
    };
    FeedbackMessage {
        dimension: FeedbackDimension::Value,
        direction,
        magnitude,
        text,
    }
}

/// Hue message followed by saturation message.
pub fn render_color_feedback(pair: &MatchPair, tol: &Tolerances) -> Result<Vec<FeedbackMessage>> {
    if pair.canvas_cluster.mode != ClusterMode::Color || pair.reference_cluster.mode != ClusterMode::Color {
        return Err(Error::ModeMismatch);
    }
    let canvas = lab_to_hsv(pair.canvas_cluster.center_lab);
    let reference = lab_to_hsv(pair.reference_cluster.center_lab);
    Ok(vec![
        hue_message(canvas.h, reference.h, tol),
        saturation_message(canvas.s, reference.s, tol),
    ])
}

/// Signed shortest-arc rotation from `from` to `to`, in [-180, 180).
pub fn hue_delta(from: f64, to: f64) -> f64 {
    wrap_degrees(to - from + 180.0) - 180.0
}

/// Arc distance to the warm pole; smaller is warmer.
fn coolness(h: f64) -> f64 {
    hue_delta(h, WARM_POLE_DEG).abs()
}

pub fn hue_message(canvas_h: f64, reference_h: f64, tol: &Tolerances) -> FeedbackMessage {
    let delta = hue_delta(canvas_h, reference_h);
    let magnitude = delta.abs();
    let shown = magnitude.round();
    let canvas_cat = HueCategory::of_hue(canvas_h);
    let reference_cat = HueCategory::of_hue(reference_h);

    // the dead zone applies across a category boundary too
    let (direction, text) = if magnitude <= tol.hue {
        (Direction::Match, "The hue matches the reference well.".to_string())
    } else if canvas_cat != reference_cat {
        (
            Direction::TowardCategory(reference_cat),
            format!(
                "This color is {} but should be more {} in hue (about {shown}° away).",
                canvas_cat.name(),
                reference_cat.name()
            ),
        )
    } else if coolness(reference_h) < coolness(canvas_h) {
        (
            Direction::Warmer,
            format!("The hue is slightly cooler than the reference; shift it about {shown}° warmer."),
        )
    } else {
        (
            Direction::Cooler,
            format!("The hue is slightly warmer than the reference; shift it about {shown}° cooler."),
        )
    };
    FeedbackMessage {
        dimension: FeedbackDimension::Hue,
        direction,
        magnitude,
        text,
    }
}

/// Saturations are fractions in [0, 1]; the difference is reported in percentage points.
pub fn saturation_message(canvas_s: f64, reference_s: f64, tol: &Tolerances) -> FeedbackMessage {
    let delta = (canvas_s - reference_s) * 100.0;
    let magnitude = delta.abs();
    let shown = magnitude.round();
    let (direction, text) = if magnitude <= tol.saturation {
        (Direction::Match, "The saturation matches the reference well.".to_string())
    } else if delta > 0.0 {
        (
            Direction::LessVibrant,
            format!("This color is {shown}% more saturated than the reference; make it less vibrant."),
        )
    } else {
        (
            Direction::MoreVibrant,
            format!("This color is {shown}% less saturated than the reference; make it more vibrant."),
        )
    };
    FeedbackMessage {
        dimension: FeedbackDimension::Saturation,
        direction,
        magnitude,
        text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn value_rules() {
        assert_eq!(value_message(40.0, 40.0, &tol()).direction, Direction::Match);
        let m = value_message(30.0, 60.0, &tol());
        assert_eq!(m.direction, Direction::Lighten);
        assert_eq!(m.magnitude, 30.0);
        assert!(m.text.contains("30"));
        assert_eq!(value_message(62.0, 60.0, &tol()).direction, Direction::Match);
        assert_eq!(value_message(63.0, 60.0, &tol()).direction, Direction::Match);
        assert_eq!(value_message(63.5, 60.0, &tol()).direction, Direction::Darken);
    }

    #[test]
    fn categories() {
        for cat in HueCategory::ALL {
            assert_eq!(HueCategory::of_hue(cat.center()), cat);
        }
        assert_eq!(HueCategory::of_hue(29.999), HueCategory::Red);
        assert_eq!(HueCategory::of_hue(30.0), HueCategory::Yellow);
        assert_eq!(HueCategory::of_hue(330.0), HueCategory::Red);
        assert_eq!(HueCategory::of_hue(329.9), HueCategory::Magenta);
        assert_eq!(HueCategory::of_hue(359.99), HueCategory::Red);
    }

    #[test]
    fn green_toward_cyan() {
        let m = hue_message(100.0, 185.0, &tol());
        assert_eq!(m.direction, Direction::TowardCategory(HueCategory::Cyan));
        assert!(m.text.contains("more cyan in hue"));
        assert_eq!(m.magnitude, 85.0);
    }

    #[test]
    fn warm_and_cool_within_category() {
        // both red; 20° is closer to the warm pole than 340°
        assert_eq!(hue_message(340.0, 20.0, &tol()).direction, Direction::Warmer);
        assert_eq!(hue_message(20.0, 340.0, &tol()).direction, Direction::Cooler);
        // both cyan; 200° is nearer the cool pole
        assert_eq!(hue_message(160.0, 200.0, &tol()).direction, Direction::Cooler);
        assert_eq!(hue_message(100.0, 102.0, &tol()).direction, Direction::Match);
        assert_eq!(hue_message(29.0, 31.0, &tol()).direction, Direction::Match);
    }

    #[test]
    fn saturation_rules() {
        let m = saturation_message(0.9, 0.6, &tol());
        assert_eq!(m.direction, Direction::LessVibrant);
        assert!((m.magnitude - 30.0).abs() < 1e-9);
        assert_eq!(saturation_message(0.6, 0.9, &tol()).direction, Direction::MoreVibrant);
        assert_eq!(saturation_message(0.5, 0.52, &tol()).direction, Direction::Match);
    }

    #[test]
    fn direction_json() {
        assert_eq!(serde_json::to_value(Direction::Lighten).unwrap(), "lighten");
        assert_eq!(
            serde_json::to_value(Direction::TowardCategory(HueCategory::Cyan)).unwrap(),
            serde_json::json!({"toward_category": "cyan"})
        );
    }
}
