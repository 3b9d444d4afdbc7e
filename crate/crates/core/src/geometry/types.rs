use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point in the normalized `[0,1] × [0,1]` image frame (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct NormPoint {
    pub x: f64,
    pub y: f64,
}

impl NormPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &NormPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &NormPoint, t: f64) -> NormPoint {
        NormPoint::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

impl From<[f64; 2]> for NormPoint {
    fn from(v: [f64; 2]) -> Self {
        NormPoint::new(v[0], v[1])
    }
}

impl From<NormPoint> for [f64; 2] {
    fn from(p: NormPoint) -> Self {
        [p.x, p.y]
    }
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: &NormPoint, a: &NormPoint, b: &NormPoint) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0);
    p.distance(&NormPoint::new(a.x + t * dx, a.y + t * dy))
}

/// Axis-aligned box in normalized coordinates, serialized as `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let unit = 0.0..=1.0;
        if !(x_min <= x_max && y_min <= y_max)
            || ![x_min, y_min, x_max, y_max].iter().all(|v| unit.contains(v))
        {
            return Err(Error::InvalidRequest(format!(
                "invalid box [{x_min}, {y_min}, {x_max}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Builds a box from two arbitrary corners, clamped into the unit square.
    pub fn from_corners(a: NormPoint, b: NormPoint) -> Self {
        let c = |v: f64| v.clamp(0.0, 1.0);
        Self {
            x_min: c(a.x.min(b.x)),
            y_min: c(a.y.min(b.y)),
            x_max: c(a.x.max(b.x)),
            y_max: c(a.y.max(b.y)),
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &NormPoint) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        BoundingBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

/// Intersection over union; 0 when the union has no area.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    try_iou(a, b).unwrap_or(0.0)
}

/// Like [`iou`], but reports two degenerate boxes as [`Error::ZeroArea`].
pub fn try_iou(a: &BoundingBox, b: &BoundingBox) -> Result<f64> {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return Err(Error::ZeroArea);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Dense boundary of one mask component, as a closed loop (first point not repeated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseContour {
    pub points: Vec<NormPoint>,
}

impl DenseContour {
    pub fn new(points: Vec<NormPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub type PolygonId = u32;

/// Simplified closed polygon of one object of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonContour {
    pub id: PolygonId,
    pub vertices: Vec<NormPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PolygonContour {
    /// Needs ≥ 3 vertices and no consecutive duplicates (including last→first).
    pub fn new(id: PolygonId, vertices: Vec<NormPoint>, label: Option<String>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 || (0..n).any(|i| vertices[i] == vertices[(i + 1) % n]) {
            return Err(Error::DegeneratePolygon);
        }
        Ok(Self {
            id,
            vertices,
            label,
        })
    }

    /// Edges as (start, end) pairs, closing back to the first vertex.
    pub fn edges(&self) -> impl Iterator<Item = (NormPoint, NormPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledPoint {
    pub point: NormPoint,
    pub polygon_id: PolygonId,
}
