use serde::{Deserialize, Serialize};

use crate::geometry::NormPoint;

const CLIP_TOLERANCE: f64 = 1e-12;

/// Line in normal form `normal · p = offset` with a unit normal.
///
/// Orientation is canonical: `offset ≥ 0`, and for lines through the origin
/// the normal points into the upper half plane (or along +x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineModel {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl LineModel {
    /// `None` if the points coincide.
    pub fn through(a: &NormPoint, b: &NormPoint) -> Option<Self> {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = dx.hypot(dy);
        if len == 0.0 || !len.is_finite() {
            return None;
        }
        Some(Self::from_normal([-dy / len, dx / len], (-dy * a.x + dx * a.y) / len))
    }

    /// Normalizes `normal` and fixes the orientation.
    pub fn from_normal(normal: [f64; 2], offset: f64) -> Self {
        let len = normal[0].hypot(normal[1]);
        let (mut nx, mut ny, mut c) = (normal[0] / len, normal[1] / len, offset / len);
        let flip = if c != 0.0 {
            c < 0.0
        } else {
            ny < 0.0 || (ny == 0.0 && nx < 0.0)
        };
        if flip {
            nx = -nx;
            ny = -ny;
            c = -c;
        }
        Self {
            normal: [nx, ny],
            offset: c,
        }
    }

    pub fn signed_distance(&self, p: &NormPoint) -> f64 {
        self.normal[0] * p.x + self.normal[1] * p.y - self.offset
    }

    pub fn distance(&self, p: &NormPoint) -> f64 {
        self.signed_distance(p).abs()
    }

    /// Acute angle to the horizontal, in degrees within [0, 90].
    pub fn angle_to_horizontal_deg(&self) -> f64 {
        // the direction is perpendicular to the normal
        let dir = [-self.normal[1], self.normal[0]];
        dir[1].abs().atan2(dir[0].abs()).to_degrees()
    }
}

/// The chord of the infinite line inside the unit square, ordered by x then y.
/// `None` when the line misses the square or only touches a corner.
pub fn clip_to_unit_square(line: &LineModel) -> Option<[NormPoint; 2]> {
    let [nx, ny] = line.normal;
    let c = line.offset;
    let mut hits: Vec<NormPoint> = Vec::with_capacity(4);
    let in_range = |v: f64| (-CLIP_TOLERANCE..=1.0 + CLIP_TOLERANCE).contains(&v);

    if ny != 0.0 {
        for x in [0.0, 1.0] {
            let y = (c - nx * x) / ny;
            if in_range(y) {
                hits.push(NormPoint::new(x, y.clamp(0.0, 1.0)));
            }
        }
    }
    if nx != 0.0 {
        for y in [0.0, 1.0] {
            let x = (c - ny * y) / nx;
            if in_range(x) {
                hits.push(NormPoint::new(x.clamp(0.0, 1.0), y));
            }
        }
    }

    let mut best: Option<(f64, NormPoint, NormPoint)> = None;
    for i in 0..hits.len() {
        for j in i + 1..hits.len() {
            let d = hits[i].distance(&hits[j]);
            if d > CLIP_TOLERANCE && best.map_or(true, |(bd, _, _)| d > bd) {
                best = Some((d, hits[i], hits[j]));
            }
        }
    }
    best.map(|(_, a, b)| {
        if (a.x, a.y) <= (b.x, b.y) {
            [a, b]
        } else {
            [b, a]
        }
    })
}
