//! Ramer–Douglas–Peucker simplification of closed contours.

use super::types::{point_segment_distance, DenseContour, NormPoint, PolygonContour, PolygonId};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Simplifies a closed contour into a polygon.
///
/// The loop is split at its first point and at the point farthest from it;
/// both chains are simplified independently. Every dropped point ends up
/// within `epsilon` of the polygon, and since split positions never depend on
/// `epsilon` the kept set only shrinks as `epsilon` grows.
pub fn simplify_rdp(contour: &DenseContour, epsilon: f64, id: PolygonId) -> Result<PolygonContour> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be ≥ 0, got {epsilon}")));
    }
    let mut pts: Vec<NormPoint> = Vec::with_capacity(contour.len());
    for p in &contour.points {
        if pts.last() != Some(p) {
            pts.push(*p);
        }
    }
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    let degenerate = |n| Error::DegenerateResult {
        vertices: n,
        epsilon,
    };
    if pts.len() < 3 {
        return Err(degenerate(pts.len()));
    }

    let n = pts.len();
    let far = (1..n)
        .max_by(|&a, &b| pts[0].distance(&pts[a]).total_cmp(&pts[0].distance(&pts[b])))
        .expect("n ≥ 3");

    let mut keep = vec![false; n];
    keep[0] = true;
    keep[far] = true;
    // indices are taken modulo n so the second chain can wrap back to 0
    simplify_chain(&pts, 0, far, epsilon, &mut keep);
    simplify_chain(&pts, far, n, epsilon, &mut keep);

    let vertices: Vec<NormPoint> = (0..n).filter(|&i| keep[i]).map(|i| pts[i]).collect();
    let count = vertices.len();
    PolygonContour::new(id, vertices, None).map_err(|_| degenerate(count))
}

fn simplify_chain(pts: &[NormPoint], first: usize, last: usize, epsilon: f64, keep: &mut [bool]) {
    let n = pts.len();
    let mut stack = vec![(first, last)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let (pa, pb) = (pts[a % n], pts[b % n]);
        let mut worst = 0.0;
        let mut worst_idx = a;
        for i in a + 1..b {
            let d = point_segment_distance(&pts[i % n], &pa, &pb);
            if d > worst {
                worst = d;
                worst_idx = i;
            }
        }
        if worst > epsilon {
            keep[worst_idx % n] = true;
            stack.push((worst_idx, b));
            stack.push((a, worst_idx));
        }
    }
}

/// Largest distance from any contour point to the closed polygon outline.
pub fn max_deviation(contour: &DenseContour, polygon: &PolygonContour) -> f64 {
    contour
        .points
        .iter()
        .map(|p| {
            polygon
                .edges()
                .map(|(a, b)| point_segment_distance(p, &a, &b))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
