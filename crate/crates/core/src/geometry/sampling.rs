use super::types::{PolygonContour, SampledPoint};

/// Samples each edge proportionally to its length relative to the polygon's
/// shortest edge: an edge gets `max(1, round(len / shortest))` points at
/// parameters `k / n`, `k = 0..n`. The end vertex belongs to the next edge,
/// so every vertex is emitted exactly once.
pub fn sample_polygon_points(polygon: &PolygonContour) -> Vec<SampledPoint> {
    let shortest = polygon
        .edges()
        .map(|(a, b)| a.distance(&b))
        .fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    for (a, b) in polygon.edges() {
        let n = edge_quota(a.distance(&b), shortest);
        out.extend((0..n).map(|k| SampledPoint {
            point: a.lerp(&b, k as f64 / n as f64),
            polygon_id: polygon.id,
        }));
    }
    out
}

pub fn edge_quota(length: f64, shortest: f64) -> usize {
    if shortest <= 0.0 {
        return 1;
    }
    ((length / shortest).round() as usize).max(1)
}
