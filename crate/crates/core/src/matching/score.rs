use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::iou;
use crate::imagecore::LabColor;
use crate::palette::DominantCluster;

pub const W_VAL: f64 = 0.4;
pub const W_SPT: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityBreakdown {
    pub s_val: f64,
    pub s_spt: f64,
    pub s_total: f64,
    pub w_val: f64,
    pub w_spt: f64,
}

impl SimilarityBreakdown {
    pub fn new(s_val: f64, s_spt: f64) -> Self {
        Self {
            s_val,
            s_spt,
            s_total: W_VAL * s_val + W_SPT * s_spt,
            w_val: W_VAL,
            w_spt: W_SPT,
        }
    }
}

/// Channel-normalized Lab coordinates, each in [0, 1].
fn normalized(c: &LabColor) -> [f64; 3] {
    [c.l / 100.0, (c.a + 128.0) / 256.0, (c.b + 128.0) / 256.0]
}

/// `1 − ‖a′ − b′‖ / 3` over channel-normalized Lab.
pub fn value_similarity(a: &LabColor, b: &LabColor) -> f64 {
    let (na, nb) = (normalized(a), normalized(b));
    let dist = na
        .iter()
        .zip(&nb)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    1.0 - dist / 3.0
}

/// Weighted sum of center similarity and bounding-box IoU.
pub fn combined_score(a: &DominantCluster, b: &DominantCluster) -> Result<SimilarityBreakdown> {
    if a.mode != b.mode {
        return Err(Error::ModeMismatch);
    }
    Ok(SimilarityBreakdown::new(
        value_similarity(&a.center_lab, &b.center_lab),
        iou(&a.bbox, &b.bbox),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_vs_white() {
        let s = value_similarity(&LabColor::new(0.0, 0.0, 0.0), &LabColor::new(100.0, 0.0, 0.0));
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_is_one() {
        let c = LabColor::new(42.0, -13.0, 77.0);
        assert_eq!(value_similarity(&c, &c), 1.0);
    }

    #[test]
    fn lower_bound() {
        let s = value_similarity(&LabColor::new(0.0, -128.0, -128.0), &LabColor::new(100.0, 128.0, 128.0));
        assert!((s - (1.0 - 3f64.sqrt() / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn total_is_weighted_sum() {
        let s = SimilarityBreakdown::new(0.7, 0.2);
        assert_eq!(s.s_total, 0.4 * 0.7 + 0.6 * 0.2);
        assert_eq!(s.w_val + s.w_spt, 1.0);
    }
}
