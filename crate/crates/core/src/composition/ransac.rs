//! Cross-object RANSAC for composition lines.
//!
//! Each round draws `iterations` candidate lines, every one seeded by two
//! active points that belong to different polygons, and keeps the candidate
//! with the most inliers. It is retained only if its inliers make up at least
//! `theta_inl` of *all* sampled points (not of the points still active), and
//! its inliers are then removed before the next round. Rounds stop when no
//! candidate qualifies, fewer than two polygons remain, or `max_lines` is hit.
//! Earlier lines therefore cover more points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::line::{clip_to_unit_square, LineModel};
use crate::error::{Error, Result};
use crate::geometry::{NormPoint, PolygonId, SampledPoint};

// absorbs float error in theta_inl × N, e.g. 0.1 × 30
const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    /// Perpendicular inlier distance, normalized units.
    pub theta_dis: f64,
    /// Minimum inlier share of all sampled points.
    pub theta_inl: f64,
    /// Candidate lines per round.
    pub iterations: usize,
    pub seed: u64,
    pub max_lines: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            theta_dis: 0.04,
            theta_inl: 0.10,
            iterations: 1000,
            seed: 0,
            max_lines: 16,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_dis > 0.0 && self.theta_dis < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "theta_dis must be in (0, 1), got {}",
                self.theta_dis
            )));
        }
        if !(self.theta_inl > 0.0 && self.theta_inl <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "theta_inl must be in (0, 1], got {}",
                self.theta_inl
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// A retained line. Serializes to the line record
/// `{normal, offset, segment, inliers, inlier_fraction, rank, polygons}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionLine {
    pub normal: [f64; 2],
    pub offset: f64,
    pub segment: Option<[NormPoint; 2]>,
    pub inliers: usize,
    pub inlier_fraction: f64,
    pub rank: usize,
    #[serde(rename = "polygons")]
    pub supporting_polygons: Vec<PolygonId>,
    /// Indices into the input point list.
    #[serde(skip)]
    pub inlier_indices: Vec<usize>,
}

impl CompositionLine {
    pub fn model(&self) -> LineModel {
        LineModel {
            normal: self.normal,
            offset: self.offset,
        }
    }
}

pub fn top_k(lines: &[CompositionLine], k: usize) -> Vec<CompositionLine> {
    lines.iter().take(k).cloned().collect()
}

/// Active points grouped contiguously by polygon, for O(1) cross-polygon draws.
struct ActiveSet {
    order: Vec<usize>,
    /// (start, end) range in `order` for the group of each entry of `order`.
    group_of: Vec<(usize, usize)>,
    groups: usize,
}

impl ActiveSet {
    fn build(points: &[SampledPoint], alive: &[bool]) -> Self {
        let mut by_polygon: BTreeMap<PolygonId, Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if alive[i] {
                by_polygon.entry(p.polygon_id).or_default().push(i);
            }
        }
        let mut order = Vec::new();
        let mut group_of = Vec::new();
        for members in by_polygon.values() {
            let range = (order.len(), order.len() + members.len());
            order.extend_from_slice(members);
            group_of.extend(std::iter::repeat(range).take(members.len()));
        }
        Self {
            order,
            group_of,
            groups: by_polygon.len(),
        }
    }

    fn draw_pair(&self, rng: &mut ChaCha8Rng) -> (usize, usize) {
        let m = self.order.len();
        let first = rng.gen_range(0..m);
        let (start, end) = self.group_of[first];
        let mut second = rng.gen_range(0..m - (end - start));
        if second >= start {
            second += end - start;
        }
        (self.order[first], self.order[second])
    }
}

struct Candidate {
    model: LineModel,
    inliers: usize,
    distance_sum: f64,
}

impl Candidate {
    /// More inliers wins; equal counts fall back to the smaller mean distance.
    fn beats(&self, other: &Candidate) -> bool {
        self.inliers > other.inliers
            || (self.inliers == other.inliers && self.distance_sum < other.distance_sum)
    }
}

pub fn fit_composition_lines(points: &[SampledPoint], cfg: &RansacConfig) -> Result<Vec<CompositionLine>> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    let total = points.len();
    let required = cfg.theta_inl * total as f64 - COUNT_SLACK;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alive = vec![true; total];
    let mut lines = Vec::new();

    while lines.len() < cfg.max_lines {
        let active = ActiveSet::build(points, &alive);
        if active.groups < 2 {
            break;
        }
        let mut best: Option<Candidate> = None;
        for _ in 0..cfg.iterations {
            let (a, b) = active.draw_pair(&mut rng);
            let Some(model) = LineModel::through(&points[a].point, &points[b].point) else {
                continue;
            };
            let Some(candidate) = score(points, &active.order, model, cfg.theta_dis) else {
                continue;
            };
            if best.as_ref().map_or(true, |b| candidate.beats(b)) {
                best = Some(candidate);
            }
        }
        let Some(best) = best else { break };
        if (best.inliers as f64) < required {
            break;
        }

        let mut inlier_indices: Vec<usize> = active
            .order
            .iter()
            .copied()
            .filter(|&i| best.model.distance(&points[i].point) <= cfg.theta_dis)
            .collect();
        inlier_indices.sort_unstable();
        let mut polygons: Vec<PolygonId> = inlier_indices.iter().map(|&i| points[i].polygon_id).collect();
        polygons.sort_unstable();
        polygons.dedup();
        for &i in &inlier_indices {
            alive[i] = false;
        }
        lines.push(CompositionLine {
            normal: best.model.normal,
            offset: best.model.offset,
            segment: clip_to_unit_square(&best.model),
            inliers: inlier_indices.len(),
            inlier_fraction: inlier_indices.len() as f64 / total as f64,
            rank: lines.len(),
            supporting_polygons: polygons,
            inlier_indices,
        });
    }
    Ok(lines)
}

/// Inlier count and distance sum over the active points; `None` when the
/// inliers all come from one polygon.
fn score(points: &[SampledPoint], active: &[usize], model: LineModel, theta_dis: f64) -> Option<Candidate> {
    let mut inliers = 0;
    let mut distance_sum = 0.0;
    let mut first_polygon = None;
    let mut cross = false;
    for &i in active {
        let d = model.distance(&points[i].point);
        if d <= theta_dis {
            inliers += 1;
            distance_sum += d;
            match first_polygon {
                None => first_polygon = Some(points[i].polygon_id),
                Some(id) if id != points[i].polygon_id => cross = true,
                _ => {}
            }
        }
    }
    cross.then_some(Candidate {
        model,
        inliers,
        distance_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_polygon_points, PolygonContour};

    fn square(id: PolygonId, cx: f64, cy: f64, side: f64) -> PolygonContour {
        let h = side / 2.0;
        PolygonContour::new(
            id,
            vec![
                NormPoint::new(cx - h, cy - h),
                NormPoint::new(cx + h, cy - h),
                NormPoint::new(cx + h, cy + h),
                NormPoint::new(cx - h, cy + h),
            ],
            None,
        )
        .unwrap()
    }

    fn points_of(polys: &[PolygonContour]) -> Vec<SampledPoint> {
        polys.iter().flat_map(sample_polygon_points).collect()
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            fit_composition_lines(&[], &RansacConfig::default()),
            Err(Error::NoPoints)
        ));
    }

    #[test]
    fn single_polygon_has_no_lines() {
        let pts = points_of(&[square(0, 0.5, 0.5, 0.3)]);
        assert!(fit_composition_lines(&pts, &RansacConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn config_validation() {
        let pts = points_of(&[square(0, 0.5, 0.5, 0.3)]);
        for cfg in [
            RansacConfig { theta_dis: 0.0, ..Default::default() },
            RansacConfig { theta_inl: 1.5, ..Default::default() },
            RansacConfig { iterations: 0, ..Default::default() },
        ] {
            assert!(matches!(
                fit_composition_lines(&pts, &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn stacked_squares_give_vertical_line() {
        let pts = points_of(&[square(1, 0.5, 0.25, 0.1), square(2, 0.5, 0.75, 0.1)]);
        let lines = fit_composition_lines(&pts, &RansacConfig::default()).unwrap();
        let first = &lines[0];
        assert!(first.model().angle_to_horizontal_deg() > 88.0);
        // the side edges are at x = 0.45 and 0.55
        let x = first.offset / first.normal[0];
        assert!((x - 0.5).abs() <= 0.05 + 1e-9, "x = {x}");
        assert_eq!(first.supporting_polygons, vec![1, 2]);
    }

    #[test]
    fn top_k_prefix() {
        let pts = points_of(&[
            square(1, 0.2, 0.2, 0.1),
            square(2, 0.8, 0.2, 0.1),
            square(3, 0.2, 0.8, 0.1),
            square(4, 0.8, 0.8, 0.1),
        ]);
        let lines = fit_composition_lines(&pts, &RansacConfig::default()).unwrap();
        assert!(lines.len() >= 2);
        assert!(top_k(&lines, 0).is_empty());
        assert_eq!(top_k(&lines, 99), lines);
        let two = top_k(&lines, 2);
        assert_eq!(two.iter().map(|l| l.rank).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn json_record_shape() {
        let pts = points_of(&[square(1, 0.2, 0.5, 0.1), square(2, 0.8, 0.5, 0.1)]);
        let lines = fit_composition_lines(&pts, &RansacConfig::default()).unwrap();
        let v = serde_json::to_value(&lines[0]).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for key in ["normal", "offset", "segment", "inliers", "inlier_fraction", "rank", "polygons"] {
            assert!(keys.contains(&key.to_string()), "missing {key}");
        }
        assert_eq!(keys.len(), 7);
    }
}
