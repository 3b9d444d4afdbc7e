//! Weighted Lloyd's K-means in L\*a\*b\* with k-means++ seeding.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::imagecore::LabColor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop once no center moves farther than this (Lab units).
    pub tolerance: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            max_iterations: 100,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub centers: Vec<LabColor>,
    /// Total sample weight per center.
    pub weights: Vec<f64>,
    pub assignments: Vec<usize>,
    /// Weighted sum of squared distances after each assignment step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

/// Clusters weighted samples. `k` is capped at the number of samples, so
/// callers wanting "at most the number of distinct colors" should merge
/// duplicates first (see [`dedup_weighted`]).
pub fn kmeans(samples: &[LabColor], weights: &[f64], params: &KMeansParams) -> KMeansResult {
    assert_eq!(samples.len(), weights.len());
    let k = params.k.min(samples.len()).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centers = seed_plus_plus(samples, weights, k, &mut rng);
    let mut assignments = vec![0usize; samples.len()];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let objective = assign(samples, weights, &centers, &mut assignments);
        history.push(objective);
        if iterations == params.max_iterations {
            break;
        }
        iterations += 1;

        let mut sums = vec![[0.0f64; 3]; k];
        let mut mass = vec![0.0f64; k];
        for ((s, &w), &c) in samples.iter().zip(weights).zip(&assignments) {
            sums[c][0] += w * s.l;
            sums[c][1] += w * s.a;
            sums[c][2] += w * s.b;
            mass[c] += w;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            // an emptied cluster keeps its previous center
            if mass[c] > 0.0 {
                let next = LabColor::new(sums[c][0] / mass[c], sums[c][1] / mass[c], sums[c][2] / mass[c]);
                shift = shift.max(next.distance(&centers[c]));
                centers[c] = next;
            }
        }
        if shift < params.tolerance {
            let objective = assign(samples, weights, &centers, &mut assignments);
            history.push(objective);
            break;
        }
    }

    let mut totals = vec![0.0; k];
    for (&w, &c) in weights.iter().zip(&assignments) {
        totals[c] += w;
    }
    KMeansResult {
        centers,
        weights: totals,
        assignments,
        objective_history: history,
        iterations,
    }
}

fn seed_plus_plus(samples: &[LabColor], weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<LabColor> {
    let first = WeightedIndex::new(weights)
        .map(|d| d.sample(rng))
        .unwrap_or(0);
    let mut centers = vec![samples[first]];
    let mut nearest: Vec<f64> = samples.iter().map(|s| s.distance_sq(&samples[first])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = nearest.iter().zip(weights).map(|(d, w)| d * w).collect();
        let Ok(dist) = WeightedIndex::new(&scores) else {
            // every remaining sample coincides with a center
            break;
        };
        let next = samples[dist.sample(rng)];
        for (n, s) in nearest.iter_mut().zip(samples) {
            *n = n.min(s.distance_sq(&next));
        }
        centers.push(next);
    }
    centers
}

fn assign(samples: &[LabColor], weights: &[f64], centers: &[LabColor], out: &mut [usize]) -> f64 {
    let mut objective = 0.0;
    for ((s, &w), slot) in samples.iter().zip(weights).zip(out.iter_mut()) {
        let (best, d) = nearest_center(s, centers);
        *slot = best;
        objective += w * d;
    }
    objective
}

/// Index of and squared distance to the closest center (first wins ties).
pub fn nearest_center(s: &LabColor, centers: &[LabColor]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = s.distance_sq(c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Merges bit-identical samples, summing their weights. Order of first
/// occurrence is kept so results stay deterministic.
pub fn dedup_weighted(samples: &[LabColor], weights: &[f64]) -> (Vec<LabColor>, Vec<f64>) {
    let mut index: std::collections::HashMap<[u64; 3], usize> = std::collections::HashMap::new();
    let mut out_s = Vec::new();
    let mut out_w: Vec<f64> = Vec::new();
    for (s, &w) in samples.iter().zip(weights) {
        let key = [s.l.to_bits(), s.a.to_bits(), s.b.to_bits()];
        match index.get(&key) {
            Some(&i) => out_w[i] += w,
            None => {
                index.insert(key, out_s.len());
                out_s.push(*s);
                out_w.push(w);
            }
        }
    }
    (out_s, out_w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_obvious_groups() {
        let samples = vec![
            LabColor::new(10.0, 0.0, 0.0),
            LabColor::new(11.0, 0.0, 0.0),
            LabColor::new(80.0, 5.0, 5.0),
            LabColor::new(82.0, 5.0, 5.0),
        ];
        let r = kmeans(&samples, &[1.0; 4], &KMeansParams { k: 2, ..Default::default() });
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[2], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[2]);
    }

    #[test]
    fn dedup_sums_weights() {
        let a = LabColor::new(1.0, 2.0, 3.0);
        let b = LabColor::new(4.0, 5.0, 6.0);
        let (s, w) = dedup_weighted(&[a, b, a], &[1.0, 2.0, 3.0]);
        assert_eq!(s, vec![a, b]);
        assert_eq!(w, vec![4.0, 2.0]);
    }

    #[test]
    fn k_capped_by_samples() {
        let r = kmeans(&[LabColor::new(50.0, 0.0, 0.0)], &[3.0], &KMeansParams::default());
        assert_eq!(r.centers.len(), 1);
        assert_eq!(r.weights, vec![3.0]);
    }
}
