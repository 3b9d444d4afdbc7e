//! Canvas↔reference cluster matching and verbal feedback.

mod feedback;
mod score;

pub use feedback::{
    hue_delta, hue_message, render_color_feedback, render_value_feedback, saturation_message,
    value_message, Direction, FeedbackDimension, FeedbackMessage, HueCategory, MatchPair,
    Tolerances, COOL_POLE_DEG, WARM_POLE_DEG,
};
pub use score::{combined_score, value_similarity, SimilarityBreakdown, W_SPT, W_VAL};

use crate::error::{Error, Result};
use crate::palette::{ClusterMode, Palette};

/// Index of the best canvas cluster for each reference cluster: highest
/// total score, then larger canvas pixel fraction, then lower canvas index.
pub fn best_matches(canvas: &Palette, reference: &Palette) -> Result<Vec<(usize, SimilarityBreakdown)>> {
    if canvas.clusters.is_empty() || reference.clusters.is_empty() {
        return Err(Error::EmptyPalette);
    }
    if canvas.mode != reference.mode {
        return Err(Error::ModeMismatch);
    }
    reference
        .clusters
        .iter()
        .map(|r| {
            let mut best: Option<(usize, SimilarityBreakdown)> = None;
            for (i, c) in canvas.clusters.iter().enumerate() {
                let score = combined_score(c, r)?;
                let better = match &best {
                    None => true,
                    Some((j, b)) => {
                        score.s_total > b.s_total
                            || (score.s_total == b.s_total
                                && c.pixel_fraction > canvas.clusters[*j].pixel_fraction)
                    }
                };
                if better {
                    best = Some((i, score));
                }
            }
            Ok(best.expect("canvas palette is non-empty"))
        })
        .collect()
}

/// One pair per reference cluster, in reference order, with feedback
/// rendered for the palettes' mode. A canvas cluster may serve several
/// reference clusters.
pub fn match_palettes(canvas: &Palette, reference: &Palette, tol: &Tolerances) -> Result<Vec<MatchPair>> {
    let matches = best_matches(canvas, reference)?;
    matches
        .into_iter()
        .zip(&reference.clusters)
        .map(|((ci, score), r)| {
            let mut pair = MatchPair {
                canvas_cluster: canvas.clusters[ci].clone(),
                reference_cluster: r.clone(),
                score,
                feedback: Vec::new(),
            };
            pair.feedback = match reference.mode {
                ClusterMode::Value => vec![render_value_feedback(&pair, tol)?],
                ClusterMode::Color => render_color_feedback(&pair, tol)?,
            };
            Ok(pair)
        })
        .collect()
}
