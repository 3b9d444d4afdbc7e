//! Request-level analyses shared by the HTTP handlers and the CLI.
//!
//! Everything here is synchronous and deterministic for a given image,
//! config and provider answer.

use drawscaffold_core::composition::{fit_composition_lines, top_k, CompositionLine};
use drawscaffold_core::geometry::{
    extract_outer_contour, generate_grid, sample_polygon_points, simplify_rdp, BoundingBox, DenseContour,
    GridKind, NormPoint, OverlayPrimitive, PolygonContour, PolygonId,
};
use drawscaffold_core::imagecore::{apply_blur, to_value_image, BlurSpec, ImageBuffer, Mask};
use drawscaffold_core::matching::{match_palettes, MatchPair};
use drawscaffold_core::palette::{ClusterMode, LabImage, Palette, PaletteConfig, PaletteSource};
use drawscaffold_core::segmentation::{
    segment, BoxProvider, MaskSource, SegmentationProvider, SegmentationRequest, SegmentationResult,
};
use drawscaffold_core::{palette, Error};
use serde::{Deserialize, Serialize};

use crate::config::SessionConfig;
use crate::error::ServiceResult;

/// How many times ε is halved when simplification collapses a contour.
pub const MAX_EPSILON_RETRIES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonRecord {
    #[serde(flatten)]
    pub polygon: PolygonContour,
    pub source: MaskSource,
    pub confidence: f64,
    /// ε after any halving retries.
    pub epsilon_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub kind: GridKind,
    pub primitives: Vec<OverlayPrimitive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub polygons: Vec<PolygonRecord>,
    /// The first `k_lines` of `all_lines`.
    pub lines: Vec<CompositionLine>,
    pub all_lines: Vec<CompositionLine>,
    pub grids: Vec<GridRecord>,
    pub provider: String,
    pub box_fallback: bool,
    pub seed: u64,
    pub config: SessionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub mode: ClusterMode,
    pub pairs: Vec<MatchPair>,
    pub config: SessionConfig,
}

pub fn all_grids() -> Vec<GridRecord> {
    GridKind::ALL
        .iter()
        .map(|&kind| GridRecord {
            kind,
            primitives: generate_grid(kind),
        })
        .collect()
}

fn shoelace(points: &[NormPoint]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Simplifies `contour`, halving ε on a degenerate result.
pub fn simplify_with_retry(
    contour: &DenseContour,
    epsilon: f64,
    id: PolygonId,
) -> drawscaffold_core::Result<(PolygonContour, f64)> {
    let mut eps = epsilon;
    let mut attempt = 0;
    loop {
        match simplify_rdp(contour, eps, id) {
            Ok(p) => return Ok((p, eps)),
            Err(Error::DegenerateResult { .. }) if attempt < MAX_EPSILON_RETRIES && eps > 0.0 => {
                eps /= 2.0;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// One polygon per mask, from the mask's largest outer contour. Masks
/// without foreground are skipped; polygon ids are mask indices.
pub fn polygons_from_masks(seg: &SegmentationResult, epsilon: f64) -> ServiceResult<Vec<PolygonRecord>> {
    let mut out = Vec::new();
    for (i, m) in seg.masks.iter().enumerate() {
        let contours = match extract_outer_contour(&m.mask) {
            Ok(c) => c,
            Err(Error::EmptyMask) => continue,
            Err(e) => return Err(e.into()),
        };
        let largest = contours
            .iter()
            .max_by(|a, b| shoelace(&a.points).total_cmp(&shoelace(&b.points)))
            .expect("non-empty mask has a contour");
        let (mut polygon, epsilon_used) = simplify_with_retry(largest, epsilon, i as PolygonId)?;
        polygon.label = Some(m.label.clone());
        out.push(PolygonRecord {
            polygon,
            source: m.source,
            confidence: m.confidence,
            epsilon_used,
        });
    }
    if out.is_empty() {
        return Err(Error::NoDetections.into());
    }
    Ok(out)
}

/// Composition lines for the given polygons. Fewer than two polygons give
/// no lines.
pub fn composition_lines(polygons: &[PolygonRecord], cfg: &SessionConfig) -> ServiceResult<Vec<CompositionLine>> {
    let points: Vec<_> = polygons.iter().flat_map(|p| sample_polygon_points(&p.polygon)).collect();
    if points.is_empty() {
        return Ok(Vec::new());
    }
    Ok(fit_composition_lines(&points, &cfg.ransac)?)
}

pub fn composition_report(
    seg: &SegmentationResult,
    box_fallback: bool,
    cfg: &SessionConfig,
) -> ServiceResult<CompositionReport> {
    cfg.validate()?;
    let polygons = polygons_from_masks(seg, cfg.epsilon)?;
    let all_lines = composition_lines(&polygons, cfg)?;
    Ok(CompositionReport {
        polygons,
        lines: top_k(&all_lines, cfg.k_lines),
        all_lines,
        grids: all_grids(),
        provider: seg.provider.clone(),
        box_fallback,
        seed: cfg.ransac.seed,
        config: *cfg,
    })
}

/// Runs the provider. When it is unreachable and the request carries user
/// boxes, the box provider answers instead and the flag is set.
pub fn run_segmentation(
    request: &SegmentationRequest,
    provider: &dyn SegmentationProvider,
) -> ServiceResult<(SegmentationResult, bool)> {
    match segment(request, provider) {
        Ok(r) => Ok((r, false)),
        Err(Error::ProviderUnavailable(reason)) if !request.boxes.is_empty() => {
            tracing::warn!(%reason, "segmentation provider unavailable, using boxes");
            let fallback = SegmentationRequest {
                image: request.image.clone(),
                text_prompt: None,
                boxes: request.boxes.clone(),
            };
            Ok((segment(&fallback, &BoxProvider)?, true))
        }
        Err(e) => Err(e.into()),
    }
}

/// Limits on region contours returned with feedback pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourBudget {
    pub epsilon: f64,
    pub max_contours: usize,
}

impl Default for ContourBudget {
    fn default() -> Self {
        Self {
            epsilon: 0.002,
            max_contours: 256,
        }
    }
}

/// Keeps the largest `max_contours` region contours of every cluster, each
/// simplified at `epsilon`; contours that would collapse stay dense.
pub fn compact_palette(palette: &Palette, budget: ContourBudget) -> Palette {
    let mut out = palette.clone();
    for cluster in &mut out.clusters {
        let mut contours: Vec<(f64, DenseContour)> = std::mem::take(&mut cluster.region_contours)
            .into_iter()
            .map(|c| (shoelace(&c.points), c))
            .collect();
        // stable sort: equal areas keep extraction order
        contours.sort_by(|a, b| b.0.total_cmp(&a.0));
        contours.truncate(budget.max_contours);
        cluster.region_contours = contours
            .into_iter()
            .map(|(_, c)| match simplify_rdp(&c, budget.epsilon, 0) {
                Ok(p) => DenseContour::new(p.vertices),
                Err(_) => c,
            })
            .collect();
    }
    out
}

pub fn palette_for(lab: &LabImage, mode: ClusterMode, source: PaletteSource, cfg: &PaletteConfig) -> ServiceResult<Palette> {
    Ok(palette::extract_dominant_lab(lab, mode, source, cfg)?)
}

/// Matches already extracted palettes and attaches the effective config.
pub fn feedback_report(
    canvas: &Palette,
    reference: &Palette,
    cfg: &SessionConfig,
    budget: ContourBudget,
) -> ServiceResult<FeedbackReport> {
    let canvas = compact_palette(canvas, budget);
    let reference = compact_palette(reference, budget);
    let pairs = match_palettes(&canvas, &reference, &cfg.tolerances)?;
    Ok(FeedbackReport {
        mode: reference.mode,
        pairs,
        config: *cfg,
    })
}

/// Full feedback computation from images; used when no cache is at hand.
pub fn feedback_from_images(
    canvas: &ImageBuffer,
    reference: &ImageBuffer,
    mode: ClusterMode,
    cfg: &SessionConfig,
    budget: ContourBudget,
) -> ServiceResult<FeedbackReport> {
    cfg.validate()?;
    let c = palette_for(&LabImage::new(canvas), mode, PaletteSource::Canvas, &cfg.palette)?;
    let r = palette_for(&LabImage::new(reference), mode, PaletteSource::Reference, &cfg.palette)?;
    feedback_report(&c, &r, cfg, budget)
}

pub fn value_guidance(img: &ImageBuffer, blur: &BlurSpec) -> ServiceResult<ImageBuffer> {
    blur.validate()?;
    Ok(apply_blur(&to_value_image(img), blur)?)
}

/// Rasterizes a closed lasso given in normalized coordinates with the
/// even-odd rule, sampling at pixel centers.
pub fn rasterize_lasso(points: &[NormPoint], width: u32, height: u32) -> ServiceResult<Mask> {
    let mut distinct: Vec<NormPoint> = Vec::with_capacity(points.len());
    for p in points {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(crate::error::ServiceError::BadRequest("lasso point is not finite".into()));
        }
        if distinct.last() != Some(p) {
            distinct.push(*p);
        }
    }
    while distinct.len() > 1 && distinct.first() == distinct.last() {
        distinct.pop();
    }
    if distinct.len() < 3 {
        return Err(Error::DegeneratePolygon.into());
    }
    let poly: Vec<(f64, f64)> = distinct
        .iter()
        .map(|p| (p.x * width as f64, p.y * height as f64))
        .collect();
    let n = poly.len();
    let mut mask = Mask::new(width, height);
    let mut crossings = Vec::new();
    for y in 0..height {
        let cy = y as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % n];
            if (y0 <= cy) != (y1 <= cy) {
                crossings.push(x0 + (cy - y0) / (y1 - y0) * (x1 - x0));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            // pixel centers strictly inside [span0, span1)
            let start = (span[0] - 0.5).ceil().max(0.0);
            let end = (span[1] - 0.5).ceil().min(width as f64);
            let mut x = start;
            while x < end {
                mask.set(x as u32, y, true);
                x += 1.0;
            }
        }
    }
    Ok(mask)
}

/// Boxes that are valid for a segmentation request.
pub fn check_boxes(boxes: &[[f64; 4]]) -> ServiceResult<Vec<BoundingBox>> {
    boxes
        .iter()
        .map(|b| {
            let (x0, x1) = (b[0].min(b[2]), b[0].max(b[2]));
            let (y0, y1) = (b[1].min(b[3]), b[1].max(b[3]));
            BoundingBox::new(x0, y0, x1, y1).map_err(|e| crate::error::ServiceError::BadRequest(e.to_string()))
        })
        .collect()
}
