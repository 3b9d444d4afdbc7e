//! Dominant values and colors, their image regions, and color isolation.
//!
//! Clustering runs on a block-averaged copy when the image is larger than
//! `max_cluster_dim`; region masks are always computed at full resolution
//! against the chosen centers.

pub mod kmeans;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bbox_of_contours, extract_outer_contour, BoundingBox, DenseContour};
use crate::imagecore::{lab_to_srgb, srgb_to_lab, ImageBuffer, LabColor, Mask, Srgb8, WHITE};
use kmeans::{dedup_weighted, kmeans, nearest_center, KMeansParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMode {
    Value,
    Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaletteSource {
    Canvas,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaletteConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// L\* distance (value mode) or Lab distance (color mode) for region masks.
    pub region_threshold: f64,
    /// Value mode ignores pixels with L\* below this when clustering.
    pub extreme_low: f64,
    /// Value mode ignores pixels with L\* above this when clustering.
    pub extreme_high: f64,
    pub max_cluster_dim: u32,
}

impl Default for PaletteConfig {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            max_iterations: 100,
            tolerance: 1e-4,
            region_threshold: 5.0,
            extreme_low: 2.0,
            extreme_high: 98.0,
            max_cluster_dim: 512,
        }
    }
}

impl PaletteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("palette k must be ≥ 1".into()));
        }
        if !(self.region_threshold >= 0.0) || self.max_cluster_dim == 0 {
            return Err(Error::InvalidConfig("invalid region threshold or cluster size".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantCluster {
    #[serde(rename = "lab")]
    pub center_lab: LabColor,
    #[serde(rename = "srgb", with = "hex_color")]
    pub swatch_srgb: Srgb8,
    #[serde(rename = "fraction")]
    pub pixel_fraction: f64,
    pub bbox: BoundingBox,
    pub mode: ClusterMode,
    #[serde(rename = "contours", default)]
    pub region_contours: Vec<DenseContour>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub clusters: Vec<DominantCluster>,
    pub source: PaletteSource,
    pub k_requested: usize,
    pub mode: ClusterMode,
}

#[derive(Debug, Clone)]
pub struct RegionMask {
    pub mask: Mask,
    pub contours: Vec<DenseContour>,
    pub bbox: BoundingBox,
}

/// Per-pixel L\*a\*b\* of an image, computed once and shared by clustering
/// and region masks.
#[derive(Debug, Clone)]
pub struct LabImage {
    width: u32,
    height: u32,
    pixels: Vec<LabColor>,
}

impl LabImage {
    pub fn new(img: &ImageBuffer) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            pixels: img.pixels().iter().map(|&p| srgb_to_lab(p)).collect(),
        }
    }

    pub fn get(&self, x: u32, y: u32) -> LabColor {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn pixels(&self) -> &[LabColor] {
        &self.pixels
    }
}

pub fn extract_dominant(
    img: &ImageBuffer,
    mode: ClusterMode,
    source: PaletteSource,
    cfg: &PaletteConfig,
) -> Result<Palette> {
    extract_dominant_lab(&LabImage::new(img), mode, source, cfg)
}

pub fn extract_dominant_lab(
    lab: &LabImage,
    mode: ClusterMode,
    source: PaletteSource,
    cfg: &PaletteConfig,
) -> Result<Palette> {
    cfg.validate()?;
    let (samples, weights) = clustering_samples(lab, mode, cfg);
    if samples.is_empty() {
        return Err(Error::AllPixelsFiltered);
    }
    let (samples, weights) = dedup_weighted(&samples, &weights);
    let result = kmeans(
        &samples,
        &weights,
        &KMeansParams {
            k: cfg.k,
            seed: cfg.seed,
            max_iterations: cfg.max_iterations,
            tolerance: cfg.tolerance,
        },
    );

    let total = lab.pixels.len() as f64;
    let mut ranked: Vec<(LabColor, f64)> = result
        .centers
        .iter()
        .zip(&result.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(c, &w)| (*c, w / total))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.l.total_cmp(&b.0.l))
            .then(a.0.a.total_cmp(&b.0.a))
            .then(a.0.b.total_cmp(&b.0.b))
    });

    let mut clusters = Vec::with_capacity(ranked.len());
    for (center, fraction) in ranked {
        let center = match mode {
            ClusterMode::Value => center.neutral(),
            ClusterMode::Color => center,
        };
        // a center far from every pixel has no region to show; it is dropped
        let Ok(region) = region_mask_lab(lab, center, mode, cfg.region_threshold) else {
            continue;
        };
        clusters.push(DominantCluster {
            center_lab: center,
            swatch_srgb: lab_to_srgb(center),
            pixel_fraction: fraction,
            bbox: region.bbox,
            mode,
            region_contours: region.contours,
        });
    }
    if clusters.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(Palette {
        clusters,
        source,
        k_requested: cfg.k,
        mode,
    })
}

/// Clustering inputs: per-pixel Lab (chroma dropped and extremes filtered in
/// value mode), block-averaged when the image exceeds `max_cluster_dim`.
/// Weights count full-resolution pixels.
fn clustering_samples(lab: &LabImage, mode: ClusterMode, cfg: &PaletteConfig) -> (Vec<LabColor>, Vec<f64>) {
    let keep = |c: &LabColor| match mode {
        ClusterMode::Value => c.l >= cfg.extreme_low && c.l <= cfg.extreme_high,
        ClusterMode::Color => true,
    };
    let project = |c: &LabColor| match mode {
        ClusterMode::Value => c.neutral(),
        ClusterMode::Color => *c,
    };

    let largest = lab.width.max(lab.height);
    let block = largest.div_ceil(cfg.max_cluster_dim).max(1);
    if block == 1 {
        let samples: Vec<LabColor> = lab.pixels.iter().filter(|c| keep(c)).map(project).collect();
        let weights = vec![1.0; samples.len()];
        return (samples, weights);
    }

    let mut samples = Vec::new();
    let mut weights = Vec::new();
    for by in (0..lab.height).step_by(block as usize) {
        for bx in (0..lab.width).step_by(block as usize) {
            let mut acc = [0.0; 3];
            let mut n = 0.0;
            for y in by..(by + block).min(lab.height) {
                for x in bx..(bx + block).min(lab.width) {
                    let c = lab.get(x, y);
                    if keep(&c) {
                        let c = project(&c);
                        acc[0] += c.l;
                        acc[1] += c.a;
                        acc[2] += c.b;
                        n += 1.0;
                    }
                }
            }
            if n > 0.0 {
                samples.push(LabColor::new(acc[0] / n, acc[1] / n, acc[2] / n));
                weights.push(n);
            }
        }
    }
    (samples, weights)
}

/// Pixels within the region threshold of the cluster center, with their
/// outer contours and bounding box.
pub fn region_mask_for(img: &ImageBuffer, cluster: &DominantCluster, threshold: f64) -> Result<RegionMask> {
    region_mask_lab(&LabImage::new(img), cluster.center_lab, cluster.mode, threshold)
}

pub fn region_mask_lab(lab: &LabImage, center: LabColor, mode: ClusterMode, threshold: f64) -> Result<RegionMask> {
    let bits: Vec<bool> = match mode {
        ClusterMode::Value => lab.pixels.iter().map(|p| (p.l - center.l).abs() <= threshold).collect(),
        ClusterMode::Color => {
            let t2 = threshold * threshold;
            lab.pixels.iter().map(|p| p.distance_sq(&center) <= t2).collect()
        }
    };
    let mask = Mask::from_bits(lab.width, lab.height, bits)?;
    let contours = match extract_outer_contour(&mask) {
        Ok(c) => c,
        Err(Error::EmptyMask) => return Err(Error::EmptyRegion),
        Err(e) => return Err(e),
    };
    let bbox = bbox_of_contours(&contours)?;
    Ok(RegionMask {
        mask,
        contours,
        bbox,
    })
}

/// Keeps only the region of the dominant color nearest to the hovered pixel;
/// everything else turns white.
pub fn isolate_color_preview(reference: &ImageBuffer, palette: &Palette, x: i64, y: i64, threshold: f64) -> Result<ImageBuffer> {
    isolate_color_preview_lab(reference, &LabImage::new(reference), palette, x, y, threshold)
}

pub fn isolate_color_preview_lab(
    reference: &ImageBuffer,
    lab: &LabImage,
    palette: &Palette,
    x: i64,
    y: i64,
    threshold: f64,
) -> Result<ImageBuffer> {
    let (w, h) = reference.dimensions();
    if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: w,
            height: h,
        });
    }
    if palette.mode != ClusterMode::Color {
        return Err(Error::ModeMismatch);
    }
    if palette.clusters.is_empty() {
        return Err(Error::EmptyPalette);
    }
    let hovered = lab.get(x as u32, y as u32);
    let centers: Vec<LabColor> = palette.clusters.iter().map(|c| c.center_lab).collect();
    let (nearest, _) = nearest_center(&hovered, &centers);
    let region = region_mask_lab(lab, centers[nearest], ClusterMode::Color, threshold)?;

    let mut out = reference.clone();
    for (px, &inside) in out.pixels_mut().iter_mut().zip(region.mask.bits()) {
        if !inside {
            *px = WHITE;
        }
    }
    Ok(out)
}

mod hex_color {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::imagecore::color::{from_hex, to_hex};
    use crate::imagecore::Srgb8;

    pub fn serialize<S: Serializer>(c: &Srgb8, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_hex(*c))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Srgb8, D::Error> {
        let s = String::deserialize(d)?;
        from_hex(&s).ok_or_else(|| serde::de::Error::custom(format!("bad hex color `{s}`")))
    }
}
