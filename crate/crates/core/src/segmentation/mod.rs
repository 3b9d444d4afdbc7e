//! Segmentation providers: (image, text prompt, boxes) → labeled masks.
//!
//! Three backends ship here. [`BoxProvider`] fills each user box (it cannot
//! detect from text), [`FileProvider`] serves precomputed `<label>.png` masks
//! from a directory, and [`SidecarProvider`] forwards requests to a model
//! sidecar over HTTP.

mod providers;
pub mod wire;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::imagecore::{ImageBuffer, Mask};

pub use providers::{box_mask, BoxProvider, FileProvider, SidecarProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSource {
    Text,
    Box,
}

#[derive(Debug, Clone)]
pub struct SegmentationRequest {
    pub image: ImageBuffer,
    /// Comma-separated object nouns.
    pub text_prompt: Option<String>,
    pub boxes: Vec<BoundingBox>,
}

impl SegmentationRequest {
    pub fn has_prompt(&self) -> bool {
        self.text_prompt.as_deref().is_some_and(|p| !p.trim().is_empty())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.has_prompt() && self.boxes.is_empty() {
            return Err(Error::InvalidRequest("need a text prompt or at least one box".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMask {
    pub mask: Mask,
    pub label: String,
    pub source: MaskSource,
    /// Detector confidence; 1.0 for user boxes and file masks.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub masks: Vec<LabeledMask>,
    pub provider: String,
}

pub trait SegmentationProvider: Send + Sync {
    fn name(&self) -> &str;

    /// Raw provider call; [`segment`] adds validation and post-checks.
    fn run(&self, request: &SegmentationRequest) -> Result<SegmentationResult>;
}

/// Runs a provider, conforming every mask to the image size and reporting
/// an empty result as [`Error::NoDetections`].
pub fn segment(request: &SegmentationRequest, provider: &dyn SegmentationProvider) -> Result<SegmentationResult> {
    request.validate()?;
    let mut result = provider.run(request)?;
    let (w, h) = request.image.dimensions();
    for m in &mut result.masks {
        if m.mask.dimensions() != (w, h) {
            m.mask = m.mask.resized(w, h);
        }
        if m.label.trim().is_empty() {
            m.label = "object".into();
        }
    }
    if result.masks.is_empty() {
        return Err(Error::NoDetections);
    }
    Ok(result)
}

/// Text-derived entries first, then user entries, each tagged with its
/// source. Duplicates are kept.
pub fn merge_box_sources<T: Clone>(text_boxes: &[T], user_boxes: &[T]) -> Vec<(T, MaskSource)> {
    text_boxes
        .iter()
        .map(|b| (b.clone(), MaskSource::Text))
        .chain(user_boxes.iter().map(|b| (b.clone(), MaskSource::Box)))
        .collect()
}

/// Provider selection, as read from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderConfig {
    Box,
    Files { dir: std::path::PathBuf },
    Sidecar {
        url: String,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
    },
}

fn default_timeout_secs() -> u64 {
    30
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Box
    }
}

impl ProviderConfig {
    pub fn build(&self) -> Box<dyn SegmentationProvider> {
        match self {
            ProviderConfig::Box => Box::new(BoxProvider),
            ProviderConfig::Files { dir } => Box::new(FileProvider::new(dir)),
            ProviderConfig::Sidecar { url, timeout_secs } => Box::new(SidecarProvider::new(
                url,
                std::time::Duration::from_secs(*timeout_secs),
            )),
        }
    }
}
