use std::path::{Path, PathBuf};
use std::time::Duration;

use super::wire::{SidecarRequest, SidecarResponse};
use super::{LabeledMask, MaskSource, SegmentationProvider, SegmentationRequest, SegmentationResult};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::imagecore::Mask;

/// A pixel belongs to the mask iff its center lies inside the box.
pub fn box_mask(width: u32, height: u32, bbox: &BoundingBox) -> Mask {
    Mask::from_fn(width, height, |x, y| {
        let cx = (x as f64 + 0.5) / width as f64;
        let cy = (y as f64 + 0.5) / height as f64;
        cx >= bbox.x_min && cx <= bbox.x_max && cy >= bbox.y_min && cy <= bbox.y_max
    })
}

fn user_box_masks(req: &SegmentationRequest, first_index: usize) -> Vec<LabeledMask> {
    let (w, h) = req.image.dimensions();
    req.boxes
        .iter()
        .enumerate()
        .map(|(i, b)| LabeledMask {
            mask: box_mask(w, h, b),
            label: format!("box {}", first_index + i),
            source: MaskSource::Box,
            confidence: 1.0,
        })
        .collect()
}

/// Fallback with no model: each user box becomes a filled rectangle mask.
/// Text prompts are ignored.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoxProvider;

impl SegmentationProvider for BoxProvider {
    fn name(&self) -> &str {
        "box"
    }

    fn run(&self, req: &SegmentationRequest) -> Result<SegmentationResult> {
        if req.boxes.is_empty() {
            return Err(Error::NoDetections);
        }
        Ok(SegmentationResult {
            masks: user_box_masks(req, 1),
            provider: self.name().into(),
        })
    }
}

/// Serves precomputed masks: every `<label>.png` in a directory, in file
/// name order, followed by masks for any user boxes.
#[derive(Debug, Clone)]
pub struct FileProvider {
    dir: PathBuf,
}

impl FileProvider {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        Self {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn mask_files(&self) -> Result<Vec<PathBuf>> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
            })
            .collect();
        files.sort();
        Ok(files)
    }
}

impl SegmentationProvider for FileProvider {
    fn name(&self) -> &str {
        "files"
    }

    fn run(&self, req: &SegmentationRequest) -> Result<SegmentationResult> {
        let mut masks = Vec::new();
        for path in self.mask_files()? {
            let bytes = std::fs::read(&path)?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            masks.push(LabeledMask {
                mask: Mask::from_png_bytes(&bytes)?,
                label,
                source: MaskSource::Text,
                confidence: 1.0,
            });
        }
        masks.extend(user_box_masks(req, 1));
        Ok(SegmentationResult {
            masks,
            provider: self.name().into(),
        })
    }
}

/// HTTP client for an external segmentation model.
#[derive(Debug, Clone)]
pub struct SidecarProvider {
    base_url: String,
    timeout: Duration,
}

impl SidecarProvider {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            timeout,
        }
    }

    pub fn endpoint(&self) -> String {
        format!("{}/segment", self.base_url)
    }
}

impl SegmentationProvider for SidecarProvider {
    fn name(&self) -> &str {
        "sidecar"
    }

    fn run(&self, req: &SegmentationRequest) -> Result<SegmentationResult> {
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let body = SidecarRequest::from_request(req);
        let response = match agent.post(&self.endpoint()).send_json(&body) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) if (400..500).contains(&code) => {
                let detail = r.into_string().unwrap_or_default();
                return Err(Error::InvalidRequest(format!("sidecar rejected request ({code}): {detail}")));
            }
            Err(ureq::Error::Status(code, _)) => {
                return Err(Error::ProviderUnavailable(format!("sidecar returned status {code}")));
            }
            Err(e) => return Err(Error::ProviderUnavailable(e.to_string())),
        };
        let parsed: SidecarResponse = response
            .into_json()
            .map_err(|e| Error::ProviderUnavailable(format!("malformed sidecar response: {e}")))?;
        let masks = parsed
            .masks
            .iter()
            .map(|m| m.decode())
            .collect::<Result<Vec<_>>>()?;
        Ok(SegmentationResult {
            masks,
            provider: self.name().into(),
        })
    }
}
