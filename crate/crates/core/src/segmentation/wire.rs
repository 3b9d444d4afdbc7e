//! JSON wire format spoken with the segmentation sidecar.
//!
//! `POST {base}/segment` with a [`SidecarRequest`]; the sidecar answers with a
//! [`SidecarResponse`]. Images and masks travel as base64-encoded PNG.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{LabeledMask, MaskSource, SegmentationRequest};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::imagecore::Mask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarRequest {
    pub image_png_b64: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarMask {
    pub png_b64: String,
    pub label: String,
    pub source: MaskSource,
    #[serde(default = "one")]
    pub confidence: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarResponse {
    pub masks: Vec<SidecarMask>,
}

impl SidecarRequest {
    pub fn from_request(req: &SegmentationRequest) -> Self {
        Self {
            image_png_b64: STANDARD.encode(req.image.to_png_bytes()),
            text_prompt: req.has_prompt().then(|| req.text_prompt.clone().unwrap_or_default()),
            boxes: req.boxes.clone(),
        }
    }
}

impl SidecarMask {
    pub fn from_mask(m: &LabeledMask) -> Self {
        Self {
            png_b64: STANDARD.encode(m.mask.to_png_bytes()),
            label: m.label.clone(),
            source: m.source,
            confidence: m.confidence,
        }
    }

    pub fn decode(&self) -> Result<LabeledMask> {
        let bytes = STANDARD
            .decode(self.png_b64.as_bytes())
            .map_err(|e| Error::BadImage(format!("mask is not valid base64: {e}")))?;
        Ok(LabeledMask {
            mask: Mask::from_png_bytes(&bytes)?,
            label: self.label.clone(),
            source: self.source,
            confidence: self.confidence,
        })
    }
}
