use super::buffer::{ImageBuffer, Mask};
use super::color::{hsv_to_srgb, srgb_to_hsv, HsvColor};
use crate::error::{Error, Result};

/// Replaces hue and saturation inside `region`, keeping each pixel's HSV value.
pub fn recolor_region(img: &ImageBuffer, region: &Mask, hue: f64, sat: f64) -> Result<ImageBuffer> {
    if region.dimensions() != img.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: img.dimensions(),
            actual: region.dimensions(),
        });
    }
    let sat = sat.clamp(0.0, 1.0);
    let mut out = img.clone();
    for (px, &inside) in out.pixels_mut().iter_mut().zip(region.bits()) {
        if inside {
            let v = srgb_to_hsv(*px).v;
            *px = hsv_to_srgb(HsvColor::new(hue, sat, v));
        }
    }
    Ok(out)
}
