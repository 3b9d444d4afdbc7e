//! Raster container, color conversions, value images, blur and recoloring.

mod buffer;
pub mod color;
mod filter;
mod recolor;

pub use buffer::{ImageBuffer, Mask, Srgb8, WHITE};
pub use color::{
    convert_color, hsv_to_srgb, lab_to_hsv, lab_to_srgb, srgb_to_hsv, srgb_to_lab, ColorSpace,
    ConvertedColor, HsvColor, LabColor,
};
pub use filter::{
    apply_blur, gaussian_kernel, laplacian_variance, lightness_to_gray, to_value_image, BlurFilter,
    BlurSpec, DEFAULT_RANGE_SIGMA, MAX_KERNEL, MIN_KERNEL,
};
pub use recolor::recolor_region;
