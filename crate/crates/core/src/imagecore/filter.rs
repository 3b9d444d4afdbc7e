//! Grayscale value images and the blur filters used for value guidance.
//!
//! All filters read outside the image with clamp-to-edge.

use serde::{Deserialize, Serialize};

use super::buffer::{ImageBuffer, Srgb8};
use super::color::srgb_to_lab;
use crate::error::{Error, Result};

pub const MIN_KERNEL: f64 = 1.5;
pub const MAX_KERNEL: f64 = 4.9;
pub const DEFAULT_RANGE_SIGMA: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlurFilter {
    Gaussian,
    Bilateral,
    Median,
}

impl std::str::FromStr for BlurFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(BlurFilter::Gaussian),
            "bilateral" => Ok(BlurFilter::Bilateral),
            "median" => Ok(BlurFilter::Median),
            other => Err(format!("unknown blur filter `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    pub filter: BlurFilter,
    pub kernel_size: f64,
    /// Range sigma of the bilateral filter in 8-bit units.
    #[serde(default = "default_range_sigma")]
    pub range_sigma: f64,
}

fn default_range_sigma() -> f64 {
    DEFAULT_RANGE_SIGMA
}

impl Default for BlurSpec {
    fn default() -> Self {
        Self {
            filter: BlurFilter::Gaussian,
            kernel_size: 2.0,
            range_sigma: DEFAULT_RANGE_SIGMA,
        }
    }
}

impl BlurSpec {
    pub fn new(filter: BlurFilter, kernel_size: f64) -> Result<Self> {
        let spec = Self {
            filter,
            kernel_size,
            range_sigma: DEFAULT_RANGE_SIGMA,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_KERNEL..=MAX_KERNEL).contains(&self.kernel_size) {
            return Err(Error::InvalidKernel(self.kernel_size));
        }
        if !(self.range_sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bilateral range sigma must be positive, got {}",
                self.range_sigma
            )));
        }
        Ok(())
    }

    /// Side length of the filter window.
    pub fn window(&self) -> usize {
        match self.filter {
            BlurFilter::Gaussian => 2 * gaussian_radius(self.kernel_size) + 1,
            BlurFilter::Median | BlurFilter::Bilateral => odd_window(self.kernel_size),
        }
    }
}

fn gaussian_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

/// Nearest odd integer ≥ 2k + 1.
fn odd_window(kernel_size: f64) -> usize {
    let w = (2.0 * kernel_size + 1.0).ceil() as usize;
    if w % 2 == 0 {
        w + 1
    } else {
        w
    }
}

/// Gray level of each pixel taken from L\*, mapped linearly onto [0, 255].
pub fn to_value_image(img: &ImageBuffer) -> ImageBuffer {
    let mut out = img.clone();
    for px in out.pixels_mut() {
        let g = lightness_to_gray(srgb_to_lab(*px).l);
        *px = [g, g, g];
    }
    out
}

pub fn lightness_to_gray(l: f64) -> u8 {
    (255.0 * l / 100.0).round().clamp(0.0, 255.0) as u8
}

pub fn apply_blur(img: &ImageBuffer, spec: &BlurSpec) -> Result<ImageBuffer> {
    spec.validate()?;
    Ok(match spec.filter {
        BlurFilter::Gaussian => gaussian(img, spec.kernel_size),
        BlurFilter::Median => median(img, spec.window() / 2),
        BlurFilter::Bilateral => bilateral(img, spec.window() / 2, spec.kernel_size, spec.range_sigma),
    })
}

/// Normalized 1-D Gaussian taps for `sigma`, window 2·ceil(3σ)+1.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = gaussian_radius(sigma) as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

fn gaussian(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let taps = gaussian_kernel(sigma);
    let radius = (taps.len() / 2) as i64;
    let (w, h) = (img.width() as usize, img.height() as usize);

    // horizontal pass into floats, vertical pass back to 8-bit
    let mut tmp = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, t) in taps.iter().enumerate() {
                let px = img.get_clamped(x as i64 + k as i64 - radius, y as i64);
                for c in 0..3 {
                    acc[c] += t * px[c] as f64;
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = img.clone();
    let pixels = out.pixels_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, t) in taps.iter().enumerate() {
                let sy = (y as i64 + k as i64 - radius).clamp(0, h as i64 - 1) as usize;
                let v = tmp[sy * w + x];
                for c in 0..3 {
                    acc[c] += t * v[c];
                }
            }
            pixels[y * w + x] = to_u8(acc);
        }
    }
    out
}

fn to_u8(v: [f64; 3]) -> Srgb8 {
    [
        v[0].round().clamp(0.0, 255.0) as u8,
        v[1].round().clamp(0.0, 255.0) as u8,
        v[2].round().clamp(0.0, 255.0) as u8,
    ]
}

/// Sliding-histogram median, one histogram per channel.
fn median(img: &ImageBuffer, radius: usize) -> ImageBuffer {
    let r = radius as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let half = ((2 * r + 1) * (2 * r + 1)) as u32 / 2;
    let mut out = img.clone();

    for y in 0..h {
        let mut hist = [[0u32; 256]; 3];
        for dy in -r..=r {
            for dx in -r..=r {
                let px = img.get_clamped(dx, y + dy);
                for c in 0..3 {
                    hist[c][px[c] as usize] += 1;
                }
            }
        }
        for x in 0..w {
            if x > 0 {
                for dy in -r..=r {
                    let leaving = img.get_clamped(x - r - 1, y + dy);
                    let entering = img.get_clamped(x + r, y + dy);
                    for c in 0..3 {
                        hist[c][leaving[c] as usize] -= 1;
                        hist[c][entering[c] as usize] += 1;
                    }
                }
            }
            let mut px = [0u8; 3];
            for c in 0..3 {
                let mut seen = 0;
                for (v, &n) in hist[c].iter().enumerate() {
                    seen += n;
                    if seen > half {
                        px[c] = v as u8;
                        break;
                    }
                }
            }
            out.set(x as u32, y as u32, px);
        }
    }
    out
}

fn bilateral(img: &ImageBuffer, radius: usize, spatial_sigma: f64, range_sigma: f64) -> ImageBuffer {
    let r = radius as i64;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / (2.0 * spatial_sigma * spatial_sigma)).exp())
        .collect();
    let range_denom = 2.0 * range_sigma * range_sigma;
    let mut out = img.clone();

    for y in 0..img.height() as i64 {
        for x in 0..img.width() as i64 {
            let center = img.get(x as u32, y as u32);
            let mut acc = [0.0; 3];
            let mut norm = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let px = img.get_clamped(x + dx, y + dy);
                    let d2: f64 = (0..3)
                        .map(|c| {
                            let d = px[c] as f64 - center[c] as f64;
                            d * d
                        })
                        .sum();
                    let wgt = spatial[k] * (-d2 / range_denom).exp();
                    k += 1;
                    norm += wgt;
                    for c in 0..3 {
                        acc[c] += wgt * px[c] as f64;
                    }
                }
            }
            out.set(x as u32, y as u32, to_u8(acc.map(|v| v / norm)));
        }
    }
    out
}

/// Variance of the 4-neighbour Laplacian over the first channel; a
/// high-frequency energy measure for blur comparisons.
pub fn laplacian_variance(img: &ImageBuffer) -> f64 {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut values = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let c = img.get_clamped(x, y)[0] as f64;
            let lap = img.get_clamped(x - 1, y)[0] as f64
                + img.get_clamped(x + 1, y)[0] as f64
                + img.get_clamped(x, y - 1)[0] as f64
                + img.get_clamped(x, y + 1)[0] as f64
                - 4.0 * c;
            values.push(lap);
        }
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}
