use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit sRGB triple.
pub type Srgb8 = [u8; 3];

pub const WHITE: Srgb8 = [255, 255, 255];

/// Owned raster of sRGB pixels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<Srgb8>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<Srgb8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if pixels.len() as u64 != width as u64 * height as u64 {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (pixels.len() as u32, 1),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, color: Srgb8) -> Result<Self> {
        Self::new(width, height, vec![color; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Srgb8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Srgb8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Srgb8] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Srgb8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Pixel lookup with coordinates clamped to the image edge.
    pub fn get_clamped(&self, x: i64, y: i64) -> Srgb8 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.pixels[y * self.width as usize + x]
    }

    pub fn set(&mut self, x: u32, y: u32, value: Srgb8) {
        let idx = y as usize * self.width as usize + x as usize;
        self.pixels[idx] = value;
    }

    /// Decodes PNG bytes. Alpha is composited over white.
    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
            .map_err(|e| Error::BadImage(e.to_string()))?;
        Ok(Self::from_dynamic(decoded))
    }

    /// Like [`from_png_bytes`](Self::from_png_bytes), but rejects images with
    /// more than `max_pixels` pixels before decoding the pixel data.
    pub fn from_png_bytes_limited(bytes: &[u8], max_pixels: u64) -> Result<Self> {
        let (w, h) = image::ImageReader::with_format(Cursor::new(bytes), ImageFormat::Png)
            .into_dimensions()
            .map_err(|e| Error::BadImage(e.to_string()))?;
        let pixels = w as u64 * h as u64;
        if pixels > max_pixels {
            return Err(Error::TooLarge {
                pixels,
                limit: max_pixels,
            });
        }
        Self::from_png_bytes(bytes)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_png_bytes(&bytes)
    }

    pub fn from_dynamic(img: image::DynamicImage) -> Self {
        let rgba = img.to_rgba8();
        let (width, height) = rgba.dimensions();
        let pixels = rgba
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0;
                let alpha = a as u32;
                let over = |c: u8| ((c as u32 * alpha + 255 * (255 - alpha) + 127) / 255) as u8;
                [over(r), over(g), over(b)]
            })
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        let mut out = RgbImage::new(self.width, self.height);
        for (dst, src) in out.pixels_mut().zip(&self.pixels) {
            *dst = Rgb(*src);
        }
        out
    }

    pub fn to_png_bytes(&self) -> Vec<u8> {
        let mut buf = Cursor::new(Vec::new());
        self.to_rgb_image()
            .write_to(&mut buf, ImageFormat::Png)
            .expect("PNG encoding into memory cannot fail");
        buf.into_inner()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png_bytes())?;
        Ok(())
    }

    /// Resamples onto a `width`×`height` frame. When aspect ratios differ the
    /// image is scaled to fit and centered on a white background.
    pub fn letterbox(&self, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if (width, height) == self.dimensions() {
            return Ok(self.clone());
        }
        let scale = f64::min(
            width as f64 / self.width as f64,
            height as f64 / self.height as f64,
        );
        let fit_w = ((self.width as f64 * scale).round() as u32).clamp(1, width);
        let fit_h = ((self.height as f64 * scale).round() as u32).clamp(1, height);
        let off_x = (width - fit_w) / 2;
        let off_y = (height - fit_h) / 2;
        let sx = self.width as f64 / fit_w as f64;
        let sy = self.height as f64 / fit_h as f64;

        ImageBuffer::from_fn(width, height, |x, y| {
            if x < off_x || y < off_y || x >= off_x + fit_w || y >= off_y + fit_h {
                return WHITE;
            }
            let u = ((x - off_x) as f64 + 0.5) * sx - 0.5;
            let v = ((y - off_y) as f64 + 0.5) * sy - 0.5;
            self.sample_bilinear(u, v)
        })
    }

    fn sample_bilinear(&self, u: f64, v: f64) -> Srgb8 {
        let x0 = u.floor();
        let y0 = v.floor();
        let fx = u - x0;
        let fy = v - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let p00 = self.get_clamped(x0, y0);
        let p10 = self.get_clamped(x0 + 1, y0);
        let p01 = self.get_clamped(x0, y0 + 1);
        let p11 = self.get_clamped(x0 + 1, y0 + 1);
        let mut out = [0u8; 3];
        for c in 0..3 {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
        }
        out
    }
}

/// Binary raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() as u64 != width as u64 * height as u64 {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (bits.len() as u32, 1),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-range coordinates read as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let idx = y as usize * self.width as usize + x as usize;
        self.bits[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Decodes a grayscale (or color, reduced to luma) PNG; foreground is value ≥ 128.
    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
            .map_err(|e| Error::BadImage(e.to_string()))?;
        let gray = decoded.to_luma8();
        let (width, height) = gray.dimensions();
        let bits = gray.pixels().map(|p| p.0[0] >= 128).collect();
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn to_png_bytes(&self) -> Vec<u8> {
        let mut gray = image::GrayImage::new(self.width, self.height);
        for (dst, &bit) in gray.pixels_mut().zip(&self.bits) {
            *dst = Luma([if bit { 255 } else { 0 }]);
        }
        let mut buf = Cursor::new(Vec::new());
        gray.write_to(&mut buf, ImageFormat::Png)
            .expect("PNG encoding into memory cannot fail");
        buf.into_inner()
    }

    /// Nearest-neighbour resize.
    pub fn resized(&self, width: u32, height: u32) -> Self {
        if (width, height) == self.dimensions() {
            return self.clone();
        }
        Mask::from_fn(width, height, |x, y| {
            let sx = ((x as f64 + 0.5) * self.width as f64 / width as f64) as u32;
            let sy = ((y as f64 + 0.5) * self.height as f64 / height as f64) as u32;
            self.get(sx.min(self.width - 1), sy.min(self.height - 1))
        })
    }
}
