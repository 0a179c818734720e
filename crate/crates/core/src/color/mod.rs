//! Dominant-color extraction.
//!
//! An image's pixels are clustered with k-means in RGB space; the largest
//! cluster gives the dominant hex code, which is then mapped to a cool, warm
//! or neutral class by a fixed HSV rule ([`PerceptualRule`]).

mod kmeans;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::schema::ColorClass;

pub use kmeans::kmeans_palette;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ColorError {
    #[error("no pixels to cluster")]
    EmptyInput,
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("invalid clustering parameters: {0}")]
    InvalidParams(String),
    #[error("no clusters given")]
    NoClusters,
    #[error("color channel {0} outside [0, 255]")]
    OutOfRange(f64),
    #[error("pixel buffer of {len} bytes does not match {width}x{height} RGB")]
    BufferSize { width: u32, height: u32, len: usize },
    #[error("cannot decode image {path}: {message}")]
    Decode { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct Pixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Pixel {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Pixel { r, g, b }
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.r as f64, self.g as f64, self.b as f64]
    }
}

impl From<[u8; 3]> for Pixel {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Pixel { r, g, b }
    }
}

impl From<Pixel> for [u8; 3] {
    fn from(p: Pixel) -> Self {
        [p.r, p.g, p.b]
    }
}

/// Decoded 8-bit RGB raster, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelBuffer {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl PixelBuffer {
    pub fn from_rgb8(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ColorError> {
        if data.len() != width as usize * height as usize * 3 {
            return Err(ColorError::BufferSize { width, height, len: data.len() });
        }
        Ok(PixelBuffer { width, height, data })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: &[Pixel]) -> Result<Self, ColorError> {
        let data = pixels.iter().flat_map(|p| [p.r, p.g, p.b]).collect();
        Self::from_rgb8(width, height, data)
    }

    pub fn decode_file(path: &Path) -> Result<Self, ColorError> {
        let decode_err =
            |e: image::ImageError| ColorError::Decode { path: path.display().to_string(), message: e.to_string() };
        let img = image::ImageReader::open(path)
            .map_err(|e| ColorError::Decode { path: path.display().to_string(), message: e.to_string() })?
            .with_guessed_format()
            .map_err(|e| ColorError::Decode { path: path.display().to_string(), message: e.to_string() })?
            .decode()
            .map_err(decode_err)?
            .to_rgb8();
        let (width, height) = img.dimensions();
        Self::from_rgb8(width, height, img.into_raw())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> Vec<Pixel> {
        self.data.chunks_exact(3).map(|c| Pixel::new(c[0], c[1], c[2])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorCluster {
    pub centroid: [f64; 3],
    pub proportion: f64,
}

/// Whether a profile's class came from the HSV rule or a coder's override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassSource {
    #[default]
    Computed,
    Manual,
}

impl ClassSource {
    fn is_computed(&self) -> bool {
        *self == ClassSource::Computed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorProfile {
    pub clusters: Vec<ColorCluster>,
    pub dominant_hex: String,
    pub perceptual_class: ColorClass,
    #[serde(default, skip_serializing_if = "ClassSource::is_computed")]
    pub class_source: ClassSource,
}

impl ColorProfile {
    /// Replace the computed class with a coder's choice.
    pub fn with_manual_class(mut self, class: ColorClass) -> Self {
        self.perceptual_class = class;
        self.class_source = ClassSource::Manual;
        self
    }
}

/// Hue and saturation/value thresholds of the perceptual classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptualRule {
    /// Below this saturation a color is neutral.
    pub min_saturation: f64,
    /// Below this value (brightness) a color is neutral.
    pub min_value: f64,
    /// Warm hues are `[0, warm_hue_end)` and `[warm_hue_start, 360)`.
    pub warm_hue_end: f64,
    pub warm_hue_start: f64,
}

impl Default for PerceptualRule {
    fn default() -> Self {
        PerceptualRule { min_saturation: 0.15, min_value: 0.15, warm_hue_end: 90.0, warm_hue_start: 330.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColorParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Images are subsampled with a uniform stride down to this many pixels.
    pub max_pixels: usize,
}

impl Default for ColorParams {
    fn default() -> Self {
        ColorParams { k: 5, seed: 0, max_iter: 100, tol: 1e-4, max_pixels: 10_000 }
    }
}

fn check_range(c: [f64; 3]) -> Result<(), ColorError> {
    match c.iter().find(|ch| !(0.0..=255.0).contains(*ch)) {
        Some(&bad) => Err(ColorError::OutOfRange(bad)),
        None => Ok(()),
    }
}

/// `#RRGGBB`, uppercase, each channel rounded half up.
pub fn rgb_to_hex(c: [f64; 3]) -> Result<String, ColorError> {
    check_range(c)?;
    let [r, g, b] = c.map(|ch| (ch + 0.5).floor() as u8);
    Ok(format!("#{r:02X}{g:02X}{b:02X}"))
}

pub(crate) fn is_hex_code(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s[1..].bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b))
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
pub fn rgb_to_hsv(c: [f64; 3]) -> (f64, f64, f64) {
    let [r, g, b] = c.map(|ch| ch / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let value = max;
    let saturation = if max > 0.0 { delta / max } else { 0.0 };
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (hue.rem_euclid(360.0), saturation, value)
}

pub fn classify_with(rule: &PerceptualRule, c: [f64; 3]) -> Result<ColorClass, ColorError> {
    check_range(c)?;
    let (hue, saturation, value) = rgb_to_hsv(c);
    Ok(if saturation < rule.min_saturation || value < rule.min_value {
        ColorClass::Neutral
    } else if hue < rule.warm_hue_end || hue >= rule.warm_hue_start {
        ColorClass::Warm
    } else {
        ColorClass::Cool
    })
}

/// Classification under the default [`PerceptualRule`].
pub fn classify_perceptual(c: [f64; 3]) -> Result<ColorClass, ColorError> {
    classify_with(&PerceptualRule::default(), c)
}

/// The largest cluster; equal proportions resolve to the smaller hex code.
pub fn dominant_cluster(clusters: &[ColorCluster]) -> Result<ColorCluster, ColorError> {
    clusters
        .iter()
        .copied()
        .reduce(|best, c| {
            if c.proportion > best.proportion
                || (c.proportion == best.proportion && kmeans::hex_key(&c) < kmeans::hex_key(&best))
            {
                c
            } else {
                best
            }
        })
        .ok_or(ColorError::NoClusters)
}

/// Uniform-stride subsample down to at most `max` pixels.
pub fn downsample(pixels: &[Pixel], max: usize) -> Vec<Pixel> {
    if max == 0 || pixels.len() <= max {
        return pixels.to_vec();
    }
    let stride = pixels.len().div_ceil(max);
    pixels.iter().step_by(stride).copied().collect()
}

pub fn extract_profile(pixels: &[Pixel], params: &ColorParams) -> Result<ColorProfile, ColorError> {
    let sample = downsample(pixels, params.max_pixels);
    let clusters = kmeans_palette(&sample, params.k, params.seed, params.max_iter, params.tol)?;
    let dominant = dominant_cluster(&clusters)?;
    Ok(ColorProfile {
        dominant_hex: rgb_to_hex(dominant.centroid)?,
        perceptual_class: classify_perceptual(dominant.centroid)?,
        clusters,
        class_source: ClassSource::Computed,
    })
}
