//! Raster containers, netpbm/PFM codecs and the input standardization step.
//!
//! Storage-domain images hold interleaved RGB `f32` samples in `[0, 1]`.
//! The renderer works on standardized [`NormImage`]s in `f64`.

mod netpbm;
mod pfm;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use netpbm::{decode_pgm, decode_ppm, encode_pgm, encode_ppm, read_pgm, read_ppm, write_pgm, write_ppm};
pub use pfm::{decode_pfm, encode_pfm_map, encode_pfm_rgb, read_pfm, read_pfm_map, write_pfm_map, write_pfm_rgb, Pfm};

pub const CHANNELS: usize = 3;

/// Interleaved RGB raster with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_len(width, height, CHANNELS, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image"));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "image sample {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Panics if any component is outside `[0, 1]`.
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        assert!(rgb.iter().all(|v| (0.0..=1.0).contains(v)), "sample out of range: {rgb:?}");
        let i = (y * self.width + x) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&rgb);
    }

    /// Rounds every sample to the nearest multiple of 1/255.
    pub fn quantized(&self) -> Self {
        let data = self
            .data
            .iter()
            .map(|&v| quantize_byte(v) as f32 / 255.0)
            .collect();
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }
}

pub(crate) fn quantize_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Standardized image; unbounded values, `f64` so gradients stay exact.
#[derive(Clone, Debug, PartialEq)]
pub struct NormImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl NormImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, CHANNELS, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("normalized image"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height * CHANNELS],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * CHANNELS + c]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * CHANNELS + c] = v;
    }

    pub fn same_shape(&self, other: &NormImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Single-channel `f32` raster (depth maps, importance maps).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar map"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn same_shape(&self, other: &ScalarMap) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Per-pixel keep flags: `true` keeps the pixel, `false` prunes it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_len(width, height, 1, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn all_kept(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn all_pruned(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_kept(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, keep: bool) {
        self.bits[y * self.width + x] = keep;
    }

    pub fn set_index(&mut self, index: usize, keep: bool) {
        self.bits[index] = keep;
    }

    pub fn kept_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn pruned_count(&self) -> usize {
        self.bits.len() - self.kept_count()
    }
}

/// Per-channel standardization constants, expressed in the `[0, 1]` domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            mean: [0.485, 0.456, 0.406],
            std: [0.229, 0.224, 0.225],
        }
    }
}

impl NormParams {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.std.iter().any(|s| !(*s > 0.0) || !s.is_finite())
            || self.mean.iter().any(|m| !m.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "norm params need finite mean and positive std, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// `(x - mean[c]) / std[c]` per channel.
pub fn preprocess(image: &Image, params: &NormParams) -> NormImage {
    let data = image
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = i % CHANNELS;
            (v as f64 - params.mean[c]) / params.std[c]
        })
        .collect();
    NormImage {
        width: image.width,
        height: image.height,
        data,
    }
}

/// Inverse of [`preprocess`], clamped back into `[0, 1]`.
pub fn depreprocess(image: &NormImage, params: &NormParams) -> Image {
    let data = image
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = i % CHANNELS;
            (v * params.std[c] + params.mean[c]).clamp(0.0, 1.0) as f32
        })
        .collect();
    Image {
        width: image.width,
        height: image.height,
        data,
    }
}

fn check_len(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::ShapeMismatch(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::ShapeMismatch(format!(
            "{width}x{height}x{channels} raster needs {expected} samples, got {len}"
        )));
    }
    Ok(())
}

/// Writes `bytes` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}
