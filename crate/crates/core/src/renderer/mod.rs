//! Differentiable image-based rendering.
//!
//! A [`Renderer`] synthesizes a target view from standardized source images
//! and returns a [`RenderResult`] that carries enough state to run the exact
//! reverse pass. The renderer is linear in source colors: blend weights
//! depend only on geometry.

mod reprojection;
mod select;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{BitMask, NormImage, ScalarMap, CHANNELS};
use crate::scenegen::Camera;

pub use reprojection::ReprojectionRenderer;
pub use select::{select_sources, ViewSelection};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub n_src: usize,
    /// Penalty per radian between target and source viewing rays.
    pub angle_weight: f64,
    /// Penalty per scene unit of camera-center distance.
    pub distance_weight: f64,
    /// Relative depth tolerance of the visibility test.
    pub visibility_tol: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            n_src: 9,
            angle_weight: 1.0,
            distance_weight: 1.0,
            visibility_tol: 0.01,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_src == 0 {
            return Err(Error::InvalidArgument("n_src must be at least 1".into()));
        }
        if !(self.angle_weight >= 0.0 && self.distance_weight >= 0.0) {
            return Err(Error::InvalidArgument("blend weights must be non-negative".into()));
        }
        if !(self.visibility_tol > 0.0) {
            return Err(Error::InvalidArgument("visibility tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A source view as seen by the renderer.
#[derive(Clone, Copy, Debug)]
pub struct SourceView<'a> {
    pub view_id: usize,
    pub image: &'a NormImage,
    pub depth: &'a ScalarMap,
    pub camera: &'a Camera,
}

/// Geometry of the view to synthesize.
#[derive(Clone, Copy, Debug)]
pub struct TargetView<'a> {
    pub camera: &'a Camera,
    pub depth: &'a ScalarMap,
}

/// One source contribution to one target pixel: a blend weight and a
/// bilinear footprint of four source pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    /// Index into the source list passed to the renderer.
    pub source: usize,
    pub weight: f64,
    pub pixels: [usize; 4],
    pub bilinear: [f64; 4],
}

/// Per-target-pixel contributions, stored compressed: taps of pixel `p` are
/// `taps[offsets[p]..offsets[p + 1]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlendCache {
    pub width: usize,
    pub height: usize,
    pub offsets: Vec<usize>,
    pub taps: Vec<Tap>,
    /// `(view_id, width, height)` of every source, in input order.
    pub sources: Vec<(usize, usize, usize)>,
}

impl BlendCache {
    pub fn taps_at(&self, pixel: usize) -> &[Tap] {
        &self.taps[self.offsets[pixel]..self.offsets[pixel + 1]]
    }

    pub fn hole_mask(&self) -> BitMask {
        let bits = (0..self.width * self.height)
            .map(|p| self.offsets[p + 1] > self.offsets[p])
            .collect();
        BitMask::new(self.width, self.height, bits).expect("cache dimensions are consistent")
    }

    /// Blends `images` (one per source, same order as at planning time).
    pub fn composite(&self, images: &[&NormImage]) -> Result<NormImage> {
        if images.len() != self.sources.len() {
            return Err(Error::StaleCache(format!(
                "cache planned for {} sources, got {}",
                self.sources.len(),
                images.len()
            )));
        }
        for (img, &(id, w, h)) in images.iter().zip(&self.sources) {
            if img.width() != w || img.height() != h {
                return Err(Error::StaleCache(format!(
                    "source {id} is {}x{}, cache expects {w}x{h}",
                    img.width(),
                    img.height()
                )));
            }
        }
        let mut out = NormImage::zeros(self.width, self.height);
        let data = out.data_mut();
        for p in 0..self.width * self.height {
            let mut acc = [0f64; CHANNELS];
            for tap in self.taps_at(p) {
                let src = images[tap.source].data();
                for (&q, &b) in tap.pixels.iter().zip(&tap.bilinear) {
                    let k = tap.weight * b;
                    for c in 0..CHANNELS {
                        acc[c] += k * src[q * CHANNELS + c];
                    }
                }
            }
            data[p * CHANNELS..(p + 1) * CHANNELS].copy_from_slice(&acc);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct RenderResult {
    pub image: NormImage,
    /// Kept (`true`) where at least one source contributed.
    pub hole_mask: BitMask,
    pub cache: BlendCache,
}

impl RenderResult {
    /// True when no target pixel received any contribution.
    pub fn all_holes(&self) -> bool {
        self.hole_mask.kept_count() == 0
    }
}

/// Gradient of the loss with respect to one source image, channel-interleaved.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceGradient {
    pub view_id: usize,
    pub grad: NormImage,
}

pub trait Renderer: Send + Sync {
    fn name(&self) -> &'static str;

    fn forward(&self, sources: &[SourceView<'_>], target: &TargetView<'_>) -> Result<RenderResult>;

    /// Gradient of [`mse_loss`] over the hole mask, evaluated at `result`.
    fn backward(&self, result: &RenderResult, target: &NormImage) -> Result<Vec<SourceGradient>>;
}

/// Mean of `(y - t)^2` over masked pixels and all channels.
pub fn mse_loss(y: &NormImage, t: &NormImage, mask: &BitMask) -> Result<f64> {
    if !y.same_shape(t) || mask.width() != y.width() || mask.height() != y.height() {
        return Err(Error::ShapeMismatch(format!(
            "loss inputs {}x{}, {}x{} and mask {}x{}",
            y.width(),
            y.height(),
            t.width(),
            t.height(),
            mask.width(),
            mask.height()
        )));
    }
    let kept = mask.kept_count();
    if kept == 0 {
        return Err(Error::EmptyMask);
    }
    let mut sum = 0.0;
    for (p, _) in mask.bits().iter().enumerate().filter(|(_, &k)| k) {
        for c in 0..CHANNELS {
            let d = y.data()[p * CHANNELS + c] - t.data()[p * CHANNELS + c];
            sum += d * d;
        }
    }
    Ok(sum / (kept * CHANNELS) as f64)
}

pub fn by_name(name: &str, cfg: RenderConfig) -> Result<Box<dyn Renderer>> {
    match name {
        ReprojectionRenderer::NAME => Ok(Box::new(ReprojectionRenderer::new(cfg)?)),
        other => Err(Error::UnknownStrategy {
            kind: "renderer",
            name: other.to_string(),
        }),
    }
}

pub const RENDERERS: &[&str] = &[ReprojectionRenderer::NAME];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_examples() {
        let y = NormImage::new(2, 1, vec![0.5; 6]).unwrap();
        let t = NormImage::zeros(2, 1);
        let full = BitMask::all_kept(2, 1);
        assert_eq!(mse_loss(&y, &y, &full).unwrap(), 0.0);
        assert_eq!(mse_loss(&y, &t, &full).unwrap(), 0.25);

        let y = NormImage::new(2, 1, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let half = BitMask::new(2, 1, vec![true, false]).unwrap();
        assert_eq!(mse_loss(&y, &t, &half).unwrap(), 1.0);
        assert!(matches!(
            mse_loss(&y, &t, &BitMask::all_pruned(2, 1)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn unknown_renderer() {
        assert!(by_name("ibrnet", RenderConfig::default()).is_err());
        assert_eq!(by_name("reprojection", RenderConfig::default()).unwrap().name(), "reprojection");
    }
}
