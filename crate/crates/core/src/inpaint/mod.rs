//! Filling pruned pixels before rendering.
//!
//! Every fill strategy implements [`Inpainter`] and is registered by name:
//! `telea` (fast marching, used by the pipeline), `diffusion` (harmonic
//! reference) and `hold` (constant mid-gray, for ablations).

mod diffusion;
mod fmm;
mod telea;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{BitMask, Image};

pub use diffusion::diffusion_inpaint;
pub use fmm::fmm_distance;
pub use telea::telea_inpaint;

/// Value written into pruned pixels by the `hold` strategy.
pub const HOLD_VALUE: f32 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InpaintConfig {
    pub radius: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        Self {
            radius: 3,
            max_iters: 10_000,
            tol: 1e-6,
        }
    }
}

impl InpaintConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radius < 1 {
            return Err(Error::InvalidArgument("inpaint radius must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("diffusion tolerance must be positive".into()));
        }
        Ok(())
    }
}

pub trait Inpainter: Send + Sync {
    fn name(&self) -> &'static str;

    /// Returns `image` with pruned pixels replaced; kept pixels are copied
    /// bit for bit.
    fn inpaint(&self, image: &Image, mask: &BitMask) -> Result<Image>;
}

pub struct Telea(pub InpaintConfig);

impl Inpainter for Telea {
    fn name(&self) -> &'static str {
        "telea"
    }

    fn inpaint(&self, image: &Image, mask: &BitMask) -> Result<Image> {
        telea_inpaint(image, mask, &self.0)
    }
}

pub struct Diffusion(pub InpaintConfig);

impl Inpainter for Diffusion {
    fn name(&self) -> &'static str {
        "diffusion"
    }

    fn inpaint(&self, image: &Image, mask: &BitMask) -> Result<Image> {
        diffusion_inpaint(image, mask, &self.0)
    }
}

pub struct HoldValue;

impl Inpainter for HoldValue {
    fn name(&self) -> &'static str {
        "hold"
    }

    fn inpaint(&self, image: &Image, mask: &BitMask) -> Result<Image> {
        check_shapes(image, mask)?;
        let mut out = image.clone();
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                if !mask.is_kept(x, y) {
                    out.set_pixel(x, y, [HOLD_VALUE; 3]);
                }
            }
        }
        Ok(out)
    }
}

pub const INPAINTERS: &[&str] = &["telea", "diffusion", "hold"];

pub fn by_name(name: &str, cfg: InpaintConfig) -> Result<Box<dyn Inpainter>> {
    cfg.validate()?;
    match name {
        "telea" => Ok(Box::new(Telea(cfg))),
        "diffusion" => Ok(Box::new(Diffusion(cfg))),
        "hold" => Ok(Box::new(HoldValue)),
        other => Err(Error::UnknownStrategy {
            kind: "inpainter",
            name: other.to_string(),
        }),
    }
}

pub(crate) fn check_shapes(image: &Image, mask: &BitMask) -> Result<()> {
    if image.width() != mask.width() || image.height() != mask.height() {
        return Err(Error::ShapeMismatch(format!(
            "image {}x{} vs mask {}x{}",
            image.width(),
            image.height(),
            mask.width(),
            mask.height()
        )));
    }
    Ok(())
}
