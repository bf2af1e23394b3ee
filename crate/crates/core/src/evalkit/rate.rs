use serde::Serialize;

use crate::error::{Error, Result};
use crate::lehopp::check_gamma;

/// Decoder pixel-rate ceiling in megapixels per second at the reference
/// frame rate; other frame rates scale it linearly.
pub const PIXEL_RATE_LIMIT_MPXS: f64 = 32.0;
pub const REFERENCE_FPS: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PixelRateReport {
    pub views: usize,
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub gamma: f64,
    pub raw_mpx_s: f64,
    pub pruned_mpx_s: f64,
    pub limit_mpx_s: f64,
    pub within_limit: bool,
}

pub fn pixel_rate(views: usize, width: usize, height: usize, fps: f64, gamma: f64) -> Result<PixelRateReport> {
    if views == 0 || width == 0 || height == 0 || !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::InvalidArgument(
            "pixel rate needs positive view count, size and frame rate".into(),
        ));
    }
    check_gamma(gamma)?;
    let raw = (views * width * height) as f64 * fps / 1e6;
    let pruned = raw * (1.0 - gamma);
    let limit = PIXEL_RATE_LIMIT_MPXS * fps / REFERENCE_FPS;
    Ok(PixelRateReport {
        views,
        width,
        height,
        fps,
        gamma,
        raw_mpx_s: raw,
        pruned_mpx_s: pruned,
        limit_mpx_s: limit,
        within_limit: pruned <= limit,
    })
}
