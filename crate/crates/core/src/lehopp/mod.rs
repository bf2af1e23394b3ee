//! Learned pixel pruning: per-pixel importance from rendering-loss gradients
//! and quantile masks built from it.
//!
//! The importance of source pixel `(u, v)` is
//! `sum_c |dL/dX(u, v, c)| * |X(u, v, c) - X_inp(u, v, c)|`, a first-order
//! estimate of how much the target loss moves when the pixel is replaced by
//! its inpainted approximation. Gradient magnitudes are averaged over the
//! target renders a view took part in, the products are summed over the
//! frames of an intra-period, and the lowest-scoring fraction `gamma` of
//! pixels is pruned.

mod accum;
mod histogram;
mod importance;
mod mask;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{NormImage, ScalarMap, CHANNELS};

pub use accum::{accumulate_frames, AccumState};
pub use histogram::{importance_histogram, Histogram, HistogramBin, HISTOGRAM_BINS};
pub use importance::{compute_importance, ImportanceRun};
pub use mask::{apply_mask, build_mask, build_masks};
pub use oracle::{first_order_estimate, rank_correlation, DeltaLossOracle, OracleTarget};

#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMap {
    pub view_id: usize,
    pub map: ScalarMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    PerView,
    Global,
}

impl std::str::FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-view" => Ok(Scope::PerView),
            "global" => Ok(Scope::Global),
            other => Err(Error::InvalidArgument(format!(
                "scope must be per-view or global, got '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Fill {
    #[default]
    Inpaint,
    Hold,
}

impl Fill {
    /// Name of the registered inpainter implementing this policy.
    pub fn inpainter(self) -> &'static str {
        match self {
            Fill::Inpaint => "telea",
            Fill::Hold => "hold",
        }
    }
}

impl std::str::FromStr for Fill {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inpaint" => Ok(Fill::Inpaint),
            "hold" | "hold-value" => Ok(Fill::Hold),
            other => Err(Error::InvalidArgument(format!(
                "fill must be inpaint or hold, got '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub gamma: f64,
    pub scope: Scope,
    pub intra_period: usize,
    pub fill: Fill,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            scope: Scope::PerView,
            intra_period: 16,
            fill: Fill::Inpaint,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.intra_period < 1 {
            return Err(Error::InvalidArgument("intra period must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(())
}

/// Number of pixels pruned out of `n` at fraction `gamma`.
pub fn prune_count(gamma: f64, n: usize) -> usize {
    ((gamma * n as f64).round() as usize).min(n)
}

/// Mean of the 8 neighbors per channel, borders replicated. The sum is
/// pairwise, so flat neighborhoods reproduce their value exactly.
pub fn inpaint_proxy(image: &NormImage) -> NormImage {
    const OFFSETS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
    let (w, h) = (image.width(), image.height());
    let mut out = NormImage::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            for c in 0..CHANNELS {
                let n = OFFSETS.map(|(dx, dy)| {
                    let nx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                    let ny = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                    image.get(nx, ny, c)
                });
                let sum = ((n[0] + n[1]) + (n[2] + n[3])) + ((n[4] + n[5]) + (n[6] + n[7]));
                out.set(x, y, c, sum / 8.0);
            }
        }
    }
    out
}

/// Channel-summed `|grad| * |x - x_inp|` per pixel, in `f64`.
pub fn importance_values(grad_abs: &NormImage, x: &NormImage, x_inp: &NormImage) -> Result<Vec<f64>> {
    if !grad_abs.same_shape(x) || !x.same_shape(x_inp) {
        return Err(Error::ShapeMismatch(format!(
            "gradient {}x{}, image {}x{}, proxy {}x{}",
            grad_abs.width(),
            grad_abs.height(),
            x.width(),
            x.height(),
            x_inp.width(),
            x_inp.height()
        )));
    }
    let g = grad_abs.data();
    let a = x.data();
    let b = x_inp.data();
    Ok((0..x.width() * x.height())
        .map(|p| {
            (0..CHANNELS)
                .map(|c| {
                    let i = p * CHANNELS + c;
                    g[i].abs() * (a[i] - b[i]).abs()
                })
                .sum()
        })
        .collect())
}

pub fn importance_single(
    view_id: usize,
    grad_abs: &NormImage,
    x: &NormImage,
    x_inp: &NormImage,
) -> Result<ImportanceMap> {
    let values = importance_values(grad_abs, x, x_inp)?;
    Ok(ImportanceMap {
        view_id,
        map: ScalarMap::new(
            x.width(),
            x.height(),
            values.into_iter().map(|v| v as f32).collect(),
        )?,
    })
}
