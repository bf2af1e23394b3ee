use rayon::prelude::*;

use super::{
    BlendCache, RenderConfig, RenderResult, Renderer, SourceGradient, SourceView, Tap, TargetView,
};
use crate::error::{Error, Result};
use crate::imgio::{NormImage, ScalarMap, CHANNELS};
use crate::scenegen::NO_HIT;

/// Depth-guided reprojection renderer.
///
/// Every target pixel with known depth is lifted to 3D, projected into each
/// source, depth-tested against the source depth map and blended with
/// weights `exp(-alpha * angle - beta * distance)` normalized over the
/// sources that pass the test.
#[derive(Clone, Debug)]
pub struct ReprojectionRenderer {
    cfg: RenderConfig,
}

impl ReprojectionRenderer {
    pub const NAME: &'static str = "reprojection";

    pub fn new(cfg: RenderConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &RenderConfig {
        &self.cfg
    }

    /// Geometry-only half of the forward pass. Source images are not read.
    pub fn plan(&self, sources: &[SourceView<'_>], target: &TargetView<'_>) -> Result<BlendCache> {
        for s in sources {
            if !s.image.same_shape_as_map(s.depth) {
                return Err(Error::ShapeMismatch(format!(
                    "source {} image {}x{} vs depth {}x{}",
                    s.view_id,
                    s.image.width(),
                    s.image.height(),
                    s.depth.width(),
                    s.depth.height()
                )));
            }
        }
        let (width, height) = (target.depth.width(), target.depth.height());
        let target_center = target.camera.center();
        let centers: Vec<_> = sources.iter().map(|s| s.camera.center()).collect();

        let rows: Vec<Vec<Vec<Tap>>> = (0..height)
            .into_par_iter()
            .map(|y| {
                (0..width)
                    .map(|x| {
                        let z = target.depth.get(x, y);
                        if z == NO_HIT {
                            return Vec::new();
                        }
                        let point = target.camera.unproject(x as f64, y as f64, z as f64);
                        let target_ray = (point - target_center).normalize();
                        let mut taps = Vec::with_capacity(sources.len());
                        for (k, src) in sources.iter().enumerate() {
                            let Some((u, v, zk)) = src.camera.project(&point) else {
                                continue;
                            };
                            let Some((pixels, bilinear)) = footprint(u, v, src.depth) else {
                                continue;
                            };
                            let mut sampled = 0.0;
                            let mut valid = true;
                            for (&q, &b) in pixels.iter().zip(&bilinear) {
                                let d = src.depth.data()[q];
                                if d == NO_HIT && b > 0.0 {
                                    valid = false;
                                }
                                sampled += b * d as f64;
                            }
                            if !valid || (zk - sampled).abs() > self.cfg.visibility_tol * zk {
                                continue;
                            }
                            let source_ray = (point - centers[k]).normalize();
                            let angle = target_ray.dot(&source_ray).clamp(-1.0, 1.0).acos();
                            let distance = (centers[k] - target_center).norm();
                            let logit =
                                -self.cfg.angle_weight * angle - self.cfg.distance_weight * distance;
                            taps.push(Tap {
                                source: k,
                                weight: logit,
                                pixels,
                                bilinear,
                            });
                        }
                        normalize_weights(&mut taps);
                        taps
                    })
                    .collect()
            })
            .collect();

        let mut offsets = Vec::with_capacity(width * height + 1);
        let mut taps = Vec::new();
        offsets.push(0);
        for pixel_taps in rows.into_iter().flatten() {
            taps.extend(pixel_taps);
            offsets.push(taps.len());
        }
        Ok(BlendCache {
            width,
            height,
            offsets,
            taps,
            sources: sources
                .iter()
                .map(|s| (s.view_id, s.image.width(), s.image.height()))
                .collect(),
        })
    }
}

/// Turns stored logits into softmax weights.
fn normalize_weights(taps: &mut [Tap]) {
    let Some(max) = taps.iter().map(|t| t.weight).reduce(f64::max) else {
        return;
    };
    let mut sum = 0.0;
    for t in taps.iter_mut() {
        t.weight = (t.weight - max).exp();
        sum += t.weight;
    }
    for t in taps.iter_mut() {
        t.weight /= sum;
    }
}

/// Bilinear footprint of continuous position `(u, v)`, or `None` outside the
/// image. Pixel centers sit at integer coordinates.
pub(crate) fn footprint(u: f64, v: f64, map: &ScalarMap) -> Option<([usize; 4], [f64; 4])> {
    let (w, h) = (map.width(), map.height());
    if !(u >= 0.0 && v >= 0.0 && u <= (w - 1) as f64 && v <= (h - 1) as f64) {
        return None;
    }
    let x0 = (u.floor() as usize).min(w.saturating_sub(2));
    let y0 = (v.floor() as usize).min(h.saturating_sub(2));
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = u - x0 as f64;
    let fy = v - y0 as f64;
    Some((
        [y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1],
        [
            (1.0 - fx) * (1.0 - fy),
            fx * (1.0 - fy),
            (1.0 - fx) * fy,
            fx * fy,
        ],
    ))
}

impl Renderer for ReprojectionRenderer {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn forward(&self, sources: &[SourceView<'_>], target: &TargetView<'_>) -> Result<RenderResult> {
        let cache = self.plan(sources, target)?;
        let images: Vec<&NormImage> = sources.iter().map(|s| s.image).collect();
        let image = cache.composite(&images)?;
        Ok(RenderResult {
            image,
            hole_mask: cache.hole_mask(),
            cache,
        })
    }

    fn backward(&self, result: &RenderResult, target: &NormImage) -> Result<Vec<SourceGradient>> {
        let cache = &result.cache;
        if target.width() != cache.width
            || target.height() != cache.height
            || !result.image.same_shape(target)
        {
            return Err(Error::StaleCache(format!(
                "render is {}x{}, loss target is {}x{}",
                cache.width,
                cache.height,
                target.width(),
                target.height()
            )));
        }
        let kept = result.hole_mask.kept_count();
        if kept == 0 {
            return Err(Error::EmptyMask);
        }
        let scale = 2.0 / (kept * CHANNELS) as f64;
        let mut grads: Vec<NormImage> = cache
            .sources
            .iter()
            .map(|&(_, w, h)| NormImage::zeros(w, h))
            .collect();
        // Row-major over target pixels; every source buffer sees a fixed
        // accumulation order.
        for p in 0..cache.width * cache.height {
            let taps = cache.taps_at(p);
            if taps.is_empty() {
                continue;
            }
            let mut residual = [0f64; CHANNELS];
            for (c, r) in residual.iter_mut().enumerate() {
                *r = scale * (result.image.data()[p * CHANNELS + c] - target.data()[p * CHANNELS + c]);
            }
            for tap in taps {
                let g = grads[tap.source].data_mut();
                for (&q, &b) in tap.pixels.iter().zip(&tap.bilinear) {
                    let k = tap.weight * b;
                    for c in 0..CHANNELS {
                        g[q * CHANNELS + c] += k * residual[c];
                    }
                }
            }
        }
        Ok(cache
            .sources
            .iter()
            .zip(grads)
            .map(|(&(view_id, _, _), grad)| SourceGradient { view_id, grad })
            .collect())
    }
}

trait SameShapeAsMap {
    fn same_shape_as_map(&self, map: &ScalarMap) -> bool;
}

impl SameShapeAsMap for NormImage {
    fn same_shape_as_map(&self, map: &ScalarMap) -> bool {
        self.width() == map.width() && self.height() == map.height()
    }
}
