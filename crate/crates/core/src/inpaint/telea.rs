use super::fmm::march;
use super::InpaintConfig;
use crate::error::Result;
use crate::imgio::{BitMask, Image, CHANNELS};

/// Fast-marching inpainting after Telea.
///
/// Pruned pixels are visited in increasing arrival time. Each is set to a
/// normalized weighted mean of the known pixels (kept or already filled)
/// within `radius`, with weight `dir * dst * lev`:
/// `dir` = alignment of the offset with the marching normal, `dst` =
/// inverse squared distance, `lev` = closeness in arrival time. Only
/// positive weights are used, so every fill is a convex combination.
pub fn telea_inpaint(image: &Image, mask: &BitMask, cfg: &InpaintConfig) -> Result<Image> {
    super::check_shapes(image, mask)?;
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    let m = march(mask)?;
    if m.order.is_empty() {
        return Ok(image.clone());
    }
    let time = &m.time;
    let mut known: Vec<bool> = mask.bits().to_vec();
    let mut data: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
    let radius = cfg.radius as i64;
    let r2 = (cfg.radius * cfg.radius) as i64;

    for &p in &m.order {
        let (px, py) = ((p % w) as i64, (p / w) as i64);
        let (nx, ny) = normal(time, w, h, px as usize, py as usize);
        let mut acc = [0f64; CHANNELS];
        let mut total = 0.0;
        for qy in (py - radius).max(0)..=(py + radius).min(h as i64 - 1) {
            for qx in (px - radius).max(0)..=(px + radius).min(w as i64 - 1) {
                let q = qy as usize * w + qx as usize;
                let (rx, ry) = (px - qx, py - qy);
                let d2 = rx * rx + ry * ry;
                if !known[q] || d2 == 0 || d2 > r2 {
                    continue;
                }
                let len = (d2 as f64).sqrt();
                let dir = ((rx as f64 * nx + ry as f64 * ny) / len).abs().max(1e-6);
                let dst = 1.0 / d2 as f64;
                let lev = 1.0 / (1.0 + (time[q] - time[p]).abs());
                let wgt = dir * dst * lev;
                total += wgt;
                for c in 0..CHANNELS {
                    acc[c] += wgt * data[q * CHANNELS + c];
                }
            }
        }
        debug_assert!(total > 0.0, "marching order guarantees a known neighbor");
        for c in 0..CHANNELS {
            data[p * CHANNELS + c] = acc[c] / total;
        }
        known[p] = true;
    }

    let out = data
        .iter()
        .zip(image.data())
        .enumerate()
        .map(|(i, (&v, &orig))| {
            if mask.bits()[i / CHANNELS] {
                orig
            } else {
                (v as f32).clamp(0.0, 1.0)
            }
        })
        .collect();
    Image::new(w, h, out)
}

/// Unit gradient of the arrival time at `(x, y)`, or zero when flat.
fn normal(time: &[f64], w: usize, h: usize, x: usize, y: usize) -> (f64, f64) {
    let t = |x: usize, y: usize| time[y * w + x];
    let gx = match (x > 0, x + 1 < w) {
        (true, true) => (t(x + 1, y) - t(x - 1, y)) / 2.0,
        (false, true) => t(x + 1, y) - t(x, y),
        (true, false) => t(x, y) - t(x - 1, y),
        (false, false) => 0.0,
    };
    let gy = match (y > 0, y + 1 < h) {
        (true, true) => (t(x, y + 1) - t(x, y - 1)) / 2.0,
        (false, true) => t(x, y + 1) - t(x, y),
        (true, false) => t(x, y) - t(x, y - 1),
        (false, false) => 0.0,
    };
    let norm = (gx * gx + gy * gy).sqrt();
    if norm > 0.0 && norm.is_finite() {
        (gx / norm, gy / norm)
    } else {
        (0.0, 0.0)
    }
}
