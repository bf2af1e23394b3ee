use super::fmm::neighbors;
use super::InpaintConfig;
use crate::error::{Error, Result};
use crate::imgio::{BitMask, Image, CHANNELS};

/// Harmonic fill: pruned pixels solve the discrete Laplace equation with kept
/// pixels as Dirichlet data and replicated (zero-flux) image borders.
/// Jacobi sweeps run until the largest update falls below `cfg.tol`.
pub fn diffusion_inpaint(image: &Image, mask: &BitMask, cfg: &InpaintConfig) -> Result<Image> {
    super::check_shapes(image, mask)?;
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    let kept = mask.bits();
    let holes: Vec<usize> = (0..w * h).filter(|&i| !kept[i]).collect();
    if holes.is_empty() {
        return Ok(image.clone());
    }
    if holes.len() == w * h {
        return Err(Error::NoBoundary);
    }

    let mut mean = [0f64; CHANNELS];
    let n_kept = (w * h - holes.len()) as f64;
    for i in (0..w * h).filter(|&i| kept[i]) {
        for c in 0..CHANNELS {
            mean[c] += image.data()[i * CHANNELS + c] as f64 / n_kept;
        }
    }
    let mut cur: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
    for &i in &holes {
        cur[i * CHANNELS..(i + 1) * CHANNELS].copy_from_slice(&mean);
    }
    let mut next = cur.clone();
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_iters {
        change = 0.0;
        for &i in &holes {
            let mut acc = [0f64; CHANNELS];
            let mut count = 0.0;
            for j in neighbors(i, w, h) {
                count += 1.0;
                for c in 0..CHANNELS {
                    acc[c] += cur[j * CHANNELS + c];
                }
            }
            for c in 0..CHANNELS {
                let v = acc[c] / count;
                change = f64::max(change, (v - cur[i * CHANNELS + c]).abs());
                next[i * CHANNELS + c] = v;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        if change < cfg.tol {
            let out = cur
                .iter()
                .zip(image.data())
                .enumerate()
                .map(|(k, (&v, &orig))| {
                    if kept[k / CHANNELS] {
                        orig
                    } else {
                        (v as f32).clamp(0.0, 1.0)
                    }
                })
                .collect();
            return Image::new(w, h, out);
        }
    }
    Err(Error::NotConverged {
        iters: cfg.max_iters,
        change,
    })
}
