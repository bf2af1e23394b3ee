use crate::error::{Error, Result};
use crate::imgio::{Image, CHANNELS};

fn check_pair(a: &Image, b: &Image) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB over all channels. Identical images give
/// `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image, peak: f64) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.data().len() as f64;
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            peak: 1.0,
        }
    }
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps(window: usize, sigma: f64) -> Vec<f64> {
    let c = (window as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..window)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Channel-mean luma as f64.
pub fn luma(image: &Image) -> Vec<f64> {
    image
        .data()
        .chunks_exact(CHANNELS)
        .map(|p| p.iter().map(|&v| v as f64).sum::<f64>() / CHANNELS as f64)
        .collect()
}

/// Valid-only separable filtering of a `w`x`h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * plane[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity over every fully contained window of the
/// luma planes.
pub fn ssim(a: &Image, b: &Image, params: &SsimParams) -> Result<f64> {
    check_pair(a, b)?;
    let (w, h) = (a.width(), a.height());
    if params.window == 0 || w < params.window || h < params.window {
        return Err(Error::InvalidArgument(format!(
            "image {w}x{h} is smaller than the {}x{} SSIM window",
            params.window, params.window
        )));
    }
    let taps = gaussian_taps(params.window, params.sigma);
    let la = luma(a);
    let lb = luma(b);
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).collect::<Vec<f64>>();
    let mu_a = filter_valid(&la, w, h, &taps);
    let mu_b = filter_valid(&lb, w, h, &taps);
    let aa = filter_valid(&prod(&la, &la), w, h, &taps);
    let bb = filter_valid(&prod(&lb, &lb), w, h, &taps);
    let ab = filter_valid(&prod(&la, &lb), w, h, &taps);
    let c1 = (params.k1 * params.peak).powi(2);
    let c2 = (params.k2 * params.peak).powi(2);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_closed_forms() {
        let a = Image::filled(4, 4, [0.25; 3]);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
        let b = Image::filled(4, 4, [0.75; 3]);
        assert!((psnr(&a, &b, 1.0).unwrap() - 6.020599913279624).abs() < 1e-9);
        let c = Image::filled(4, 4, [0.25 + 1.0 / 255.0; 3]);
        assert!((psnr(&a, &c, 1.0).unwrap() - 48.1308036086791).abs() < 1e-4);
        assert!(psnr(&a, &Image::filled(3, 4, [0.0; 3]), 1.0).is_err());
    }

    #[test]
    fn taps_are_normalized_and_symmetric() {
        let t = gaussian_taps(11, 1.5);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(t[0], t[10]);
        assert!(t[5] > t[4]);
    }

    #[test]
    fn ssim_basic_cases() {
        let p = SsimParams::default();
        let a = Image::filled(16, 16, [0.0; 3]);
        let b = Image::filled(16, 16, [1.0; 3]);
        assert!((ssim(&a, &a, &p).unwrap() - 1.0).abs() < 1e-12);
        let s = ssim(&a, &b, &p).unwrap();
        assert!(s < 0.01, "{s}");
        assert!(ssim(&Image::filled(10, 16, [0.0; 3]), &Image::filled(10, 16, [0.0; 3]), &p).is_err());
    }
}
