#![allow(dead_code)]

use lehopp_core::evalkit::{gaussian_taps, luma, SsimParams};
use lehopp_core::imgio::{preprocess, Image, NormImage};
use lehopp_core::renderer::{mse_loss, RenderConfig, Renderer, ReprojectionRenderer, SourceView, TargetView};
use lehopp_core::scenegen::{generate_scene, SceneSpec, Texture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest `|analytic - fd| / max(|fd|, 1e-8)` over all channels of
/// `n_pixels` random source pixels, plus how many of those pixels carried a
/// nonzero gradient. The scene has three views; the middle one is the
/// target and its two neighbors are the sources.
pub fn gradient_fd_check(seed: u64, size: usize, n_pixels: usize, h: f64) -> (f64, usize) {
    let spec = SceneSpec::desk(seed, size, size, 3, 1);
    let views = generate_scene(&spec).unwrap();
    let params = spec.norm_params.unwrap_or_default();
    let norm: Vec<NormImage> = views.iter().map(|v| preprocess(&v.image, &params)).collect();
    let renderer = ReprojectionRenderer::new(RenderConfig::default()).unwrap();
    let sources: Vec<SourceView> = [0usize, 2]
        .iter()
        .map(|&i| SourceView {
            view_id: i,
            image: &norm[i],
            depth: &views[i].depth,
            camera: &views[i].camera,
        })
        .collect();
    let target = TargetView {
        camera: &views[1].camera,
        depth: &views[1].depth,
    };
    let result = renderer.forward(&sources, &target).unwrap();
    assert!(!result.all_holes());
    let grads = renderer.backward(&result, &norm[1]).unwrap();
    let mask = result.cache.hole_mask();

    let loss_with = |src: usize, x: usize, y: usize, c: usize, delta: f64| -> f64 {
        let mut imgs = [norm[0].clone(), norm[2].clone()];
        let v = imgs[src].get(x, y, c);
        imgs[src].set(x, y, c, v + delta);
        let out = result.cache.composite(&[&imgs[0], &imgs[1]]).unwrap();
        mse_loss(&out, &norm[1], &mask).unwrap()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFD);
    let mut worst = 0f64;
    let mut nonzero = 0;
    for _ in 0..n_pixels {
        let src = rng.random_range(0..2usize);
        let x = rng.random_range(0..size);
        let y = rng.random_range(0..size);
        let mut any = false;
        for c in 0..3 {
            let analytic = grads[src].grad.get(x, y, c);
            let fd = (loss_with(src, x, y, c, h) - loss_with(src, x, y, c, -h)) / (2.0 * h);
            any |= analytic != 0.0;
            worst = worst.max((analytic - fd).abs() / fd.abs().max(1e-8));
        }
        nonzero += usize::from(any);
    }
    (worst, nonzero)
}

/// Direct double-loop SSIM: every window position, every window tap.
pub fn naive_ssim(a: &Image, b: &Image, p: &SsimParams) -> f64 {
    let (w, h) = (a.width(), a.height());
    let taps = gaussian_taps(p.window, p.sigma);
    let (la, lb) = (luma(a), luma(b));
    let c1 = (p.k1 * p.peak).powi(2);
    let c2 = (p.k2 * p.peak).powi(2);
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - p.window {
        for x0 in 0..=w - p.window {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for j in 0..p.window {
                for i in 0..p.window {
                    let wt = taps[i] * taps[j];
                    let k = (y0 + j) * w + x0 + i;
                    ma += wt * la[k];
                    mb += wt * lb[k];
                    saa += wt * la[k] * la[k];
                    sbb += wt * lb[k] * lb[k];
                    sab += wt * la[k] * lb[k];
                }
            }
            let va = saa - ma * ma;
            let vb = sbb - mb * mb;
            let cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    total / count as f64
}

/// Seeded uniform noise image.
pub fn noise_image(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::new(w, h, (0..w * h * 3).map(|_| rng.random::<f32>()).collect()).unwrap()
}

/// 3x3 box blur with clamped borders.
pub fn box_blur(img: &Image) -> Image {
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f32; 3];
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                    let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                    let p = img.pixel(sx, sy);
                    for c in 0..3 {
                        acc[c] += p[c] / 9.0;
                    }
                }
            }
            out.set_pixel(x, y, acc.map(|v| v.clamp(0.0, 1.0)));
        }
    }
    out
}

/// The desk scene with every surface painted the background gray, so every
/// image is uniform.
pub fn flat_spec(seed: u64, size: usize, views: usize) -> SceneSpec {
    let mut spec = SceneSpec::desk(seed, size, size, views, 1);
    for p in &mut spec.primitives {
        p.texture = Texture::Checker {
            scale: 1.0,
            color_a: [0.5; 3],
            color_b: [0.5; 3],
        };
    }
    spec
}
