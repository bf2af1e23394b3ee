mod common;

use lehopp_core::imgio::{preprocess, NormImage};
use lehopp_core::renderer::{RenderConfig, Renderer, ReprojectionRenderer, SourceView, TargetView};
use lehopp_core::scenegen::{generate_scene, SceneSpec};

#[test]
fn analytic_gradient_matches_finite_differences() {
    let (err, nonzero) = common::gradient_fd_check(21, 64, 200, 1e-3);
    assert!(err <= 1e-4, "max relative error {err:e}");
    assert!(nonzero > 20, "only {nonzero} sampled pixels carry gradient");
}

#[test]
fn render_is_linear_in_source_colors() {
    let spec = SceneSpec::desk(4, 32, 32, 3, 1);
    let views = generate_scene(&spec).unwrap();
    let params = spec.norm_params.unwrap_or_default();
    let x: Vec<NormImage> = views.iter().map(|v| preprocess(&v.image, &params)).collect();
    let x2: Vec<NormImage> = x
        .iter()
        .map(|img| {
            let mut o = img.clone();
            o.data_mut().iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64 * 0.37).sin() - 0.3 * *v);
            o
        })
        .collect();
    let renderer = ReprojectionRenderer::new(RenderConfig::default()).unwrap();
    let target = TargetView {
        camera: &views[1].camera,
        depth: &views[1].depth,
    };
    let render = |imgs: &[NormImage]| {
        let sources: Vec<SourceView> = [0usize, 2]
            .iter()
            .map(|&i| SourceView {
                view_id: i,
                image: &imgs[i],
                depth: &views[i].depth,
                camera: &views[i].camera,
            })
            .collect();
        renderer.forward(&sources, &target).unwrap().image
    };
    let (a, b) = (1.7, -0.6);
    let mixed: Vec<NormImage> = x
        .iter()
        .zip(&x2)
        .map(|(p, q)| {
            let mut o = p.clone();
            o.data_mut().iter_mut().zip(q.data()).for_each(|(v, w)| *v = a * *v + b * w);
            o
        })
        .collect();
    let (y, y2, ym) = (render(&x), render(&x2), render(&mixed));
    for i in 0..ym.data().len() {
        assert!((ym.data()[i] - (a * y.data()[i] + b * y2.data()[i])).abs() < 1e-6);
    }
}

#[test]
fn unsampled_source_pixels_get_zero_gradient() {
    let spec = SceneSpec::desk(6, 32, 32, 3, 1);
    let views = generate_scene(&spec).unwrap();
    let params = spec.norm_params.unwrap_or_default();
    let x: Vec<NormImage> = views.iter().map(|v| preprocess(&v.image, &params)).collect();
    let renderer = ReprojectionRenderer::new(RenderConfig::default()).unwrap();
    let sources: Vec<SourceView> = [0usize, 2]
        .iter()
        .map(|&i| SourceView {
            view_id: i,
            image: &x[i],
            depth: &views[i].depth,
            camera: &views[i].camera,
        })
        .collect();
    let result = renderer
        .forward(&sources, &TargetView {
            camera: &views[1].camera,
            depth: &views[1].depth,
        })
        .unwrap();
    let grads = renderer.backward(&result, &x[1]).unwrap();
    let mut touched = vec![vec![false; 32 * 32]; 2];
    for tap in &result.cache.taps {
        for (p, b) in tap.pixels.iter().zip(tap.bilinear) {
            if b != 0.0 {
                touched[tap.source][*p] = true;
            }
        }
    }
    let mut untouched = 0;
    for (s, g) in grads.iter().enumerate() {
        for p in 0..32 * 32 {
            if !touched[s][p] {
                untouched += 1;
                assert!((0..3).all(|c| g.grad.data()[p * 3 + c] == 0.0));
            }
        }
    }
    assert!(untouched > 0);
}
