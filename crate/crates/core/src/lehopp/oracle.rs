use std::collections::BTreeMap;

use super::inpaint_proxy;
use crate::error::{Error, Result};
use crate::imgio::{preprocess, NormImage, NormParams, CHANNELS};
use crate::renderer::{mse_loss, select_sources, BlendCache, ReprojectionRenderer, SourceView, TargetView};
use crate::scenegen::GroundTruthView;

/// `sum_c |grad_c| * |x_c - x_inp_c|` at one pixel; the same quantity the
/// importance map holds there.
pub fn first_order_estimate(
    grad: &NormImage,
    x: &NormImage,
    x_inp: &NormImage,
    pixel: (usize, usize),
) -> f64 {
    let (px, py) = pixel;
    (0..CHANNELS)
        .map(|c| grad.get(px, py, c).abs() * (x.get(px, py, c) - x_inp.get(px, py, c)).abs())
        .sum()
}

/// One target render with its geometry already planned.
#[derive(Clone, Debug)]
pub struct OracleTarget {
    pub target_id: usize,
    pub truth: NormImage,
    pub source_ids: Vec<usize>,
    pub cache: BlendCache,
}

/// Exact loss change from replacing a single source pixel by its 8-neighbor
/// mean, found by re-rendering every target.
pub struct DeltaLossOracle {
    images: BTreeMap<usize, NormImage>,
    proxies: BTreeMap<usize, NormImage>,
    targets: Vec<(OracleTarget, f64)>,
}

impl DeltaLossOracle {
    pub fn new(images: BTreeMap<usize, NormImage>, targets: Vec<OracleTarget>) -> Result<Self> {
        let proxies = images.iter().map(|(&id, img)| (id, inpaint_proxy(img))).collect();
        let mut with_base = Vec::with_capacity(targets.len());
        for t in targets {
            let base = loss_of(&t, &images, None)?;
            with_base.push((t, base));
        }
        Ok(Self {
            images,
            proxies,
            targets: with_base,
        })
    }

    /// Plans every listed target of a single frame from ground-truth views.
    pub fn from_views(
        views: &[GroundTruthView],
        targets: &[usize],
        renderer: &ReprojectionRenderer,
        params: &NormParams,
    ) -> Result<Self> {
        let images: BTreeMap<usize, NormImage> = views
            .iter()
            .map(|v| (v.view_id, preprocess(&v.image, params)))
            .collect();
        let cams: Vec<_> = views.iter().map(|v| (v.view_id, v.camera)).collect();
        let mut planned = Vec::new();
        for &t in targets {
            let tv = views
                .iter()
                .find(|v| v.view_id == t)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown target view {t}")))?;
            let sel = select_sources(t, &tv.camera, &cams, renderer.config().n_src)?;
            let sources: Vec<SourceView> = sel
                .source_ids
                .iter()
                .map(|id| {
                    let v = views.iter().find(|v| v.view_id == *id).expect("selected from views");
                    SourceView {
                        view_id: v.view_id,
                        image: &images[&v.view_id],
                        depth: &v.depth,
                        camera: &v.camera,
                    }
                })
                .collect();
            let cache = renderer.plan(&sources, &TargetView {
                camera: &tv.camera,
                depth: &tv.depth,
            })?;
            planned.push(OracleTarget {
                target_id: t,
                truth: images[&t].clone(),
                source_ids: sel.source_ids,
                cache,
            });
        }
        Self::new(images, planned)
    }

    pub fn image(&self, view_id: usize) -> Option<&NormImage> {
        self.images.get(&view_id)
    }

    pub fn proxy(&self, view_id: usize) -> Option<&NormImage> {
        self.proxies.get(&view_id)
    }

    /// `L_after - L_before` averaged over all targets.
    pub fn delta_loss(&self, view_id: usize, pixel: (usize, usize)) -> Result<f64> {
        let proxy = self
            .proxies
            .get(&view_id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown source view {view_id}")))?;
        let (x, y) = pixel;
        if x >= proxy.width() || y >= proxy.height() {
            return Err(Error::InvalidArgument(format!("pixel {pixel:?} outside view {view_id}")));
        }
        let value = [0, 1, 2].map(|c| proxy.get(x, y, c));
        let mut sum = 0.0;
        for (t, base) in &self.targets {
            let after = if t.source_ids.contains(&view_id) {
                loss_of(t, &self.images, Some((view_id, x, y, value)))?
            } else {
                *base
            };
            sum += after - base;
        }
        Ok(sum / self.targets.len() as f64)
    }
}

fn loss_of(
    target: &OracleTarget,
    images: &BTreeMap<usize, NormImage>,
    patch: Option<(usize, usize, usize, [f64; 3])>,
) -> Result<f64> {
    let patched = patch.map(|(id, x, y, value)| {
        let mut img = images[&id].clone();
        for (c, v) in value.into_iter().enumerate() {
            img.set(x, y, c, v);
        }
        (id, img)
    });
    let srcs: Vec<&NormImage> = target
        .source_ids
        .iter()
        .map(|id| match &patched {
            Some((pid, img)) if pid == id => img,
            _ => &images[id],
        })
        .collect();
    let rendered = target.cache.composite(&srcs)?;
    mse_loss(&rendered, &target.truth, &target.cache.hole_mask())
}

/// Spearman rank correlation; tied values share their average rank.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("rank correlation needs at least two samples".into()));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end share their mean
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}
