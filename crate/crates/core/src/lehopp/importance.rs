use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{accumulate_frames, importance_single, inpaint_proxy, AccumState, ImportanceMap};
use crate::error::{Error, Result};
use crate::imgio::{preprocess, NormImage, NormParams};
use crate::renderer::{select_sources, Renderer, SourceGradient, SourceView, TargetView};
use crate::scenegen::GroundTruthView;

/// Importance maps of one run.
#[derive(Clone, Debug)]
pub struct ImportanceRun {
    /// Per-frame maps, frame-major, each list sorted by view id.
    pub per_frame: Vec<(usize, Vec<ImportanceMap>)>,
    /// Frame sums per intra-period, indexed by period.
    pub periods: Vec<Vec<ImportanceMap>>,
}

/// Forward render every target from its nearest sources, back-propagate the
/// MSE against the target's own image, average `|dL/dX|` per source view,
/// weight by the proxy residual and sum over each intra-period.
pub fn compute_importance(
    views: &[GroundTruthView],
    targets: &[usize],
    renderer: &dyn Renderer,
    n_src: usize,
    params: &NormParams,
    intra_period: usize,
) -> Result<ImportanceRun> {
    if intra_period == 0 {
        return Err(Error::InvalidArgument("intra period must be at least 1".into()));
    }
    let mut targets = targets.to_vec();
    targets.sort_unstable();
    targets.dedup();
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target views".into()));
    }

    let mut frames: BTreeMap<usize, Vec<&GroundTruthView>> = BTreeMap::new();
    for v in views {
        frames.entry(v.frame_id).or_default().push(v);
    }
    let mut per_frame = Vec::with_capacity(frames.len());
    for (&frame_id, frame_views) in frames.iter_mut() {
        frame_views.sort_by_key(|v| v.view_id);
        let maps = frame_importance(frame_views, &targets, renderer, n_src, params)?;
        per_frame.push((frame_id, maps));
    }

    let mut grouped: BTreeMap<usize, Vec<&(usize, Vec<ImportanceMap>)>> = BTreeMap::new();
    for entry in &per_frame {
        grouped.entry(entry.0 / intra_period).or_default().push(entry);
    }
    let n_periods = grouped.keys().next_back().map_or(0, |p| p + 1);
    let mut periods = vec![Vec::new(); n_periods];
    for (period, entries) in grouped {
        let view_ids: Vec<usize> = entries[0].1.iter().map(|m| m.view_id).collect();
        let mut summed = Vec::with_capacity(view_ids.len());
        for id in view_ids {
            let maps: Vec<ImportanceMap> = entries
                .iter()
                .map(|(_, maps)| {
                    maps.iter()
                        .find(|m| m.view_id == id)
                        .cloned()
                        .ok_or_else(|| Error::InvalidArgument(format!("view {id} missing in a frame")))
                })
                .collect::<Result<_>>()?;
            summed.push(accumulate_frames(&maps, intra_period)?);
        }
        periods[period] = summed;
    }
    Ok(ImportanceRun { per_frame, periods })
}

fn frame_importance(
    views: &[&GroundTruthView],
    targets: &[usize],
    renderer: &dyn Renderer,
    n_src: usize,
    params: &NormParams,
) -> Result<Vec<ImportanceMap>> {
    let norm: Vec<NormImage> = views.iter().map(|v| preprocess(&v.image, params)).collect();
    let slot: BTreeMap<usize, usize> = views.iter().enumerate().map(|(i, v)| (v.view_id, i)).collect();
    let cams: Vec<_> = views.iter().map(|v| (v.view_id, v.camera)).collect();

    let per_target: Vec<Option<Vec<SourceGradient>>> = targets
        .par_iter()
        .map(|&t| {
            let ti = *slot
                .get(&t)
                .ok_or_else(|| Error::InvalidArgument(format!("target view {t} not in frame")))?;
            let sel = select_sources(t, &views[ti].camera, &cams, n_src)?;
            let sources: Vec<SourceView> = sel
                .source_ids
                .iter()
                .map(|id| {
                    let i = slot[id];
                    SourceView {
                        view_id: *id,
                        image: &norm[i],
                        depth: &views[i].depth,
                        camera: &views[i].camera,
                    }
                })
                .collect();
            let result = renderer.forward(&sources, &TargetView {
                camera: &views[ti].camera,
                depth: &views[ti].depth,
            })?;
            if result.all_holes() {
                log::debug!("target {t} sees no source pixel; skipped");
                return Ok(None);
            }
            renderer.backward(&result, &norm[ti]).map(Some)
        })
        .collect::<Result<_>>()?;

    // merged in ascending target id
    let mut acc = AccumState::new();
    for grads in per_target.into_iter().flatten() {
        acc.accumulate_targets(&grads)?;
    }
    let mean_abs = acc.finalize_targets()?;
    views
        .iter()
        .zip(&norm)
        .map(|(v, x)| {
            let proxy = inpaint_proxy(x);
            let zero;
            let grad = match mean_abs.get(&v.view_id) {
                Some(g) => g,
                None => {
                    zero = NormImage::zeros(x.width(), x.height());
                    &zero
                }
            };
            importance_single(v.view_id, grad, x, &proxy)
        })
        .collect()
}
