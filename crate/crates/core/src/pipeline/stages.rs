use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::ReportRecord;
use super::scene::Scene;
use crate::error::{Error, Result};
use crate::evalkit::{psnr, ssim, SsimParams, REFERENCE_FPS};
use crate::imgio::{depreprocess, preprocess, BitMask, Image, NormImage};
use crate::inpaint::{self, InpaintConfig};
use crate::lehopp::{compute_importance, check_gamma, Fill, ImportanceMap, ImportanceRun, PruneConfig, Scope};
use crate::pruning::{self, Pruner, PrunerOptions, ViewShape};
use crate::renderer::{self, select_sources, RenderConfig, Renderer, SourceView, TargetView};

/// A baseline pruner to run next to LeHoPP at every gamma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Leave-one-out targets; empty means every view.
    pub targets: Vec<usize>,
    pub gammas: Vec<f64>,
    pub scope: Scope,
    pub intra_period: usize,
    pub fill: Fill,
    pub renderer: String,
    pub render: RenderConfig,
    pub inpaint: InpaintConfig,
    pub baselines: Vec<BaselineSpec>,
    /// Record wall-clock stage times in the report; off keeps reports
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            targets: Vec::new(),
            gammas: vec![0.05, 0.10, 0.20],
            scope: Scope::PerView,
            intra_period: 16,
            fill: Fill::Inpaint,
            renderer: renderer::ReprojectionRenderer::NAME.to_string(),
            render: RenderConfig::default(),
            inpaint: InpaintConfig::default(),
            baselines: vec![
                BaselineSpec {
                    name: "base1".into(),
                    block: None,
                    seed: 0,
                },
                BaselineSpec {
                    name: "base2".into(),
                    block: None,
                    seed: 0,
                },
            ],
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for &gamma in &self.gammas {
            PruneConfig {
                gamma,
                scope: self.scope,
                intra_period: self.intra_period,
                fill: self.fill,
            }
            .validate()?;
        }
        self.render.validate()?;
        self.inpaint.validate()?;
        Ok(())
    }

    pub fn build_renderer(&self) -> Result<Box<dyn Renderer>> {
        renderer::by_name(&self.renderer, self.render)
    }

    /// Resolved, sorted target list; every id must exist in `scene`.
    pub fn resolve_targets(&self, scene: &Scene) -> Result<Vec<usize>> {
        let ids = scene.view_ids();
        if ids.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "leave-one-out needs at least 2 views, scene has {}",
                ids.len()
            )));
        }
        if self.targets.is_empty() {
            return Ok(ids);
        }
        let mut t = self.targets.clone();
        t.sort_unstable();
        t.dedup();
        if let Some(bad) = t.iter().find(|id| !ids.contains(id)) {
            return Err(Error::InvalidArgument(format!("target view {bad} is not in the scene")));
        }
        Ok(t)
    }
}

pub fn run_importance(scene: &Scene, cfg: &RunConfig) -> Result<ImportanceRun> {
    cfg.validate()?;
    let targets = cfg.resolve_targets(scene)?;
    let renderer = cfg.build_renderer()?;
    compute_importance(
        &scene.views,
        &targets,
        renderer.as_ref(),
        cfg.render.n_src,
        &scene.norm_params,
        cfg.intra_period,
    )
}

/// Masks and filled source images of one method at one gamma.
#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub method: String,
    pub gamma: f64,
    pub fill: Fill,
    pub intra_period: usize,
    /// Keyed by (period, view).
    pub masks: BTreeMap<(usize, usize), BitMask>,
    /// Keyed by (frame, view).
    pub images: BTreeMap<(usize, usize), Image>,
}

impl Variant {
    /// The unpruned reference: ground-truth images, no masks.
    pub fn anchor(scene: &Scene, intra_period: usize) -> Self {
        Self {
            method: "anchor".into(),
            gamma: 0.0,
            fill: Fill::Inpaint,
            intra_period,
            masks: BTreeMap::new(),
            images: scene
                .views
                .iter()
                .map(|v| ((v.frame_id, v.view_id), v.image.clone()))
                .collect(),
        }
    }

    pub fn pruned_pixels(&self, view_id: usize, frame_id: usize) -> usize {
        self.masks
            .get(&(frame_id / self.intra_period, view_id))
            .map_or(0, |m| m.pruned_count())
    }
}

pub fn make_variant(
    scene: &Scene,
    pruner: &dyn Pruner,
    gamma: f64,
    importance: Option<&[Vec<ImportanceMap>]>,
    cfg: &RunConfig,
) -> Result<Variant> {
    check_gamma(gamma)?;
    let shapes: Vec<ViewShape> = scene
        .view_ids()
        .into_iter()
        .map(|view_id| ViewShape {
            view_id,
            width: scene.width,
            height: scene.height,
        })
        .collect();
    let periods: Vec<usize> = {
        let mut p: Vec<usize> = scene.frame_ids().iter().map(|f| f / cfg.intra_period).collect();
        p.dedup();
        p
    };
    let mut masks = BTreeMap::new();
    for &period in &periods {
        let maps = match importance {
            Some(all) => Some(
                all.get(period)
                    .filter(|m| !m.is_empty())
                    .ok_or_else(|| Error::InvalidArgument(format!("no importance maps for period {period}")))?
                    .as_slice(),
            ),
            None if pruner.needs_importance() => {
                return Err(Error::InvalidArgument(format!("{} needs importance maps", pruner.name())))
            }
            None => None,
        };
        for (shape, mask) in shapes.iter().zip(pruner.masks(&shapes, maps, gamma, period)?) {
            masks.insert((period, shape.view_id), mask);
        }
    }
    let filler = inpaint::by_name(cfg.fill.inpainter(), cfg.inpaint)?;
    let images = scene
        .views
        .par_iter()
        .map(|v| {
            let mask = &masks[&(v.frame_id / cfg.intra_period, v.view_id)];
            Ok(((v.frame_id, v.view_id), filler.inpaint(&v.image, mask)?))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    Ok(Variant {
        method: pruner.name().to_string(),
        gamma,
        fill: cfg.fill,
        intra_period: cfg.intra_period,
        masks,
        images,
    })
}

/// Every configured pruner (LeHoPP first, then baselines) at every gamma.
pub fn make_variants(scene: &Scene, importance: &ImportanceRun, cfg: &RunConfig) -> Result<Vec<Variant>> {
    let mut pruners: Vec<Box<dyn Pruner>> = vec![pruning::by_name(
        "lehopp",
        &PrunerOptions {
            scope: cfg.scope,
            seed: 0,
            block: None,
        },
    )?];
    for b in &cfg.baselines {
        pruners.push(pruning::by_name(
            &b.name,
            &PrunerOptions {
                scope: cfg.scope,
                seed: b.seed,
                block: b.block,
            },
        )?);
    }
    let mut out = Vec::new();
    for &gamma in &cfg.gammas {
        for p in &pruners {
            out.push(make_variant(scene, p.as_ref(), gamma, Some(&importance.periods), cfg)?);
        }
    }
    Ok(out)
}

/// Leave-one-out renders of every target from the variant's source images,
/// scored against the ground-truth target.
pub fn evaluate(scene: &Scene, variant: &Variant, cfg: &RunConfig) -> Result<Vec<ReportRecord>> {
    let targets = cfg.resolve_targets(scene)?;
    let renderer = cfg.build_renderer()?;
    let ssim_params = SsimParams::default();
    let mut records = Vec::new();
    for frame_id in scene.frame_ids() {
        let views = scene.frame(frame_id);
        let norm: BTreeMap<usize, NormImage> = views
            .iter()
            .map(|v| {
                let img = variant.images.get(&(frame_id, v.view_id)).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "variant {} lacks view {} frame {frame_id}",
                        variant.method, v.view_id
                    ))
                })?;
                Ok((v.view_id, preprocess(img, &scene.norm_params)))
            })
            .collect::<Result<_>>()?;
        let cams: Vec<_> = views.iter().map(|v| (v.view_id, v.camera)).collect();
        let frame_records: Vec<ReportRecord> = targets
            .par_iter()
            .map(|&t| {
                let start = Instant::now();
                let tv = views.iter().find(|v| v.view_id == t).expect("target resolved against scene");
                let sel = select_sources(t, &tv.camera, &cams, cfg.render.n_src)?;
                let sources: Vec<SourceView> = sel
                    .source_ids
                    .iter()
                    .map(|id| {
                        let v = views.iter().find(|v| v.view_id == *id).expect("selected from frame");
                        SourceView {
                            view_id: *id,
                            image: &norm[id],
                            depth: &v.depth,
                            camera: &v.camera,
                        }
                    })
                    .collect();
                let result = renderer.forward(&sources, &TargetView {
                    camera: &tv.camera,
                    depth: &tv.depth,
                })?;
                let rendered = depreprocess(&result.image, &scene.norm_params);
                let pruned: usize = sel.source_ids.iter().map(|&id| variant.pruned_pixels(id, frame_id)).sum();
                let kept = sel.source_ids.len() * scene.width * scene.height - pruned;
                Ok(ReportRecord {
                    method: variant.method.clone(),
                    gamma: variant.gamma,
                    target: Some(t),
                    frame: Some(frame_id),
                    psnr_db: psnr(&rendered, &tv.image, 1.0)?,
                    ssim: ssim(&rendered, &tv.image, &ssim_params)?,
                    pruned_pixels: pruned,
                    pixel_rate_mpxs: kept as f64 * REFERENCE_FPS / 1e6,
                    runtime_ms: if cfg.timing {
                        start.elapsed().as_secs_f64() * 1e3
                    } else {
                        0.0
                    },
                })
            })
            .collect::<Result<_>>()?;
        records.extend(frame_records);
    }
    Ok(records)
}
