use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scene::Scene;
use super::stages::RunConfig;
use crate::error::{Error, Result};
use crate::imgio::CHANNELS;
use crate::lehopp::{compute_importance, rank_correlation, DeltaLossOracle};
use crate::renderer::ReprojectionRenderer;
use crate::scenegen::GroundTruthView;

/// Views larger than this are refused unless forced; every sampled pixel
/// costs one re-render per target.
pub const ORACLE_MAX_PIXELS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub view: usize,
    pub x: usize,
    pub y: usize,
    pub estimate: f64,
    pub delta_l: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub rows: Vec<OracleRow>,
    /// Spearman correlation of estimate against `|delta_l|`; `None` when
    /// either column is constant.
    pub rho: Option<f64>,
}

/// Compares importance at `n_pixels` seeded pixels of the first frame with
/// the loss change measured by re-rendering.
pub fn run_oracle(scene: &Scene, n_pixels: usize, seed: u64, cfg: &RunConfig, force: bool) -> Result<OracleResult> {
    if scene.width * scene.height > ORACLE_MAX_PIXELS && !force {
        return Err(Error::InvalidArgument(format!(
            "{}x{} views exceed the oracle limit of {ORACLE_MAX_PIXELS} pixels; pass --force to run anyway",
            scene.width, scene.height
        )));
    }
    if n_pixels == 0 {
        return Err(Error::InvalidArgument("oracle needs at least one pixel".into()));
    }
    let targets = cfg.resolve_targets(scene)?;
    let frame = scene.frame_ids()[0];
    let views: Vec<GroundTruthView> = scene.frame(frame).into_iter().cloned().collect();
    let renderer = ReprojectionRenderer::new(cfg.render)?;
    let importance = compute_importance(&views, &targets, &renderer, cfg.render.n_src, &scene.norm_params, 1)?;
    let maps = &importance.per_frame[0].1;
    let oracle = DeltaLossOracle::from_views(&views, &targets, &renderer, &scene.norm_params)?;

    let mut textured = Vec::new();
    let mut all = Vec::new();
    for m in maps {
        let x = oracle.image(m.view_id).expect("oracle holds every view");
        let p = oracle.proxy(m.view_id).expect("oracle holds every view");
        for py in 0..scene.height {
            for px in 0..scene.width {
                all.push((m.view_id, px, py));
                if (0..CHANNELS).any(|c| x.get(px, py, c) != p.get(px, py, c)) {
                    textured.push((m.view_id, px, py));
                }
            }
        }
    }
    let mut pool = if textured.is_empty() { all } else { textured };
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pool.truncate(n_pixels);
    pool.sort_unstable();

    let rows = pool
        .into_iter()
        .map(|(view, x, y)| {
            let map = maps.iter().find(|m| m.view_id == view).expect("sampled from maps");
            Ok(OracleRow {
                view,
                x,
                y,
                estimate: map.map.get(x, y) as f64,
                delta_l: oracle.delta_loss(view, (x, y))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let est: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
    let delta: Vec<f64> = rows.iter().map(|r| r.delta_l.abs()).collect();
    let rho = match rank_correlation(&est, &delta) {
        Ok(r) => Some(r),
        Err(Error::ZeroVariance) => None,
        Err(Error::InvalidArgument(_)) if rows.len() < 2 => None,
        Err(e) => return Err(e),
    };
    Ok(OracleResult { rows, rho })
}
