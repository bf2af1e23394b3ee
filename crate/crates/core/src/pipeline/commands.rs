use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::oracle::run_oracle;
use super::report::{aggregate, render_csv, ReportRecord};
use super::scene::{to_json, view_file_stem, Scene, MANIFEST_FILE};
use super::stages::{evaluate, make_variant, run_importance, RunConfig, Variant};
use crate::error::{Error, Result};
use crate::evalkit::{bd_rate, pixel_rate, read_rd_csv, PixelRateReport, REFERENCE_FPS};
use crate::imgio::{self, write_atomic};
use crate::inpaint::HOLD_VALUE;
use crate::lehopp::{importance_histogram, Fill, ImportanceMap, ImportanceRun, HISTOGRAM_BINS};
use crate::pruning::{self, PrunerOptions};
use crate::scenegen::SceneSpec;

pub const IMPORTANCE_INDEX: &str = "importance.json";
pub const VARIANT_INDEX: &str = "variant.json";
pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ORACLE_FILE: &str = "oracle.csv";
pub const ORACLE_SUMMARY_FILE: &str = "oracle_summary.json";

pub fn cmd_synth(spec: &SceneSpec, out: &Path) -> Result<PathBuf> {
    Scene::from_spec(spec)?.write(out)
}

pub fn read_spec(path: &Path) -> Result<SceneSpec> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let spec: SceneSpec = serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e))?;
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ImportanceIndex {
    intra_period: usize,
    targets: Vec<usize>,
    renderer: String,
    n_src: usize,
    views: Vec<usize>,
    periods: Vec<usize>,
}

fn period_map_path(dir: &Path, period: usize, view_id: usize) -> PathBuf {
    dir.join(format!("period_{period:03}")).join(format!("view_{view_id:03}.pfm"))
}

/// Writes one PFM per (intra-period, view), the importance histogram and an
/// index file.
pub fn cmd_importance(manifest: &Path, cfg: &RunConfig, out: &Path) -> Result<ImportanceRun> {
    let scene = Scene::load(manifest)?;
    let run = run_importance(&scene, cfg)?;
    let mut periods = Vec::new();
    for (p, maps) in run.periods.iter().enumerate().filter(|(_, m)| !m.is_empty()) {
        periods.push(p);
        for m in maps {
            imgio::write_pfm_map(&m.map, &period_map_path(out, p, m.view_id))?;
        }
    }
    let all: Vec<ImportanceMap> = run.periods.iter().flatten().cloned().collect();
    let hist = importance_histogram(&all, HISTOGRAM_BINS);
    let mut csv = String::from("lower,upper,count\n");
    writeln!(csv, "0,0,{}", hist.zeros).expect("string write");
    for b in &hist.bins {
        writeln!(csv, "{:e},{:e},{}", b.lower, b.upper, b.count).expect("string write");
    }
    write_atomic(&out.join("histogram.csv"), csv.as_bytes())?;
    let index = ImportanceIndex {
        intra_period: cfg.intra_period,
        targets: cfg.resolve_targets(&scene)?,
        renderer: cfg.renderer.clone(),
        n_src: cfg.render.n_src,
        views: scene.view_ids(),
        periods,
    };
    write_atomic(&out.join(IMPORTANCE_INDEX), &to_json(&index)?)?;
    Ok(run)
}

/// Loads per-period maps written by [`cmd_importance`], indexed by period.
pub fn read_importance(dir: &Path) -> Result<(usize, Vec<Vec<ImportanceMap>>)> {
    let index_path = dir.join(IMPORTANCE_INDEX);
    if !index_path.exists() {
        return Err(Error::MissingArtifact(index_path));
    }
    let bytes = std::fs::read(&index_path).map_err(|e| Error::io(&index_path, e))?;
    let index: ImportanceIndex = serde_json::from_slice(&bytes).map_err(|e| Error::parse(&index_path, e))?;
    let n = index.periods.iter().max().map_or(0, |p| p + 1);
    let mut periods = vec![Vec::new(); n];
    for &p in &index.periods {
        for &view_id in &index.views {
            let path = period_map_path(dir, p, view_id);
            if !path.exists() {
                return Err(Error::MissingArtifact(path));
            }
            periods[p].push(ImportanceMap {
                view_id,
                map: imgio::read_pfm_map(&path)?,
            });
        }
    }
    Ok((index.intra_period, periods))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct VariantIndex {
    method: String,
    gamma: f64,
    fill: Fill,
    intra_period: usize,
    masks: Vec<(usize, usize)>,
    images: Vec<(usize, usize)>,
}

pub fn variant_dir_name(method: &str, gamma: f64) -> String {
    format!("{method}_g{gamma:.3}")
}

fn mask_path(dir: &Path, period: usize, view_id: usize) -> PathBuf {
    dir.join("masks").join(format!("p{period:03}_v{view_id:03}.pgm"))
}

fn image_path(dir: &Path, kind: &str, frame_id: usize, view_id: usize) -> PathBuf {
    dir.join(kind).join(format!("{}.ppm", view_file_stem(view_id, frame_id)))
}

/// Masks, hold-value visualizations under `pruned/` and the filled images
/// the renderer consumes under `sources/`.
pub fn write_variant(variant: &Variant, scene: &Scene, dir: &Path) -> Result<()> {
    for (&(period, view_id), mask) in &variant.masks {
        imgio::write_pgm(mask, &mask_path(dir, period, view_id))?;
    }
    for (&(frame_id, view_id), image) in &variant.images {
        imgio::write_ppm(image, &image_path(dir, "sources", frame_id, view_id))?;
        if let Some(mask) = variant.masks.get(&(frame_id / variant.intra_period, view_id)) {
            let gt = scene
                .view(view_id, frame_id)
                .ok_or_else(|| Error::InvalidArgument(format!("view {view_id} frame {frame_id} not in scene")))?;
            let mut held = gt.image.clone();
            for y in 0..mask.height() {
                for x in 0..mask.width() {
                    if !mask.is_kept(x, y) {
                        held.set_pixel(x, y, [HOLD_VALUE; 3]);
                    }
                }
            }
            imgio::write_ppm(&held, &image_path(dir, "pruned", frame_id, view_id))?;
        }
    }
    let index = VariantIndex {
        method: variant.method.clone(),
        gamma: variant.gamma,
        fill: variant.fill,
        intra_period: variant.intra_period,
        masks: variant.masks.keys().copied().collect(),
        images: variant.images.keys().copied().collect(),
    };
    write_atomic(&dir.join(VARIANT_INDEX), &to_json(&index)?)
}

pub fn read_variant(dir: &Path) -> Result<Variant> {
    let index_path = dir.join(VARIANT_INDEX);
    if !index_path.exists() {
        return Err(Error::MissingArtifact(index_path));
    }
    let bytes = std::fs::read(&index_path).map_err(|e| Error::io(&index_path, e))?;
    let index: VariantIndex = serde_json::from_slice(&bytes).map_err(|e| Error::parse(&index_path, e))?;
    let mut masks = BTreeMap::new();
    for (period, view_id) in index.masks {
        masks.insert((period, view_id), imgio::read_pgm(&mask_path(dir, period, view_id))?);
    }
    let mut images = BTreeMap::new();
    for (frame_id, view_id) in index.images {
        images.insert((frame_id, view_id), imgio::read_ppm(&image_path(dir, "sources", frame_id, view_id))?);
    }
    Ok(Variant {
        method: index.method,
        gamma: index.gamma,
        fill: index.fill,
        intra_period: index.intra_period,
        masks,
        images,
    })
}

/// Builds one variant per gamma with the named pruner and writes each to
/// `out/<method>_g<gamma>`.
pub fn cmd_prune(
    manifest: &Path,
    importance_dir: Option<&Path>,
    method: &str,
    opts: &PrunerOptions,
    cfg: &RunConfig,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let scene = Scene::load(manifest)?;
    let pruner = pruning::by_name(method, opts)?;
    let importance = match importance_dir {
        Some(dir) => {
            let (period, maps) = read_importance(dir)?;
            if period != cfg.intra_period {
                return Err(Error::InvalidArgument(format!(
                    "importance maps use intra period {period}, run asks for {}",
                    cfg.intra_period
                )));
            }
            Some(maps)
        }
        None if pruner.needs_importance() => {
            return Err(Error::InvalidArgument(format!("{method} pruning needs an importance directory")))
        }
        None => None,
    };
    let mut dirs = Vec::new();
    for &gamma in &cfg.gammas {
        let variant = make_variant(&scene, pruner.as_ref(), gamma, importance.as_deref(), cfg)?;
        let dir = out.join(variant_dir_name(&variant.method, gamma));
        write_variant(&variant, &scene, &dir)?;
        dirs.push(dir);
    }
    Ok(dirs)
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'static str,
    scene_seed: Option<u64>,
    width: usize,
    height: usize,
    views: usize,
    frames: usize,
    config: &'a RunConfig,
    aggregates: Vec<ReportRecord>,
    margins_db: Vec<Margin>,
    pixel_rate: Vec<PixelRateReport>,
}

#[derive(Serialize)]
struct Margin {
    gamma: f64,
    baseline: String,
    lehopp_minus_baseline: f64,
}

/// Scores the anchor and every variant directory, then writes the report
/// CSV (per-target rows, then aggregates) and a JSON summary.
pub fn cmd_eval(manifest: &Path, variant_dirs: &[PathBuf], cfg: &RunConfig, out: &Path) -> Result<Vec<ReportRecord>> {
    cfg.validate()?;
    let scene = Scene::load(manifest)?;
    let mut records = evaluate(&scene, &Variant::anchor(&scene, cfg.intra_period), cfg)?;
    for dir in variant_dirs {
        let variant = read_variant(dir)?;
        records.extend(evaluate(&scene, &variant, cfg)?);
    }
    write_report(&scene, &records, cfg, out)?;
    Ok(records)
}

pub fn write_report(scene: &Scene, records: &[ReportRecord], cfg: &RunConfig, out: &Path) -> Result<()> {
    let aggregates = aggregate(records);
    let mut margins = Vec::new();
    for lehopp in aggregates.iter().filter(|r| r.method == "lehopp") {
        for other in aggregates
            .iter()
            .filter(|r| r.method != "lehopp" && r.method != "anchor" && r.gamma == lehopp.gamma)
        {
            margins.push(Margin {
                gamma: lehopp.gamma,
                baseline: other.method.clone(),
                lehopp_minus_baseline: lehopp.psnr_db - other.psnr_db,
            });
        }
    }
    let n_views = scene.view_ids().len();
    let mut gammas = vec![0.0];
    gammas.extend(cfg.gammas.iter().copied());
    let pixel_rate = gammas
        .into_iter()
        .map(|g| pixel_rate(n_views, scene.width, scene.height, REFERENCE_FPS, g))
        .collect::<Result<_>>()?;
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        scene_seed: scene.spec.as_ref().map(|s| s.seed),
        width: scene.width,
        height: scene.height,
        views: n_views,
        frames: scene.frame_ids().len(),
        config: cfg,
        aggregates,
        margins_db: margins,
        pixel_rate,
    };
    write_atomic(&out.join(REPORT_FILE), &render_csv(records))?;
    write_atomic(&out.join(SUMMARY_FILE), &to_json(&summary)?)
}

pub enum SceneSource {
    Manifest(PathBuf),
    Spec(SceneSpec),
}

/// Scene, importance, LeHoPP and baseline variants, evaluation; each stage
/// reads the previous stage's files.
pub fn cmd_pipeline(source: &SceneSource, cfg: &RunConfig, out: &Path) -> Result<Vec<ReportRecord>> {
    cfg.validate()?;
    let manifest = match source {
        SceneSource::Manifest(path) => path.clone(),
        SceneSource::Spec(spec) => cmd_synth(spec, &out.join("scene")).map_err(|e| e.in_stage("synth"))?,
    };
    log::info!("scene manifest {}", manifest.display());
    let importance_dir = out.join("importance");
    cmd_importance(&manifest, cfg, &importance_dir).map_err(|e| e.in_stage("importance"))?;
    log::info!("importance maps written");
    let variants_dir = out.join("variants");
    let mut dirs = cmd_prune(
        &manifest,
        Some(&importance_dir),
        "lehopp",
        &PrunerOptions {
            scope: cfg.scope,
            seed: 0,
            block: None,
        },
        cfg,
        &variants_dir,
    )
    .map_err(|e| e.in_stage("prune"))?;
    for b in &cfg.baselines {
        let opts = PrunerOptions {
            scope: cfg.scope,
            seed: b.seed,
            block: b.block,
        };
        dirs.extend(cmd_prune(&manifest, None, &b.name, &opts, cfg, &variants_dir).map_err(|e| e.in_stage("baselines"))?);
    }
    // group rows by gamma, then method, like the variants of make_variants
    let mut ordered = Vec::with_capacity(dirs.len());
    for &gamma in &cfg.gammas {
        let suffix = format!("_g{gamma:.3}");
        ordered.extend(dirs.iter().filter(|d| d.to_string_lossy().ends_with(&suffix)).cloned());
    }
    ordered.dedup();
    log::info!("evaluating anchor and {} variants", ordered.len());
    cmd_eval(&manifest, &ordered, cfg, out).map_err(|e| e.in_stage("eval"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub n_pixels: usize,
    pub seed: u64,
    /// Spearman correlation, or the string `nan` when undefined.
    pub rho: serde_json::Value,
    pub zero_variance: bool,
}

pub fn cmd_oracle(
    manifest: &Path,
    n_pixels: usize,
    seed: u64,
    force: bool,
    cfg: &RunConfig,
    out: &Path,
) -> Result<OracleSummary> {
    let scene = Scene::load(manifest)?;
    let result = run_oracle(&scene, n_pixels, seed, cfg, force)?;
    let mut csv = String::from("view,x,y,estimate,delta_l\n");
    for r in &result.rows {
        writeln!(csv, "{},{},{},{:e},{:e}", r.view, r.x, r.y, r.estimate, r.delta_l).expect("string write");
    }
    let summary = OracleSummary {
        n_pixels: result.rows.len(),
        seed,
        rho: result.rho.map_or_else(|| serde_json::Value::from("nan"), serde_json::Value::from),
        zero_variance: result.rho.is_none(),
    };
    write_atomic(&out.join(ORACLE_FILE), csv.as_bytes())?;
    write_atomic(&out.join(ORACLE_SUMMARY_FILE), &to_json(&summary)?)?;
    Ok(summary)
}

/// BD-rate of the first curve in `test` against the first curve in `anchor`.
pub fn cmd_bdrate(anchor: &Path, test: &Path) -> Result<f64> {
    let a = read_rd_csv(anchor)?;
    let t = read_rd_csv(test)?;
    bd_rate(&a[0].1, &t[0].1)
}

pub fn manifest_in(dir: &Path) -> PathBuf {
    dir.join(MANIFEST_FILE)
}
