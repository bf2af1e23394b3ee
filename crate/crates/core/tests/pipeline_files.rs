mod common;

use std::fs;
use std::path::Path;

use lehopp_core::error::Error;
use lehopp_core::imgio::{read_pfm_map, read_pgm, read_ppm};
use lehopp_core::lehopp::prune_count;
use lehopp_core::pipeline::*;
use lehopp_core::pruning::PrunerOptions;
use lehopp_core::scenegen::SceneSpec;
use tempfile::tempdir;

fn small_cfg() -> RunConfig {
    RunConfig {
        intra_period: 1,
        ..RunConfig::default()
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_deterministic_and_complete() {
    let spec = SceneSpec::desk(2, 24, 20, 3, 1);
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let ma = cmd_synth(&spec, a.path()).unwrap();
    cmd_synth(&spec, b.path()).unwrap();
    assert_eq!(tree(a.path()), tree(b.path()));
    let scene = Scene::load(&ma).unwrap();
    assert_eq!(scene.views.len(), 3);
    assert_eq!(scene.spec.as_ref(), Some(&spec));
    assert!(matches!(read_spec(&a.path().join("missing.json")), Err(Error::Io { .. })));
}

#[test]
fn flat_scene_has_zero_importance_and_nan_oracle() {
    let dir = tempdir().unwrap();
    let manifest = cmd_synth(&common::flat_spec(0, 24, 4), &dir.path().join("scene")).unwrap();
    let run = cmd_importance(&manifest, &small_cfg(), &dir.path().join("imp")).unwrap();
    for m in &run.periods[0] {
        assert!(m.map.data().iter().all(|&v| v == 0.0));
        let on_disk = read_pfm_map(&dir.path().join(format!("imp/period_000/view_{:03}.pfm", m.view_id))).unwrap();
        assert_eq!(&on_disk, &m.map);
    }
    let summary = cmd_oracle(&manifest, 20, 3, false, &small_cfg(), &dir.path().join("oracle")).unwrap();
    assert!(summary.zero_variance);
    assert_eq!(summary.rho, serde_json::Value::from("nan"));
    let csv = fs::read_to_string(dir.path().join("oracle").join(ORACLE_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn oracle_refuses_large_views_without_force() {
    let dir = tempdir().unwrap();
    let manifest = cmd_synth(&SceneSpec::desk(0, 101, 100, 2, 1), dir.path()).unwrap();
    let err = cmd_oracle(&manifest, 5, 0, false, &small_cfg(), &dir.path().join("o")).unwrap_err();
    assert!(err.to_string().contains("--force"));
}

#[test]
fn prune_outputs_masks_with_exact_counts() {
    let dir = tempdir().unwrap();
    let manifest = cmd_synth(&SceneSpec::desk(5, 32, 24, 4, 2), &dir.path().join("scene")).unwrap();
    let cfg = RunConfig {
        gammas: vec![0.0, 0.13],
        ..small_cfg()
    };
    let imp = dir.path().join("imp");
    cmd_importance(&manifest, &cfg, &imp).unwrap();
    let opts = PrunerOptions {
        scope: cfg.scope,
        seed: 1,
        block: None,
    };
    let scene = Scene::load(&manifest).unwrap();
    for method in ["lehopp", "base1", "base2"] {
        let imp_dir = (method == "lehopp").then_some(imp.as_path());
        let dirs = cmd_prune(&manifest, imp_dir, method, &opts, &cfg, &dir.path().join("var")).unwrap();
        assert_eq!(dirs.len(), 2);
        for (dir, gamma) in dirs.iter().zip([0.0, 0.13]) {
            for period in 0..2 {
                for view in 0..4 {
                    let mask = read_pgm(&dir.join(format!("masks/p{period:03}_v{view:03}.pgm"))).unwrap();
                    assert_eq!(mask.pruned_count(), prune_count(gamma, 32 * 24));
                }
            }
            if gamma == 0.0 {
                for v in &scene.views {
                    let src = read_ppm(&dir.join("sources").join(format!("{}.ppm", view_file_stem(v.view_id, v.frame_id))))
                        .unwrap();
                    assert_eq!(src, v.image);
                }
            }
        }
    }
    assert!(cmd_prune(&manifest, None, "lehopp", &opts, &cfg, &dir.path().join("x")).is_err());
    let missing = cmd_prune(&manifest, Some(&dir.path().join("nope")), "lehopp", &opts, &cfg, &dir.path().join("x"));
    assert!(matches!(missing, Err(Error::MissingArtifact(_))));
}

#[test]
fn pipeline_report_shape_and_rerun_identity() {
    let spec = SceneSpec::desk(1, 32, 32, 4, 1);
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let cfg = RunConfig::default();
    let records = cmd_pipeline(&SceneSource::Spec(spec.clone()), &cfg, a.path()).unwrap();
    cmd_pipeline(&SceneSource::Spec(spec), &cfg, b.path()).unwrap();
    assert_eq!(tree(a.path()), tree(b.path()));

    let csv = fs::read_to_string(a.path().join(REPORT_FILE)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(REPORT_HEADER));
    let rows: Vec<&str> = lines.collect();
    let aggregates: Vec<&&str> = rows.iter().filter(|l| l.contains(",all,all,")).collect();
    assert_eq!(aggregates.len(), 3 * 3 + 1);
    // 4 targets per method variant
    assert_eq!(rows.len() - aggregates.len(), 4 * 10);
    assert_eq!(records.len(), 40);
    assert!(aggregates[0].starts_with("anchor,0,"));
    // conservation: per-view scope prunes round(gamma W H) in every source
    for r in records.iter().filter(|r| r.method != "anchor") {
        assert_eq!(r.pruned_pixels, prune_count(r.gamma, 1024) * 3);
    }
    assert!(!a.path().join(format!("{REPORT_FILE}.tmp")).exists());
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["scene_seed"], 1);
    assert_eq!(summary["aggregates"].as_array().unwrap().len(), 10);
}

#[test]
fn eval_rejects_missing_variant() {
    let dir = tempdir().unwrap();
    let manifest = cmd_synth(&SceneSpec::desk(0, 16, 16, 3, 1), dir.path()).unwrap();
    let err = cmd_eval(&manifest, &[dir.path().join("ghost")], &small_cfg(), dir.path()).unwrap_err();
    assert!(matches!(err, Error::MissingArtifact(_)));
}

#[test]
fn bdrate_files() {
    let dir = tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let a = write("a.csv", "label,rate_kbps,psnr_db\nx,100,30\nx,200,33\nx,400,36\nx,800,39\n");
    let b = write("b.csv", "label,rate_kbps,psnr_db\ny,200,30\ny,400,33\ny,800,36\ny,1600,39\n");
    let bad = write("bad.csv", "label,rate_kbps,psnr_db\nx,100,oops\n");
    assert_eq!(cmd_bdrate(&a, &a).unwrap(), 0.0);
    assert!((cmd_bdrate(&a, &b).unwrap() - 100.0).abs() < 0.01);
    assert!(matches!(cmd_bdrate(&a, &bad), Err(Error::Parse { .. })));
}
