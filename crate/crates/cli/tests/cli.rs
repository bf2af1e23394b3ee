use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn lehopp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lehopp"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lehopp(args);
    assert!(
        out.status.success(),
        "lehopp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn staged_commands_compose() {
    let dir = tempdir().unwrap();
    let scene = dir.path().join("scene");
    let manifest = scene.join("manifest.json");
    ok(&["synth", "--width", "24", "--height", "24", "--views", "4", "--out", p(&scene)]);
    assert!(manifest.exists());

    let imp = dir.path().join("imp");
    ok(&["importance", "--manifest", p(&manifest), "--out", p(&imp)]);
    assert!(imp.join("period_000/view_003.pfm").exists());
    assert!(imp.join("histogram.csv").exists());

    let var = dir.path().join("var");
    let lehopp_dirs = ok(&[
        "prune", "--manifest", p(&manifest), "--importance", p(&imp), "--gamma", "0.1", "--out", p(&var),
    ]);
    assert!(lehopp_dirs.trim().ends_with("lehopp_g0.100"));
    ok(&["prune", "--manifest", p(&manifest), "--method", "random-block", "--block", "8", "--gamma", "0.1", "--out", p(&var)]);
    assert!(var.join("random-block-8_g0.100/masks/p000_v000.pgm").exists());

    let eval = dir.path().join("eval");
    let table = ok(&[
        "eval",
        "--manifest",
        p(&manifest),
        "--variant",
        p(&var.join("lehopp_g0.100")),
        "--variant",
        p(&var.join("random-block-8_g0.100")),
        "--out",
        p(&eval),
    ]);
    assert!(table.contains("anchor") && table.contains("random-block-8"));
    let csv = std::fs::read_to_string(eval.join("report.csv")).unwrap();
    assert!(csv.starts_with("method,gamma,target,frame,psnr_db,ssim,pruned_pixels,pixel_rate_mpxs,runtime_ms\n"));

    let oracle = ok(&["oracle", "--manifest", p(&manifest), "--pixels", "10", "--out", p(&dir.path().join("o"))]);
    assert!(oracle.starts_with("rho = "));
}

#[test]
fn pipeline_runs_and_reruns_identically() {
    let dir = tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "pipeline".to_string(),
            "--width".into(),
            "24".into(),
            "--height".into(),
            "24".into(),
            "--views".into(),
            "4".into(),
            "--gamma".into(),
            "0.1".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let run = |out: &Path| {
        let v = args(p(out));
        ok(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let table = run(&a);
    run(&b);
    assert_eq!(table.lines().count(), 1 + 1 + 3);
    assert_eq!(std::fs::read(a.join("report.csv")).unwrap(), std::fs::read(b.join("report.csv")).unwrap());
    assert_eq!(std::fs::read(a.join("summary.json")).unwrap(), std::fs::read(b.join("summary.json")).unwrap());
}

#[test]
fn bdrate_and_errors() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "label,rate_kbps,psnr_db\nx,100,30\nx,200,33\nx,400,36\nx,800,39\n").unwrap();
    std::fs::write(&b, "label,rate_kbps,psnr_db\nx,150,30\nx,300,33\nx,600,36\nx,1200,39\n").unwrap();
    assert_eq!(ok(&["bdrate", p(&a), p(&a)]).trim(), "0.0000%");
    assert_eq!(ok(&["bdrate", p(&a), p(&b)]).trim(), "50.0000%");

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "rate,psnr\n1,2\n").unwrap();
    let out = lehopp(&["bdrate", p(&a), p(&bad)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let out = lehopp(&["synth", "--spec", p(&dir.path().join("missing.json")), "--out", p(dir.path())]);
    assert!(!out.status.success());
    let out = lehopp(&["importance", "--manifest", p(&a), "--scope", "sideways", "--out", p(dir.path())]);
    assert!(!out.status.success());
}
