use serde::Serialize;

use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "method,gamma,target,frame,psnr_db,ssim,pruned_pixels,pixel_rate_mpxs,runtime_ms";

/// One report row. `target`/`frame` are `None` on aggregate rows, which
/// print as `all`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRecord {
    pub method: String,
    pub gamma: f64,
    pub target: Option<usize>,
    pub frame: Option<usize>,
    pub psnr_db: f64,
    pub ssim: f64,
    pub pruned_pixels: usize,
    pub pixel_rate_mpxs: f64,
    pub runtime_ms: f64,
}

pub fn format_db(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

impl ReportRecord {
    pub fn is_aggregate(&self) -> bool {
        self.target.is_none()
    }

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map_or_else(|| "all".to_string(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{:.6},{},{:.6},{:.3}",
            self.method,
            self.gamma,
            opt(self.target),
            opt(self.frame),
            format_db(self.psnr_db),
            self.ssim,
            self.pruned_pixels,
            self.pixel_rate_mpxs,
            self.runtime_ms
        )
    }
}

/// Mean row per (method, gamma), in order of first appearance.
pub fn aggregate(records: &[ReportRecord]) -> Vec<ReportRecord> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in records.iter().filter(|r| !r.is_aggregate()) {
        if !keys.iter().any(|(m, g)| *m == r.method && *g == r.gamma) {
            keys.push((r.method.clone(), r.gamma));
        }
    }
    keys.into_iter()
        .map(|(method, gamma)| {
            let rows: Vec<&ReportRecord> = records
                .iter()
                .filter(|r| !r.is_aggregate() && r.method == method && r.gamma == gamma)
                .collect();
            let n = rows.len() as f64;
            let mean = |f: fn(&ReportRecord) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            ReportRecord {
                method,
                gamma,
                target: None,
                frame: None,
                psnr_db: mean(|r| r.psnr_db),
                ssim: mean(|r| r.ssim),
                pruned_pixels: (mean(|r| r.pruned_pixels as f64)).round() as usize,
                pixel_rate_mpxs: mean(|r| r.pixel_rate_mpxs),
                runtime_ms: mean(|r| r.runtime_ms),
            }
        })
        .collect()
}

/// Per-target rows followed by their aggregates.
pub fn render_csv(records: &[ReportRecord]) -> Vec<u8> {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    let aggregates = aggregate(records);
    for r in records.iter().filter(|r| !r.is_aggregate()).chain(&aggregates) {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out.into_bytes()
}

/// Finds the aggregate PSNR of `method` at `gamma`.
pub fn aggregate_psnr(aggregates: &[ReportRecord], method: &str, gamma: f64) -> Result<f64> {
    aggregates
        .iter()
        .find(|r| r.method == method && (r.gamma - gamma).abs() < 1e-12)
        .map(|r| r.psnr_db)
        .ok_or_else(|| Error::InvalidArgument(format!("no aggregate row for {method} at gamma {gamma}")))
}
