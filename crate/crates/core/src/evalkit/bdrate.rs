use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RD_CSV_HEADER: [&str; 3] = ["label", "rate_kbps", "psnr_db"];

/// One rate-distortion sample: bitrate in kbit/s and PSNR in dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDPoint {
    pub rate: f64,
    pub quality: f64,
}

impl RDPoint {
    pub fn new(rate: f64, quality: f64) -> Self {
        Self { rate, quality }
    }
}

fn sorted_curve(points: &[RDPoint], name: &str) -> Result<Vec<RDPoint>> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "{name} curve needs at least 4 points, got {}",
            points.len()
        )));
    }
    for p in points {
        if !(p.rate > 0.0 && p.rate.is_finite()) || !p.quality.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} curve has invalid point {p:?}")));
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    for pair in sorted.windows(2) {
        if pair[1].rate <= pair[0].rate || pair[1].quality <= pair[0].quality {
            return Err(Error::NonMonotone(format!(
                "{name}: ({}, {}) then ({}, {})",
                pair[0].rate, pair[0].quality, pair[1].rate, pair[1].quality
            )));
        }
    }
    Ok(sorted)
}

/// Least-squares cubic for log10(rate) as a function of `quality - shift`.
fn fit_log_rate(points: &[RDPoint], shift: f64) -> Result<[f64; 4]> {
    let n = points.len();
    let a = DMatrix::from_fn(n, 4, |r, c| (points[r].quality - shift).powi(c as i32));
    let b = DVector::from_iterator(n, points.iter().map(|p| p.rate.log10()));
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("cubic fit failed: {e}")))?;
    Ok([coeffs[0], coeffs[1], coeffs[2], coeffs[3]])
}

fn integrate(coeffs: &[f64; 4], lo: f64, hi: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0))
        .sum()
}

/// Bjontegaard delta rate in percent: the average bitrate change of `test`
/// relative to `anchor` at equal quality, from cubic fits of log-rate over
/// the shared quality range. Negative means `test` saves bits.
pub fn bd_rate(anchor: &[RDPoint], test: &[RDPoint]) -> Result<f64> {
    let anchor = sorted_curve(anchor, "anchor")?;
    let test = sorted_curve(test, "test")?;
    let lo = anchor[0].quality.max(test[0].quality);
    let hi = anchor[anchor.len() - 1].quality.min(test[test.len() - 1].quality);
    if hi <= lo {
        return Err(Error::NonOverlapping);
    }
    // centering keeps the Vandermonde matrix well conditioned
    let shift = (lo + hi) / 2.0;
    let pa = fit_log_rate(&anchor, shift)?;
    let pt = fit_log_rate(&test, shift)?;
    let span = hi - lo;
    let diff = (integrate(&pt, lo - shift, hi - shift) - integrate(&pa, lo - shift, hi - shift)) / span;
    Ok((10f64.powf(diff) - 1.0) * 100.0)
}

/// Reads `label,rate_kbps,psnr_db` rows into curves, in order of first
/// appearance of each label.
pub fn read_rd_csv(path: &Path) -> Result<Vec<(String, Vec<RDPoint>)>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_rd_csv(&bytes).map_err(|message| Error::parse(path, message))
}

fn parse_rd_csv(bytes: &[u8]) -> std::result::Result<Vec<(String, Vec<RDPoint>)>, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header = reader.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(RD_CSV_HEADER) {
        return Err(format!(
            "expected header {:?}, found {:?}",
            RD_CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        ));
    }
    let mut curves: Vec<(String, Vec<RDPoint>)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let field = |i: usize| -> std::result::Result<f64, String> {
            record[i]
                .parse::<f64>()
                .map_err(|e| format!("row {}: column {}: {e}", line + 2, RD_CSV_HEADER[i]))
        };
        let point = RDPoint::new(field(1)?, field(2)?);
        let label = &record[0];
        match curves.iter_mut().find(|(l, _)| l == label) {
            Some((_, pts)) => pts.push(point),
            None => curves.push((label.to_string(), vec![point])),
        }
    }
    if curves.is_empty() {
        return Err("no data rows".into());
    }
    Ok(curves)
}

pub fn write_rd_csv(curves: &[(String, Vec<RDPoint>)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv encoding failed: {e}"));
    w.write_record(RD_CSV_HEADER).map_err(io)?;
    for (label, pts) in curves {
        for p in pts {
            w.write_record([label.clone(), p.rate.to_string(), p.quality.to_string()])
                .map_err(io)?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv encoding failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchor() -> Vec<RDPoint> {
        [(100.0, 30.0), (200.0, 33.0), (400.0, 36.0), (800.0, 39.0)]
            .map(|(r, q)| RDPoint::new(r, q))
            .to_vec()
    }

    fn scaled(points: &[RDPoint], k: f64) -> Vec<RDPoint> {
        points.iter().map(|p| RDPoint::new(p.rate * k, p.quality)).collect()
    }

    #[test]
    fn constant_shifts() {
        let a = anchor();
        assert_eq!(bd_rate(&a, &a).unwrap(), 0.0);
        assert!((bd_rate(&a, &scaled(&a, 2.0)).unwrap() - 100.0).abs() < 0.01);
        assert!((bd_rate(&a, &scaled(&a, 1.5)).unwrap() - 50.0).abs() < 0.01);
        let r_ab = bd_rate(&a, &scaled(&a, 1.5)).unwrap();
        let r_ba = bd_rate(&scaled(&a, 1.5), &a).unwrap();
        assert!(((1.0 + r_ab / 100.0) * (1.0 + r_ba / 100.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        let a = anchor();
        let far: Vec<RDPoint> = a.iter().map(|p| RDPoint::new(p.rate, p.quality + 20.0)).collect();
        assert!(matches!(bd_rate(&a, &far), Err(Error::NonOverlapping)));
        let mut bad = a.clone();
        bad[2].quality = 31.0;
        assert!(matches!(bd_rate(&a, &bad), Err(Error::NonMonotone(_))));
        assert!(bd_rate(&a[..3], &a).is_err());
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let curves = vec![("anchor".to_string(), anchor()), ("x2".to_string(), scaled(&anchor(), 2.0))];
        let bytes = write_rd_csv(&curves).unwrap();
        assert!(bytes.starts_with(b"label,rate_kbps,psnr_db\n"));
        assert_eq!(parse_rd_csv(&bytes).unwrap(), curves);
        assert!(parse_rd_csv(b"label,rate,psnr\na,1,2\n").is_err());
        assert!(parse_rd_csv(b"label,rate_kbps,psnr_db\na,x,2\n").is_err());
        assert!(parse_rd_csv(b"label,rate_kbps,psnr_db\n").is_err());
    }
}
