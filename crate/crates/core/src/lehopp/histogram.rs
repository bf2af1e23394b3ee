use super::ImportanceMap;

pub const HISTOGRAM_BINS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Log-spaced histogram of the strictly positive importance values; exact
/// zeros cannot sit on a log axis and are counted separately.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub zeros: usize,
}

pub fn importance_histogram(maps: &[ImportanceMap], n_bins: usize) -> Histogram {
    let values: Vec<f64> = maps
        .iter()
        .flat_map(|m| m.map.data().iter().map(|&v| v as f64))
        .collect();
    let zeros = values.iter().filter(|&&v| v <= 0.0).count();
    let positive: Vec<f64> = values.into_iter().filter(|&v| v > 0.0).collect();
    if positive.is_empty() || n_bins == 0 {
        return Histogram {
            bins: Vec::new(),
            zeros,
        };
    }
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min).log10();
    let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
    // a single distinct value still gets a bin of nonzero width
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let step = (hi - lo) / n_bins as f64;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            lower: 10f64.powf(lo + step * i as f64),
            upper: 10f64.powf(lo + step * (i + 1) as f64),
            count: 0,
        })
        .collect();
    for v in positive {
        let i = (((v.log10() - lo) / step) as usize).min(n_bins - 1);
        bins[i].count += 1;
    }
    Histogram { bins, zeros }
}
