use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::imgio::{BitMask, ScalarMap};

/// Result of marching outward from the kept pixels into the pruned region.
pub(crate) struct March {
    /// Arrival time per pixel; 0 on kept pixels.
    pub time: Vec<f64>,
    /// Pruned pixel indices in the order they were finalized.
    pub order: Vec<usize>,
}

#[derive(PartialEq)]
struct Entry {
    time: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap; ties resolve to the lower
    // row-major index, i.e. by (row, column)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fast marching on the 4-connected grid. Pruned pixels touching a kept
/// pixel start at distance 1; the rest follow the first-order eikonal update.
pub(crate) fn march(mask: &BitMask) -> Result<March> {
    let (w, h) = (mask.width(), mask.height());
    let n = w * h;
    let kept = mask.bits();
    let mut time = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n - mask.kept_count());
    if order.capacity() == 0 {
        return Ok(March {
            time: vec![0.0; n],
            order,
        });
    }
    if mask.kept_count() == 0 {
        return Err(Error::NoBoundary);
    }

    let mut heap = BinaryHeap::new();
    for i in 0..n {
        if kept[i] {
            time[i] = 0.0;
            done[i] = true;
        } else if neighbors(i, w, h).any(|j| kept[j]) {
            time[i] = 1.0;
            heap.push(Entry { time: 1.0, index: i });
        }
    }

    while let Some(Entry { time: t, index }) = heap.pop() {
        if done[index] || t > time[index] {
            continue;
        }
        done[index] = true;
        order.push(index);
        for j in neighbors(index, w, h) {
            if done[j] {
                continue;
            }
            let candidate = solve(j, w, h, &time, &done, kept);
            if candidate < time[j] {
                time[j] = candidate;
                heap.push(Entry {
                    time: candidate,
                    index: j,
                });
            }
        }
    }
    Ok(March { time, order })
}

fn solve(i: usize, w: usize, h: usize, time: &[f64], done: &[bool], kept: &[bool]) -> f64 {
    let (x, y) = (i % w, i / w);
    let finalized = |j: usize| {
        if done[j] && !kept[j] {
            time[j]
        } else {
            f64::INFINITY
        }
    };
    let mut a = f64::INFINITY;
    if x > 0 {
        a = a.min(finalized(i - 1));
    }
    if x + 1 < w {
        a = a.min(finalized(i + 1));
    }
    let mut b = f64::INFINITY;
    if y > 0 {
        b = b.min(finalized(i - w));
    }
    if y + 1 < h {
        b = b.min(finalized(i + w));
    }
    if a.is_finite() && b.is_finite() && (a - b).abs() < 1.0 {
        let d = a - b;
        (a + b + (2.0 - d * d).sqrt()) / 2.0
    } else {
        a.min(b) + 1.0
    }
}

pub(crate) fn neighbors(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    [
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y > 0).then(|| i - w),
        (y + 1 < h).then(|| i + w),
    ]
    .into_iter()
    .flatten()
}

/// Approximate Euclidean distance from each pruned pixel to the kept set.
pub fn fmm_distance(mask: &BitMask) -> Result<ScalarMap> {
    let m = march(mask)?;
    ScalarMap::new(
        mask.width(),
        mask.height(),
        m.time.iter().map(|&t| t as f32).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_pruned() {
        let d = fmm_distance(&BitMask::all_kept(4, 3)).unwrap();
        assert!(d.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn all_pruned_fails() {
        assert!(matches!(fmm_distance(&BitMask::all_pruned(2, 2)), Err(Error::NoBoundary)));
    }

    #[test]
    fn single_pixel_hole() {
        let mut mask = BitMask::all_kept(3, 3);
        mask.set(1, 1, false);
        let d = fmm_distance(&mask).unwrap();
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn row_segment_rises_then_falls() {
        let k = 7;
        let mut bits = vec![false; k + 2];
        bits[0] = true;
        bits[k + 1] = true;
        let mask = BitMask::new(k + 2, 1, bits).unwrap();
        let d = fmm_distance(&mask).unwrap();
        let seg: Vec<f32> = d.data()[1..=k].to_vec();
        assert_eq!(seg, vec![1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn segment_inside_image_is_unimodal() {
        // 1x6 pruned segment in the middle of a 10x3 image
        let mut mask = BitMask::all_kept(10, 3);
        for x in 2..8 {
            mask.set(x, 1, false);
        }
        let d = fmm_distance(&mask).unwrap();
        let seg: Vec<f32> = (2..8).map(|x| d.get(x, 1)).collect();
        let peak = seg
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(seg[..=peak].windows(2).all(|p| p[0] <= p[1]));
        assert!(seg[peak..].windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn distances_grow_into_a_block() {
        let mut mask = BitMask::all_kept(9, 9);
        for y in 2..7 {
            for x in 2..7 {
                mask.set(x, y, false);
            }
        }
        let m = march(&mask).unwrap();
        assert_eq!(m.order.len(), 25);
        let center = m.time[4 * 9 + 4];
        assert!(center > 2.5 && center < 3.5, "{center}");
        // finalization order is non-decreasing in time
        assert!(m.order.windows(2).all(|p| m.time[p[0]] <= m.time[p[1]]));
    }
}
