use super::{check_gamma, prune_count, Fill, ImportanceMap, Scope};
use crate::error::{Error, Result};
use crate::imgio::{BitMask, Image, ScalarMap};
use crate::inpaint::{self, InpaintConfig};

/// Prunes exactly `round(gamma * W * H)` pixels of lowest importance. Ties
/// are broken by (row, column), so the mask depends only on the rank order
/// of the map.
pub fn build_mask(map: &ScalarMap, gamma: f64) -> Result<BitMask> {
    check_gamma(gamma)?;
    let n = map.data().len();
    let k = prune_count(gamma, n);
    let mut order: Vec<usize> = (0..n).collect();
    let data = map.data();
    order.sort_by(|&a, &b| data[a].total_cmp(&data[b]).then(a.cmp(&b)));
    let mut mask = BitMask::all_kept(map.width(), map.height());
    for &i in &order[..k] {
        mask.set_index(i, false);
    }
    Ok(mask)
}

/// One mask per map, in input order. With [`Scope::Global`] the
/// `round(gamma * sum(W * H))` lowest pixels across all views are pruned,
/// ties broken by (view id, row, column).
pub fn build_masks(maps: &[ImportanceMap], gamma: f64, scope: Scope) -> Result<Vec<BitMask>> {
    check_gamma(gamma)?;
    match scope {
        Scope::PerView => maps.iter().map(|m| build_mask(&m.map, gamma)).collect(),
        Scope::Global => {
            let total: usize = maps.iter().map(|m| m.map.data().len()).sum();
            let k = prune_count(gamma, total);
            let mut all: Vec<(f32, usize, usize, usize)> = maps
                .iter()
                .enumerate()
                .flat_map(|(slot, m)| {
                    m.map
                        .data()
                        .iter()
                        .enumerate()
                        .map(move |(i, &v)| (v, m.view_id, i, slot))
                })
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut masks: Vec<BitMask> = maps
                .iter()
                .map(|m| BitMask::all_kept(m.map.width(), m.map.height()))
                .collect();
            for &(_, _, i, slot) in &all[..k] {
                masks[slot].set_index(i, false);
            }
            Ok(masks)
        }
    }
}

/// Keeps masked-in pixels and fills the rest according to `fill`.
pub fn apply_mask(image: &Image, mask: &BitMask, fill: Fill, cfg: &InpaintConfig) -> Result<Image> {
    if image.width() != mask.width() || image.height() != mask.height() {
        return Err(Error::ShapeMismatch(format!(
            "image {}x{} vs mask {}x{}",
            image.width(),
            image.height(),
            mask.width(),
            mask.height()
        )));
    }
    inpaint::by_name(fill.inpainter(), *cfg)?.inpaint(image, mask)
}
