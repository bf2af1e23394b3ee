use std::collections::BTreeMap;

use super::ImportanceMap;
use crate::error::{Error, Result};
use crate::imgio::{NormImage, ScalarMap};
use crate::renderer::SourceGradient;

/// Running per-view sums of `|dL/dX|` over target renders.
#[derive(Clone, Debug, Default)]
pub struct AccumState {
    views: BTreeMap<usize, (NormImage, usize)>,
    target_count: usize,
}

impl AccumState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn target_count(&self) -> usize {
        self.target_count
    }

    /// Adds the gradients of one target render. Views absent from `grads`
    /// are untouched and keep their participation count.
    pub fn accumulate_targets(&mut self, grads: &[SourceGradient]) -> Result<()> {
        for g in grads {
            match self.views.get_mut(&g.view_id) {
                Some((sum, count)) => {
                    if !sum.same_shape(&g.grad) {
                        return Err(Error::ShapeMismatch(format!(
                            "gradient for view {} changed shape",
                            g.view_id
                        )));
                    }
                    for (s, v) in sum.data_mut().iter_mut().zip(g.grad.data()) {
                        *s += v.abs();
                    }
                    *count += 1;
                }
                None => {
                    let mut abs = g.grad.clone();
                    abs.data_mut().iter_mut().for_each(|v| *v = v.abs());
                    self.views.insert(g.view_id, (abs, 1));
                }
            }
        }
        self.target_count += 1;
        Ok(())
    }

    /// Folds `other` in after `self`; merging in ascending target order
    /// reproduces sequential accumulation.
    pub fn merge(&mut self, other: AccumState) -> Result<()> {
        for (id, (sum, count)) in other.views {
            match self.views.get_mut(&id) {
                Some((s, c)) => {
                    if !s.same_shape(&sum) {
                        return Err(Error::ShapeMismatch(format!("view {id} changed shape")));
                    }
                    for (a, b) in s.data_mut().iter_mut().zip(sum.data()) {
                        *a += b;
                    }
                    *c += count;
                }
                None => {
                    self.views.insert(id, (sum, count));
                }
            }
        }
        self.target_count += other.target_count;
        Ok(())
    }

    /// Mean `|dL/dX|` per view, each divided by the number of renders the
    /// view took part in.
    pub fn finalize_targets(&self) -> Result<BTreeMap<usize, NormImage>> {
        if self.target_count == 0 {
            return Err(Error::InvalidArgument(
                "cannot finalize gradient accumulation with no target renders".into(),
            ));
        }
        Ok(self
            .views
            .iter()
            .map(|(&id, (sum, count))| {
                let mut mean = sum.clone();
                let n = *count as f64;
                mean.data_mut().iter_mut().for_each(|v| *v /= n);
                (id, mean)
            })
            .collect())
    }
}

/// Element-wise sum of one view's per-frame maps within an intra-period.
pub fn accumulate_frames(maps: &[ImportanceMap], intra_period: usize) -> Result<ImportanceMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("no frames to accumulate".into()))?;
    if maps.len() > intra_period {
        return Err(Error::InvalidArgument(format!(
            "{} frames exceed the intra period of {intra_period}",
            maps.len()
        )));
    }
    let mut sum = vec![0f64; first.map.data().len()];
    for m in maps {
        if m.view_id != first.view_id {
            return Err(Error::InvalidArgument(format!(
                "mixed views {} and {} in one accumulation",
                first.view_id, m.view_id
            )));
        }
        if !m.map.same_shape(&first.map) {
            return Err(Error::ShapeMismatch("frame maps differ in shape".into()));
        }
        for (s, v) in sum.iter_mut().zip(m.map.data()) {
            *s += *v as f64;
        }
    }
    Ok(ImportanceMap {
        view_id: first.view_id,
        map: ScalarMap::new(
            first.map.width(),
            first.map.height(),
            sum.into_iter().map(|v| v as f32).collect(),
        )?,
    })
}
