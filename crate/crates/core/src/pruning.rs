//! Interchangeable mask strategies selected by name.

use crate::error::{Error, Result};
use crate::evalkit::random_block_mask;
use crate::imgio::BitMask;
use crate::lehopp::{build_masks, check_gamma, ImportanceMap, Scope};

/// Size and identity of a source view to be masked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ViewShape {
    pub view_id: usize,
    pub width: usize,
    pub height: usize,
}

pub trait Pruner: Send + Sync {
    fn name(&self) -> &str;

    fn needs_importance(&self) -> bool {
        false
    }

    /// One mask per entry of `views`, in the same order. `period` is the
    /// intra-period the masks belong to.
    fn masks(
        &self,
        views: &[ViewShape],
        importance: Option<&[ImportanceMap]>,
        gamma: f64,
        period: usize,
    ) -> Result<Vec<BitMask>>;
}

pub struct LehoppPruner {
    pub scope: Scope,
}

impl Pruner for LehoppPruner {
    fn name(&self) -> &str {
        "lehopp"
    }

    fn needs_importance(&self) -> bool {
        true
    }

    fn masks(
        &self,
        views: &[ViewShape],
        importance: Option<&[ImportanceMap]>,
        gamma: f64,
        _period: usize,
    ) -> Result<Vec<BitMask>> {
        let maps = importance.ok_or_else(|| Error::InvalidArgument("lehopp pruning needs importance maps".into()))?;
        let ordered: Vec<ImportanceMap> = views
            .iter()
            .map(|v| {
                let m = maps
                    .iter()
                    .find(|m| m.view_id == v.view_id)
                    .ok_or_else(|| Error::InvalidArgument(format!("no importance map for view {}", v.view_id)))?;
                if m.map.width() != v.width || m.map.height() != v.height {
                    return Err(Error::ShapeMismatch(format!("importance map of view {}", v.view_id)));
                }
                Ok(m.clone())
            })
            .collect::<Result<_>>()?;
        build_masks(&ordered, gamma, self.scope)
    }
}

/// Seeded block-random pruning; each view and intra-period draws its own
/// cell order.
pub struct BlockPruner {
    label: String,
    pub block: usize,
    pub seed: u64,
}

impl BlockPruner {
    pub fn new(label: impl Into<String>, block: usize, seed: u64) -> Result<Self> {
        if block == 0 {
            return Err(Error::InvalidArgument("block size must be at least 1".into()));
        }
        Ok(Self {
            label: label.into(),
            block,
            seed,
        })
    }

    fn view_seed(&self, view_id: usize, period: usize) -> u64 {
        self.seed
            ^ (view_id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (period as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
    }
}

impl Pruner for BlockPruner {
    fn name(&self) -> &str {
        &self.label
    }

    fn masks(
        &self,
        views: &[ViewShape],
        _importance: Option<&[ImportanceMap]>,
        gamma: f64,
        period: usize,
    ) -> Result<Vec<BitMask>> {
        check_gamma(gamma)?;
        views
            .iter()
            .map(|v| random_block_mask(v.width, v.height, self.block, gamma, self.view_seed(v.view_id, period)))
            .collect()
    }
}

pub const BASE1_BLOCK: usize = 32;
pub const BASE2_BLOCK: usize = 4;

/// Registered names: `lehopp`, `base1` (32x32 blocks), `base2` (4x4 blocks)
/// and `random-block` (block size from `block`).
pub const PRUNERS: &[&str] = &["lehopp", "base1", "base2", "random-block"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrunerOptions {
    pub scope: Scope,
    pub seed: u64,
    pub block: Option<usize>,
}

pub fn by_name(name: &str, opts: &PrunerOptions) -> Result<Box<dyn Pruner>> {
    Ok(match name {
        "lehopp" => Box::new(LehoppPruner { scope: opts.scope }),
        "base1" => Box::new(BlockPruner::new(name, BASE1_BLOCK, opts.seed)?),
        "base2" => Box::new(BlockPruner::new(name, BASE2_BLOCK, opts.seed)?),
        "random-block" => {
            let block = opts
                .block
                .ok_or_else(|| Error::InvalidArgument("random-block needs a block size".into()))?;
            Box::new(BlockPruner::new(format!("random-block-{block}"), block, opts.seed)?)
        }
        other => {
            return Err(Error::UnknownStrategy {
                kind: "pruner",
                name: other.to_string(),
            })
        }
    })
}
