use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imgio::BitMask;
use crate::lehopp::{check_gamma, prune_count};

/// Block-random pruning: the image is tiled into `block`x`block` cells
/// (border cells truncated), cells are visited in a seeded random order and
/// pruned whole until the next one would overshoot `round(gamma * W * H)`;
/// that cell is then pruned partially in row-major order so the count is
/// exact.
pub fn random_block_mask(width: usize, height: usize, block: usize, gamma: f64, seed: u64) -> Result<BitMask> {
    if block == 0 {
        return Err(Error::InvalidArgument("block size must be at least 1".into()));
    }
    check_gamma(gamma)?;
    let target = prune_count(gamma, width * height);
    let mut mask = BitMask::all_kept(width, height);
    if target == 0 {
        return Ok(mask);
    }

    let mut cells: Vec<(usize, usize)> = (0..height)
        .step_by(block)
        .flat_map(|y| (0..width).step_by(block).map(move |x| (x, y)))
        .collect();
    cells.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut pruned = 0;
    for (x0, y0) in cells {
        let x1 = (x0 + block).min(width);
        let y1 = (y0 + block).min(height);
        for y in y0..y1 {
            for x in x0..x1 {
                if pruned == target {
                    return Ok(mask);
                }
                mask.set(x, y, false);
                pruned += 1;
            }
        }
    }
    Ok(mask)
}
