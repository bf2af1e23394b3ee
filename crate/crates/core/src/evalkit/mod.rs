//! Baseline masks, image quality metrics, pixel-rate accounting and the
//! Bjontegaard delta-rate calculator.

mod bdrate;
mod blocks;
mod metrics;
mod rate;

pub use bdrate::{bd_rate, read_rd_csv, write_rd_csv, RDPoint, RD_CSV_HEADER};
pub use blocks::random_block_mask;
pub use metrics::{gaussian_taps, luma, psnr, ssim, SsimParams};
pub use rate::{pixel_rate, PixelRateReport, PIXEL_RATE_LIMIT_MPXS, REFERENCE_FPS};
