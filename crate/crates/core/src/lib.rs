pub mod error;
pub mod evalkit;
pub mod imgio;
pub mod inpaint;
pub mod lehopp;
pub mod pipeline;
pub mod pruning;
pub mod renderer;
pub mod scenegen;

pub use error::{Error, Result};
