//! Composition lines fitted across objects of interest.

mod line;
mod ransac;

pub use line::{clip_to_unit_square, LineModel};
pub use ransac::{fit_composition_lines, top_k, CompositionLine, RansacConfig};
