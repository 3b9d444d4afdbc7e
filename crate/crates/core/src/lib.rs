//! Analysis engine for drawing practice from a reference image.
//!
//! - [`composition`]: object-based composition lines fitted with a
//!   cross-object RANSAC over polygon contour samples.
//! - [`palette`] and [`matching`]: dominant value/color clusters in L\*a\*b\*,
//!   canvas↔reference matching and verbal feedback.
//! - [`imagecore`]: color spaces, value images, blur and region recoloring.
//! - [`segmentation`]: providers that turn prompts and boxes into masks.

pub mod composition;
pub mod error;
pub mod geometry;
pub mod imagecore;
pub mod matching;
pub mod palette;
pub mod segmentation;
pub mod svg;

pub use error::{Error, Result};
