//! Contours, polygon simplification, point sampling, boxes and grids.

mod contour;
mod grid;
mod rdp;
mod sampling;
mod types;

pub use contour::{bbox_of_contours, extract_outer_contour};
pub use grid::{generate_grid, GridKind, OverlayPrimitive};
pub use rdp::{max_deviation, simplify_rdp, DEFAULT_EPSILON};
pub use sampling::{edge_quota, sample_polygon_points};
pub use types::{
    iou, point_segment_distance, try_iou, BoundingBox, DenseContour, NormPoint, PolygonContour,
    PolygonId, SampledPoint,
};
