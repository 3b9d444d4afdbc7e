//! Outer boundary tracing for binary masks.
//!
//! Components are 8-connected. Each component's outer boundary is followed
//! along pixel edges ("crack" boundary), so vertices sit on pixel corners and
//! a full-image component spans exactly `[0,1] × [0,1]`. Holes are never
//! visited because tracing starts on the top edge of the component's first
//! pixel in raster order, which always lies on the outer boundary.

use std::collections::VecDeque;

use super::types::{BoundingBox, DenseContour, NormPoint};
use crate::error::{Error, Result};
use crate::imagecore::Mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Heading {
    East,
    South,
    West,
    North,
}

impl Heading {
    fn step(self) -> (i64, i64) {
        match self {
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
            Heading::North => (0, -1),
        }
    }

    fn left(self) -> Heading {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    fn right(self) -> Heading {
        match self {
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
            Heading::North => Heading::East,
        }
    }

    /// Pixels just ahead of corner `(x, y)`: (left of travel, right of travel).
    fn ahead(self, x: i64, y: i64) -> ((i64, i64), (i64, i64)) {
        match self {
            Heading::East => ((x, y - 1), (x, y)),
            Heading::South => ((x, y), (x - 1, y)),
            Heading::West => ((x - 1, y), (x - 1, y - 1)),
            Heading::North => ((x - 1, y - 1), (x, y - 1)),
        }
    }
}

/// One contour per 8-connected foreground component, ordered by each
/// component's first pixel in raster order.
pub fn extract_outer_contour(mask: &Mask) -> Result<Vec<DenseContour>> {
    let starts = component_starts(mask);
    if starts.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    Ok(starts
        .into_iter()
        .map(|(x, y)| {
            let corners = trace_from(mask, x, y);
            DenseContour::new(
                corners
                    .into_iter()
                    .map(|(cx, cy)| NormPoint::new(cx as f64 / w, cy as f64 / h))
                    .collect(),
            )
        })
        .collect())
}

/// First pixel (raster order) of every 8-connected component.
fn component_starts(mask: &Mask) -> Vec<(i64, i64)> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut seen = vec![false; w * h];
    let mut starts = Vec::new();
    let mut queue = VecDeque::new();
    let bits = mask.bits();

    for idx in 0..w * h {
        if !bits[idx] || seen[idx] {
            continue;
        }
        starts.push(((idx % w) as i64, (idx / w) as i64));
        seen[idx] = true;
        queue.push_back(idx);
        while let Some(cur) = queue.pop_front() {
            let (cx, cy) = ((cur % w) as i64, (cur / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = ny as usize * w + nx as usize;
                    if bits[n] && !seen[n] {
                        seen[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    starts
}

/// Follows the outer crack boundary with the foreground kept on the right.
fn trace_from(mask: &Mask, px: i64, py: i64) -> Vec<(i64, i64)> {
    let start = (px, py);
    let mut corner = start;
    let mut heading = Heading::East;
    let mut out = vec![start];
    loop {
        let (dx, dy) = heading.step();
        corner = (corner.0 + dx, corner.1 + dy);
        if corner == start {
            break;
        }
        out.push(corner);
        let (left, right) = heading.ahead(corner.0, corner.1);
        heading = if mask.get_signed(left.0, left.1) {
            heading.left()
        } else if mask.get_signed(right.0, right.1) {
            heading
        } else {
            heading.right()
        };
    }
    out
}

/// Tight box over every point of every contour.
pub fn bbox_of_contours(contours: &[DenseContour]) -> Result<BoundingBox> {
    let mut points = contours.iter().flat_map(|c| c.points.iter());
    let first = points.next().ok_or(Error::EmptyInput)?;
    let mut bbox = BoundingBox {
        x_min: first.x,
        y_min: first.y,
        x_max: first.x,
        y_max: first.y,
    };
    for p in points {
        bbox.x_min = bbox.x_min.min(p.x);
        bbox.y_min = bbox.y_min.min(p.y);
        bbox.x_max = bbox.x_max.max(p.x);
        bbox.y_max = bbox.y_max.max(p.y);
    }
    Ok(bbox)
}
