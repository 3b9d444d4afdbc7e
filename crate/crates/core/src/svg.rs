//! SVG overlays for polygons, composition lines and grids.
//!
//! Normalized coordinates are scaled to the given pixel size so the overlay
//! can be stacked directly on top of the source image.

use std::fmt::Write;

use crate::composition::CompositionLine;
use crate::geometry::{DenseContour, NormPoint, OverlayPrimitive, PolygonContour};

const POLYGON_STROKE: &str = "#1e88e5";
const LINE_STROKE: &str = "#e53935";
const GRID_STROKE: &str = "#9e9e9e";
const CONTOUR_STROKE: &str = "#43a047";

#[derive(Debug, Clone)]
pub struct SvgOverlay {
    width: u32,
    height: u32,
    body: String,
}

impl SvgOverlay {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width: width.max(1),
            height: height.max(1),
            body: String::new(),
        }
    }

    fn px(&self, p: &NormPoint) -> (f64, f64) {
        (p.x * self.width as f64, p.y * self.height as f64)
    }

    fn points_attr(&self, pts: &[NormPoint]) -> String {
        pts.iter()
            .map(|p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn line(&mut self, a: &NormPoint, b: &NormPoint, stroke: &str, extra: &str) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"  <line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="2"{extra}/>"#
        );
    }

    pub fn add_polygons(&mut self, polygons: &[PolygonContour]) -> &mut Self {
        for poly in polygons {
            let pts = self.points_attr(&poly.vertices);
            let _ = writeln!(
                self.body,
                r#"  <polygon data-id="{}" points="{pts}" fill="none" stroke="{POLYGON_STROKE}" stroke-width="2"/>"#,
                poly.id
            );
        }
        self
    }

    pub fn add_contours(&mut self, contours: &[DenseContour]) -> &mut Self {
        for c in contours {
            let pts = self.points_attr(&c.points);
            let _ = writeln!(
                self.body,
                r#"  <polygon points="{pts}" fill="none" stroke="{CONTOUR_STROKE}" stroke-width="1"/>"#
            );
        }
        self
    }

    /// Lines without a visible segment are skipped.
    pub fn add_lines(&mut self, lines: &[CompositionLine]) -> &mut Self {
        for l in lines {
            if let Some([a, b]) = l.segment {
                self.line(&a, &b, LINE_STROKE, &format!(r#" data-rank="{}""#, l.rank));
            }
        }
        self
    }

    pub fn add_grid(&mut self, primitives: &[OverlayPrimitive]) -> &mut Self {
        for prim in primitives {
            match prim {
                OverlayPrimitive::Line { from, to } => {
                    self.line(from, to, GRID_STROKE, r#" stroke-dasharray="6 4""#)
                }
                OverlayPrimitive::Circle { center, radius } => {
                    let (cx, cy) = self.px(center);
                    // the circle is defined on the unit square; use the smaller side
                    let r = radius * self.width.min(self.height) as f64;
                    let _ = writeln!(
                        self.body,
                        r#"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="{GRID_STROKE}" stroke-width="2" stroke-dasharray="6 4"/>"#
                    );
                }
            }
        }
        self
    }

    pub fn render(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}
