//! Deterministic SVG figures of orbits.
//!
//! The unit square maps onto a square viewport with `(0, 0)` at the bottom
//! left. Numbers are written with at most six decimals so output is
//! byte-identical across runs and platforms.

use thiserror::Error;

use crate::exact::Point;
use crate::trajectory::{Orbit, TrajectorySpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("invalid render options: {0}")]
    InvalidOptions(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOptions {
    pub width_px: u32,
    pub show_grid: bool,
    pub show_cells: bool,
    /// Blade radius to sweep around the orbit, in unit-square coordinates.
    pub neighborhood_r: Option<f64>,
    pub stroke_width: f64,
    pub margin_px: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width_px: 512,
            show_grid: true,
            show_cells: false,
            neighborhood_r: None,
            stroke_width: 1.5,
            margin_px: 16,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::InvalidOptions(m.to_string()));
        if self.width_px < 64 {
            return bad("width_px must be at least 64");
        }
        if 2 * self.margin_px >= self.width_px {
            return bad("margin leaves no room for the square");
        }
        if !(self.stroke_width.is_finite() && self.stroke_width > 0.0) {
            return bad("stroke_width must be positive");
        }
        if let Some(r) = self.neighborhood_r {
            if !(r.is_finite() && r > 0.0) {
                return bad("neighborhood_r must be positive");
            }
        }
        Ok(())
    }
}

/// Fixed six-decimal formatting with trailing zeros removed.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Viewport {
    margin: f64,
    side: f64,
}

impl Viewport {
    fn x(&self, x: f64) -> f64 {
        self.margin + x * self.side
    }

    fn y(&self, y: f64) -> f64 {
        self.margin + (1.0 - y) * self.side
    }

    fn point(&self, p: &Point) -> String {
        let (x, y) = p.to_f64();
        format!("{},{}", num(self.x(x)), num(self.y(y)))
    }

    fn points<'a>(&self, pts: impl IntoIterator<Item = &'a Point>) -> String {
        pts.into_iter()
            .map(|p| self.point(p))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Vertices of the closed orbit path. Period-2 orbits retrace themselves, so
/// only their two distinct endpoints are kept.
fn path_vertices(orbit: &Orbit) -> Vec<&Point> {
    let segs = orbit.segments();
    if segs.len() == 2 && segs[0].canonical() == segs[1].canonical() {
        return vec![segs[0].start(), segs[0].end()];
    }
    let mut v: Vec<&Point> = segs.iter().map(|s| s.start()).collect();
    v.extend(segs.first().map(|s| s.start()));
    v
}

pub fn render_orbit(orbit: &Orbit, opts: &RenderOptions) -> Result<String, RenderError> {
    opts.validate()?;
    let w = opts.width_px;
    let vp = Viewport {
        margin: opts.margin_px as f64,
        side: (w - 2 * opts.margin_px) as f64,
    };
    let path = vp.points(path_vertices(orbit));
    let (x0, y0, side) = (num(vp.x(0.0)), num(vp.y(1.0)), num(vp.side));

    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#.into());
    line(format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#
    ));
    line(format!("<title>{}</title>", orbit.spec()));
    line(format!(
        r#"<defs><clipPath id="lawn"><rect x="{x0}" y="{y0}" width="{side}" height="{side}"/></clipPath></defs>"#
    ));
    line(format!(
        r#"<rect x="{x0}" y="{y0}" width="{side}" height="{side}" fill="white"/>"#
    ));

    if let Some(r) = opts.neighborhood_r {
        line(format!(
            r##"<polyline class="neighborhood" clip-path="url(#lawn)" points="{path}" fill="none" stroke="#9ecae1" stroke-width="{}" stroke-linecap="round" stroke-linejoin="round"/>"##,
            num(2.0 * r * vp.side)
        ));
    }

    if opts.show_cells && !orbit.cells().is_empty() {
        line(r##"<g class="cells" fill="#fdd0a2" fill-opacity="0.6" stroke="none">"##.into());
        for cell in orbit.cells().values() {
            line(format!(
                r#"<polygon points="{}"/>"#,
                vp.points(cell.vertices.iter())
            ));
        }
        line("</g>".into());
    }

    if opts.show_grid {
        if let TrajectorySpec::Sloped(s) = orbit.spec() {
            line(
                r##"<g class="grid" stroke="#969696" stroke-width="0.75" stroke-dasharray="4 3">"##
                    .into(),
            );
            let (top, bottom) = (num(vp.y(1.0)), num(vp.y(0.0)));
            for i in 1..s.p() {
                let x = num(vp.x(i as f64 / s.p() as f64));
                line(format!(
                    r#"<line x1="{x}" y1="{top}" x2="{x}" y2="{bottom}"/>"#
                ));
            }
            let (left, right) = (num(vp.x(0.0)), num(vp.x(1.0)));
            for j in 1..s.q() {
                let y = num(vp.y(j as f64 / s.q() as f64));
                line(format!(
                    r#"<line x1="{left}" y1="{y}" x2="{right}" y2="{y}"/>"#
                ));
            }
            line("</g>".into());
        }
    }

    line(format!(
        r##"<polyline class="orbit" points="{path}" fill="none" stroke="#d62728" stroke-width="{}" stroke-linejoin="round"/>"##,
        num(opts.stroke_width)
    ));
    line(format!(
        r#"<rect x="{x0}" y="{y0}" width="{side}" height="{side}" fill="none" stroke="black" stroke-width="1"/>"#
    ));
    line("</svg>".into());
    Ok(out)
}

/// Number of straight pieces in the `orbit` polyline of a rendered figure.
pub fn polyline_segment_count(svg: &str) -> Option<usize> {
    let line = svg.lines().find(|l| l.contains(r#"class="orbit""#))?;
    let start = line.find("points=\"")? + 8;
    let end = start + line[start..].find('"')?;
    let n = line[start..end].split_whitespace().count();
    n.checked_sub(1)
}
