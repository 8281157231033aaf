//! Scene to vector document.
//!
//! Geometry is written at full `f64` precision so that re-parsing an export
//! reproduces every control point.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{serialize_scene, Axis, Canvas, CanvasId, DocumentError, ObjectKind, Orientation, Rgba, Scene, VisualObject};

const TICK_LENGTH: f64 = 6.0;
const INK: &str = "#333333";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExportFormat {
    Svg,
    Scene,
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("unknown canvas {0}")]
    UnknownCanvas(CanvasId),
    #[error(transparent)]
    Document(#[from] DocumentError),
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn paint(out: &mut String, attr: &str, color: Option<Rgba>) {
    match color {
        None => {
            let _ = write!(out, r#" {attr}="none""#);
        }
        Some(c) => {
            let _ = write!(out, r#" {attr}="{}""#, c.rgb_hex());
            if c.0[3] < 255 {
                let _ = write!(out, r#" {attr}-opacity="{}""#, c.alpha_fraction());
            }
        }
    }
}

fn style_attrs(o: &VisualObject) -> String {
    let mut s = String::new();
    paint(&mut s, "fill", o.style.fill);
    paint(&mut s, "stroke", o.style.stroke);
    if o.style.stroke.is_some() {
        let _ = write!(s, r#" stroke-width="{}""#, o.style.stroke_width);
    }
    if o.style.opacity != 1.0 {
        let _ = write!(s, r#" opacity="{}""#, o.style.opacity);
    }
    s
}

fn write_axis(out: &mut String, canvas: &Canvas, axis: &Axis) {
    let line = |out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64| {
        let _ = writeln!(out, r#"    <line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{INK}" stroke-width="1"/>"#);
    };
    let at = axis.baseline_position;
    let [a, b] = axis.extent;
    match axis.orientation {
        Orientation::Horizontal => {
            let centre = canvas.bounds.y + canvas.bounds.height / 2.0;
            let out_side = if at >= centre { 1.0 } else { -1.0 };
            line(out, a, at, b, at);
            for t in &axis.ticks {
                line(out, t.position, at, t.position, at + out_side * TICK_LENGTH);
                let y = if out_side > 0.0 { at + 20.0 } else { at - 10.0 };
                let _ = writeln!(
                    out,
                    r#"    <text x="{}" y="{y}" text-anchor="middle" font-size="11" fill="{INK}">{}</text>"#,
                    t.position,
                    escape(&t.label)
                );
            }
        }
        Orientation::Vertical => {
            let centre = canvas.bounds.x + canvas.bounds.width / 2.0;
            let out_side = if at <= centre { -1.0 } else { 1.0 };
            line(out, at, a, at, b);
            for t in &axis.ticks {
                line(out, at + out_side * TICK_LENGTH, t.position, at, t.position);
                let (x, anchor) = if out_side < 0.0 { (at - 10.0, "end") } else { (at + 10.0, "start") };
                let _ = writeln!(
                    out,
                    r#"    <text x="{x}" y="{}" text-anchor="{anchor}" font-size="11" fill="{INK}">{}</text>"#,
                    t.position + 4.0,
                    escape(&t.label)
                );
            }
        }
    }
}

fn write_object(out: &mut String, canvas: &Canvas, o: &VisualObject) {
    let pts: Vec<_> = o.control_point_ids.iter().filter_map(|p| canvas.point(*p)).collect();
    let style = style_attrs(o);
    match o.kind {
        ObjectKind::Point => {
            if let Some(p) = pts.first() {
                let _ = writeln!(out, r#"    <circle cx="{}" cy="{}" r="{}"{style}/>"#, p.x, p.y, p.r);
            }
        }
        ObjectKind::Line | ObjectKind::Area => {
            let mut d = String::new();
            for (i, p) in pts.iter().enumerate() {
                let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, p.x, p.y);
            }
            if o.kind == ObjectKind::Area {
                d.push_str(" Z");
            }
            let _ = writeln!(out, r#"    <path d="{d}"{style}/>"#);
        }
    }
}

fn write_canvas(out: &mut String, canvas: &Canvas, dx: f64) {
    let _ = writeln!(out, r#"  <g data-canvas="{}" transform="translate({dx} 0)">"#, canvas.id.0);
    for axis in &canvas.axes {
        write_axis(out, canvas, axis);
    }
    for o in &canvas.objects {
        write_object(out, canvas, o);
    }
    out.push_str("  </g>\n");
}

/// Every canvas of the scene, laid out left to right.
pub fn export_svg(scene: &Scene) -> String {
    let width: f64 = scene.canvases.iter().map(|c| c.bounds.width).sum();
    let height = scene.canvases.iter().map(|c| c.bounds.height).fold(0.0, f64::max);
    let mut body = String::new();
    let mut offset = 0.0;
    for c in &scene.canvases {
        write_canvas(&mut body, c, offset - c.bounds.x);
        offset += c.bounds.width;
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n{body}</svg>\n"
    )
}

/// One canvas in its own coordinates.
pub fn export_canvas_svg(canvas: &Canvas) -> String {
    let b = canvas.bounds;
    let mut body = String::new();
    write_canvas(&mut body, canvas, 0.0);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">\n{body}</svg>\n",
        b.width, b.height, b.x, b.y, b.width, b.height
    )
}

/// A canvas as bytes in the requested format. The scene format wraps the
/// canvas in a one-canvas scene document.
pub fn export_canvas(scene: &Scene, canvas_id: CanvasId, format: ExportFormat) -> Result<Vec<u8>, ExportError> {
    let canvas = scene.canvas(canvas_id).ok_or(ExportError::UnknownCanvas(canvas_id))?;
    match format {
        ExportFormat::Svg => Ok(export_canvas_svg(canvas).into_bytes()),
        ExportFormat::Scene => {
            let mut single = scene.clone();
            single.canvases.retain(|c| c.id == canvas_id);
            Ok(serialize_scene(&single)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_escaped() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn translucent_paint_gets_opacity() {
        let mut s = String::new();
        paint(&mut s, "fill", Some(Rgba([255, 0, 0, 51])));
        assert_eq!(s, r##" fill="#ff0000" fill-opacity="0.2""##);
    }
}
