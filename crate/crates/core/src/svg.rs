//! Vector chart parsing: elements with absolute geometry, then visual
//! objects, then object sets and axis furniture.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use svgtypes::{SimplePathSegment, SimplifyingPathParser, Transform};
use thiserror::Error;

use crate::model::{
    ControlPoint, IdGen, ObjectId, ObjectKind, Rect, Rgba, StyleRecord, VisualObject, VisualObjectSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ElementKind {
    Circle,
    Rect,
    Line,
    OpenPath,
    ClosedPath,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextAnchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawElement {
    pub kind: ElementKind,
    /// Absolute coordinates; for text, the single anchor point.
    pub absolute_points: Vec<(f64, f64)>,
    pub radius: f64,
    pub style: StyleRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_anchor: Option<TextAnchor>,
    /// Byte offset of the element's start tag.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParseWarning {
    pub element: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDocument {
    pub elements: Vec<RawElement>,
    pub bounds: Rect,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SvgError {
    #[error("malformed document at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("document is not UTF-8 (byte {offset})")]
    Encoding { offset: usize },
    #[error("root element is <{0}>, expected <svg>")]
    NotSvg(String),
    #[error("bad attribute `{attribute}` at byte {offset}: {message}")]
    Attribute { attribute: String, offset: usize, message: String },
}

/// Inherited presentation state while walking the tree.
#[derive(Debug, Clone, Copy)]
struct Context {
    transform: Transform,
    fill: Option<Rgba>,
    stroke: Option<Rgba>,
    stroke_width: f64,
    fill_opacity: f64,
    stroke_opacity: f64,
    opacity: f64,
    anchor: TextAnchor,
}

impl Default for Context {
    fn default() -> Self {
        Self {
            transform: Transform::default(),
            fill: Some(Rgba::BLACK),
            stroke: None,
            stroke_width: 1.0,
            fill_opacity: 1.0,
            stroke_opacity: 1.0,
            opacity: 1.0,
            anchor: TextAnchor::Start,
        }
    }
}

impl Context {
    fn style(&self) -> StyleRecord {
        StyleRecord {
            fill: self.fill.map(|c| c.with_alpha_factor(self.fill_opacity)),
            stroke: self.stroke.map(|c| c.with_alpha_factor(self.stroke_opacity)),
            stroke_width: self.stroke_width,
            opacity: self.opacity,
        }
    }
}

fn compose(outer: &Transform, inner: &Transform) -> Transform {
    Transform::new(
        outer.a * inner.a + outer.c * inner.b,
        outer.b * inner.a + outer.d * inner.b,
        outer.a * inner.c + outer.c * inner.d,
        outer.b * inner.c + outer.d * inner.d,
        outer.a * inner.e + outer.c * inner.f + outer.e,
        outer.b * inner.e + outer.d * inner.f + outer.f,
    )
}

fn apply(t: &Transform, x: f64, y: f64) -> (f64, f64) {
    (t.a * x + t.c * y + t.e, t.b * x + t.d * y + t.f)
}

fn byte_offset(text: &str, pos: roxmltree::TextPos) -> usize {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == pos.row as usize {
            let col = (pos.col as usize).saturating_sub(1);
            return offset + line.char_indices().nth(col).map_or(line.len(), |(b, _)| b);
        }
        offset += line.len();
    }
    text.len()
}

pub fn parse_document(bytes: &[u8]) -> Result<ParsedDocument, SvgError> {
    let text = std::str::from_utf8(bytes).map_err(|e| SvgError::Encoding { offset: e.valid_up_to() })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| SvgError::Malformed {
        offset: byte_offset(text, e.pos()),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(SvgError::NotSvg(root.tag_name().name().to_string()));
    }
    let mut parser = Walker { elements: Vec::new(), warnings: Vec::new() };
    let bounds = canvas_bounds(&root)?;
    let ctx = parser.inherit(&root, Context::default())?;
    for child in root.children().filter(|n| n.is_element()) {
        parser.visit(&child, ctx)?;
    }
    Ok(ParsedDocument { elements: parser.elements, bounds, warnings: parser.warnings })
}

fn canvas_bounds(root: &roxmltree::Node) -> Result<Rect, SvgError> {
    let view_box = match root.attribute("viewBox") {
        Some(v) => Some(svgtypes::ViewBox::from_str(v).map_err(|e| SvgError::Attribute {
            attribute: "viewBox".into(),
            offset: root.range().start,
            message: e.to_string(),
        })?),
        None => None,
    };
    let width = length_attr(root, "width")?;
    let height = length_attr(root, "height")?;
    Ok(match (view_box, width, height) {
        (Some(vb), _, _) => Rect::new(vb.x, vb.y, vb.w, vb.h),
        (None, Some(w), Some(h)) => Rect::new(0.0, 0.0, w, h),
        _ => Rect::new(0.0, 0.0, 0.0, 0.0),
    })
}

fn length_attr(node: &roxmltree::Node, name: &str) -> Result<Option<f64>, SvgError> {
    let Some(raw) = node.attribute(name) else { return Ok(None) };
    // Coordinate lists on text take their first entry.
    let first = raw.split([' ', ',']).find(|s| !s.is_empty()).unwrap_or("");
    svgtypes::Length::from_str(first).map(|l| Some(l.number)).map_err(|e| SvgError::Attribute {
        attribute: name.to_string(),
        offset: node.range().start,
        message: e.to_string(),
    })
}

fn number_or_zero(node: &roxmltree::Node, name: &str) -> Result<f64, SvgError> {
    Ok(length_attr(node, name)?.unwrap_or(0.0))
}

/// Presentation attributes, with a `style="k: v; ..."` declaration taking precedence.
fn presentation<'a>(node: &roxmltree::Node<'a, 'a>) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for key in ["fill", "stroke", "stroke-width", "opacity", "fill-opacity", "stroke-opacity", "text-anchor"] {
        if let Some(v) = node.attribute(key) {
            out.insert(key.to_string(), v.trim().to_string());
        }
    }
    if let Some(style) = node.attribute("style") {
        for decl in style.split(';') {
            if let Some((k, v)) = decl.split_once(':') {
                out.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    out
}

struct Walker {
    elements: Vec<RawElement>,
    warnings: Vec<ParseWarning>,
}

impl Walker {
    fn attr_error(node: &roxmltree::Node, attribute: &str, message: impl ToString) -> SvgError {
        SvgError::Attribute {
            attribute: attribute.to_string(),
            offset: node.range().start,
            message: message.to_string(),
        }
    }

    fn inherit(&mut self, node: &roxmltree::Node, parent: Context) -> Result<Context, SvgError> {
        let mut ctx = parent;
        if let Some(t) = node.attribute("transform") {
            let local = Transform::from_str(t).map_err(|e| Self::attr_error(node, "transform", e))?;
            ctx.transform = compose(&parent.transform, &local);
        }
        for (key, value) in presentation(node) {
            let paint = |v: &str| -> Result<Option<Rgba>, SvgError> {
                if v == "none" || v == "transparent" {
                    return Ok(None);
                }
                let c = svgtypes::Color::from_str(v).map_err(|e| Self::attr_error(node, &key, e))?;
                Ok(Some(Rgba([c.red, c.green, c.blue, c.alpha])))
            };
            let number = |v: &str| -> Result<f64, SvgError> {
                svgtypes::Length::from_str(v).map(|l| l.number).map_err(|e| Self::attr_error(node, &key, e))
            };
            match key.as_str() {
                "fill" => ctx.fill = paint(&value)?,
                "stroke" => ctx.stroke = paint(&value)?,
                "stroke-width" => ctx.stroke_width = number(&value)?,
                "fill-opacity" => ctx.fill_opacity = number(&value)?,
                "stroke-opacity" => ctx.stroke_opacity = number(&value)?,
                "opacity" => ctx.opacity = parent.opacity * number(&value)?,
                "text-anchor" => {
                    ctx.anchor = match value.as_str() {
                        "middle" => TextAnchor::Middle,
                        "end" => TextAnchor::End,
                        _ => TextAnchor::Start,
                    }
                }
                _ => {}
            }
        }
        Ok(ctx)
    }

    fn push(&mut self, node: &roxmltree::Node, ctx: &Context, kind: ElementKind, local: Vec<(f64, f64)>, radius: f64) {
        let absolute_points = local.into_iter().map(|(x, y)| apply(&ctx.transform, x, y)).collect();
        // Uniform scale carries over to circle radii.
        let scale = (ctx.transform.a * ctx.transform.d - ctx.transform.b * ctx.transform.c).abs().sqrt();
        self.elements.push(RawElement {
            kind,
            absolute_points,
            radius: radius * scale,
            style: ctx.style(),
            text_content: None,
            text_anchor: None,
            offset: node.range().start,
        });
    }

    fn warn(&mut self, node: &roxmltree::Node, message: &str) {
        self.warnings.push(ParseWarning {
            element: node.tag_name().name().to_string(),
            offset: node.range().start,
            message: message.to_string(),
        });
    }

    fn visit(&mut self, node: &roxmltree::Node, parent: Context) -> Result<(), SvgError> {
        let ctx = self.inherit(node, parent)?;
        let num = |name: &str| number_or_zero(node, name);
        match node.tag_name().name() {
            "g" | "a" => {
                for child in node.children().filter(|n| n.is_element()) {
                    self.visit(&child, ctx)?;
                }
            }
            "circle" => {
                let r = num("r")?;
                self.push(node, &ctx, ElementKind::Circle, vec![(num("cx")?, num("cy")?)], r);
            }
            "rect" => {
                let (x, y, w, h) = (num("x")?, num("y")?, num("width")?, num("height")?);
                if w <= 0.0 || h <= 0.0 {
                    self.warn(node, "degenerate rect skipped");
                } else {
                    let corners = vec![(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                    self.push(node, &ctx, ElementKind::Rect, corners, 0.0);
                }
            }
            "line" => {
                let pts = vec![(num("x1")?, num("y1")?), (num("x2")?, num("y2")?)];
                self.push(node, &ctx, ElementKind::Line, pts, 0.0);
            }
            "polyline" | "polygon" => {
                let pts: Vec<(f64, f64)> = svgtypes::PointsParser::from(node.attribute("points").unwrap_or("")).collect();
                let closed = node.tag_name().name() == "polygon";
                self.push_path(node, &ctx, pts, closed);
            }
            "path" => {
                let data = node.attribute("d").unwrap_or("");
                let mut pts = Vec::new();
                let mut closed = false;
                for seg in SimplifyingPathParser::from(data) {
                    let seg = seg.map_err(|e| Self::attr_error(node, "d", e))?;
                    closed = false;
                    match seg {
                        SimplePathSegment::MoveTo { x, y } | SimplePathSegment::LineTo { x, y } => pts.push((x, y)),
                        SimplePathSegment::CurveTo { x, y, .. } | SimplePathSegment::Quadratic { x, y, .. } => {
                            pts.push((x, y))
                        }
                        SimplePathSegment::ClosePath => closed = true,
                    }
                }
                self.push_path(node, &ctx, pts, closed);
            }
            "text" => {
                let content: String = node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect();
                let content = content.trim().to_string();
                if content.is_empty() {
                    self.warn(node, "empty text skipped");
                    return Ok(());
                }
                let (x, y) = apply(&ctx.transform, num("x")?, num("y")?);
                self.elements.push(RawElement {
                    kind: ElementKind::Text,
                    absolute_points: vec![(x, y)],
                    radius: 0.0,
                    style: ctx.style(),
                    text_content: Some(content),
                    text_anchor: Some(ctx.anchor),
                    offset: node.range().start,
                });
            }
            "title" | "desc" | "defs" | "style" | "metadata" => {}
            other => self.warn(node, &format!("unsupported element <{other}> skipped")),
        }
        Ok(())
    }

    fn push_path(&mut self, node: &roxmltree::Node, ctx: &Context, mut pts: Vec<(f64, f64)>, closed: bool) {
        // A path that closes onto its start repeats the first point; drop the copy.
        if closed && pts.len() > 1 {
            let (f, l) = (pts[0], pts[pts.len() - 1]);
            if (f.0 - l.0).abs() < 1e-9 && (f.1 - l.1).abs() < 1e-9 {
                pts.pop();
            }
        }
        let needed = if closed { 3 } else { 2 };
        if pts.len() < needed {
            self.warn(node, "path with too few points skipped");
            return;
        }
        let kind = if closed { ElementKind::ClosedPath } else { ElementKind::OpenPath };
        self.push(node, ctx, kind, pts, 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextElement {
    pub content: String,
    pub x: f64,
    pub y: f64,
    pub anchor: TextAnchor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub points: Vec<ControlPoint>,
    pub objects: Vec<VisualObject>,
    pub texts: Vec<TextElement>,
}

pub fn classify_visual_objects(elements: &[RawElement], ids: &mut IdGen) -> Classified {
    let mut out = Classified { points: Vec::new(), objects: Vec::new(), texts: Vec::new() };
    for e in elements {
        let kind = match e.kind {
            ElementKind::Text => {
                let (x, y) = e.absolute_points[0];
                out.texts.push(TextElement {
                    content: e.text_content.clone().unwrap_or_default(),
                    x,
                    y,
                    anchor: e.text_anchor.unwrap_or(TextAnchor::Start),
                });
                continue;
            }
            ElementKind::Circle => ObjectKind::Point,
            ElementKind::Line | ElementKind::OpenPath => ObjectKind::Line,
            ElementKind::Rect | ElementKind::ClosedPath => ObjectKind::Area,
        };
        let r = if kind == ObjectKind::Point { e.radius } else { 0.0 };
        let control_point_ids = e
            .absolute_points
            .iter()
            .map(|&(x, y)| {
                let id = ids.point();
                out.points.push(ControlPoint::new(id, x, y, r));
                id
            })
            .collect();
        out.objects.push(VisualObject { id: ids.object(), kind, control_point_ids, style: e.style.clone() });
    }
    out
}

/// Straight line furniture of the plot frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AxisLine {
    pub object_id: ObjectId,
    pub horizontal: bool,
    /// Coordinate along the perpendicular.
    pub position: f64,
    pub extent: [f64; 2],
}

/// Short furniture line crossing or touching an axis line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TickMark {
    pub object_id: ObjectId,
    pub axis_line: ObjectId,
    /// Position along the axis line.
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetExtraction {
    pub sets: Vec<VisualObjectSet>,
    pub axis_lines: Vec<AxisLine>,
    pub tick_marks: Vec<TickMark>,
    /// Legend-like marks kept out of sets.
    pub unclassified: Vec<ObjectId>,
}

pub const AXIS_LENGTH_FRACTION: f64 = 0.8;
pub const TICK_MARK_DISTANCE: f64 = 10.0;

fn straight_segment(obj: &VisualObject, points: &BTreeMap<crate::model::PointId, &ControlPoint>) -> Option<(bool, f64, [f64; 2])> {
    if obj.kind != ObjectKind::Line || obj.control_point_ids.len() != 2 {
        return None;
    }
    obj.style.stroke?;
    let a = points[&obj.control_point_ids[0]];
    let b = points[&obj.control_point_ids[1]];
    if (a.y - b.y).abs() < 1e-6 {
        Some((true, a.y, [a.x.min(b.x), a.x.max(b.x)]))
    } else if (a.x - b.x).abs() < 1e-6 {
        Some((false, a.x, [a.y.min(b.y), a.y.max(b.y)]))
    } else {
        None
    }
}

pub fn extract_object_sets(
    objects: &[VisualObject],
    points: &[ControlPoint],
    texts: &[TextElement],
    bounds: Rect,
    ids: &mut IdGen,
) -> SetExtraction {
    let by_id: BTreeMap<_, _> = points.iter().map(|p| (p.id, p)).collect();
    let mut out = SetExtraction::default();
    let segments: Vec<_> = objects.iter().map(|o| straight_segment(o, &by_id)).collect();

    for (o, seg) in objects.iter().zip(&segments) {
        if let Some((horizontal, position, extent)) = *seg {
            let span = if horizontal { bounds.width } else { bounds.height };
            if extent[1] - extent[0] >= AXIS_LENGTH_FRACTION * span {
                out.axis_lines.push(AxisLine { object_id: o.id, horizontal, position, extent });
            }
        }
    }
    let mut furniture: Vec<ObjectId> = out.axis_lines.iter().map(|a| a.object_id).collect();
    for (o, seg) in objects.iter().zip(&segments) {
        let Some((horizontal, position, extent)) = *seg else { continue };
        if furniture.contains(&o.id) {
            continue;
        }
        let length = extent[1] - extent[0];
        // A tick mark is short and perpendicular to a nearby axis line.
        for axis in &out.axis_lines {
            if axis.horizontal == horizontal || length > 2.0 * TICK_MARK_DISTANCE {
                continue;
            }
            let near = (extent[0] - axis.position).abs().min((extent[1] - axis.position).abs()) <= TICK_MARK_DISTANCE
                || (extent[0] <= axis.position && extent[1] >= axis.position);
            if near && position >= axis.extent[0] - 1.0 && position <= axis.extent[1] + 1.0 {
                out.tick_marks.push(TickMark { object_id: o.id, axis_line: axis.object_id, position });
                furniture.push(o.id);
                break;
            }
        }
    }

    let region = data_region(&out.axis_lines);
    let mut groups: BTreeMap<(ObjectKind, usize, bool, bool), Vec<ObjectId>> = BTreeMap::new();
    for o in objects {
        if furniture.contains(&o.id) {
            continue;
        }
        if let Some(region) = region {
            if is_legend_like(o, &by_id, texts, region) {
                out.unclassified.push(o.id);
                continue;
            }
        }
        let (fill, stroke) = o.style.class();
        groups.entry((o.kind, o.control_point_ids.len(), fill, stroke)).or_default().push(o.id);
    }
    let mut sets: Vec<VisualObjectSet> = groups
        .into_iter()
        .map(|((kind, _, _, _), members)| VisualObjectSet {
            id: crate::model::SetId(0),
            kind,
            object_ids: members,
            collision_governed: false,
        })
        .collect();
    // Ids in order of each set's first member so output follows document order.
    sets.sort_by_key(|s| s.object_ids[0]);
    for s in &mut sets {
        s.id = ids.set();
    }
    out.sets = sets;
    out
}

/// Box spanned by the axis lines, if both directions are present.
fn data_region(axes: &[AxisLine]) -> Option<Rect> {
    let h = axes.iter().find(|a| a.horizontal)?;
    let v = axes.iter().find(|a| !a.horizontal)?;
    let (x0, x1) = (h.extent[0].min(v.position), h.extent[1].max(v.position));
    let (y0, y1) = (v.extent[0].min(h.position), v.extent[1].max(h.position));
    Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
}

/// Small marks lying entirely outside the plot region with a text label
/// close by are treated as legend swatches.
fn is_legend_like(
    o: &VisualObject,
    points: &BTreeMap<crate::model::PointId, &ControlPoint>,
    texts: &[TextElement],
    region: Rect,
) -> bool {
    let pts: Vec<&ControlPoint> = o.control_point_ids.iter().map(|p| points[p]).collect();
    let outside = pts.iter().all(|p| !region.contains(p.x, p.y));
    if !outside {
        return false;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &pts {
        x0 = x0.min(p.x - p.r);
        y0 = y0.min(p.y - p.r);
        x1 = x1.max(p.x + p.r);
        y1 = y1.max(p.y + p.r);
    }
    let small = (x1 - x0) <= 30.0 && (y1 - y0) <= 30.0;
    let labelled = texts.iter().any(|t| t.x >= x0 - 40.0 && t.x <= x1 + 40.0 && t.y >= y0 - 10.0 && t.y <= y1 + 20.0);
    small && labelled
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ParsedDocument {
        parse_document(s.as_bytes()).unwrap()
    }

    #[test]
    fn circle_attributes() {
        let d = parse(r#"<svg xmlns="http://www.w3.org/2000/svg" width="100" height="50"><circle cx="10" cy="20" r="5"/></svg>"#);
        assert_eq!(d.elements.len(), 1);
        assert_eq!(d.elements[0].kind, ElementKind::Circle);
        assert_eq!(d.elements[0].absolute_points, vec![(10.0, 20.0)]);
        assert_eq!(d.elements[0].radius, 5.0);
        assert_eq!(d.bounds, Rect::new(0.0, 0.0, 100.0, 50.0));
    }

    #[test]
    fn rect_in_translated_group() {
        let d = parse(r#"<svg><g transform="translate(10,0)"><rect x="0" y="0" width="4" height="8"/></g></svg>"#);
        assert_eq!(d.elements[0].absolute_points, vec![(10.0, 0.0), (14.0, 0.0), (14.0, 8.0), (10.0, 8.0)]);
    }

    #[test]
    fn nested_transforms_compose_outer_first() {
        let d = parse(r#"<svg><g transform="translate(100,0)"><g transform="scale(2)"><line x1="1" y1="1" x2="3" y2="1" stroke="black"/></g></g></svg>"#);
        assert_eq!(d.elements[0].absolute_points, vec![(102.0, 2.0), (106.0, 2.0)]);
    }

    #[test]
    fn relative_path_with_curve_keeps_endpoints() {
        let d = parse(r#"<svg><path d="M10 10 l5 0 c1 1 2 2 5 5 h-10 Z"/></svg>"#);
        let e = &d.elements[0];
        assert_eq!(e.kind, ElementKind::ClosedPath);
        assert_eq!(e.absolute_points, vec![(10.0, 10.0), (15.0, 10.0), (20.0, 15.0), (10.0, 15.0)]);
    }

    #[test]
    fn closing_duplicate_is_dropped() {
        let d = parse(r#"<svg><path d="M0 0 L10 0 L10 10 L0 0 Z"/></svg>"#);
        assert_eq!(d.elements[0].absolute_points.len(), 3);
    }

    #[test]
    fn styles_inherit_and_normalize() {
        let d = parse(r##"<svg><g fill="#ff0000" opacity="0.5"><rect width="1" height="1" fill-opacity="0.5" style="stroke: blue"/></g></svg>"##);
        let s = &d.elements[0].style;
        assert_eq!(s.fill, Some(Rgba([255, 0, 0, 128])));
        assert_eq!(s.stroke, Some(Rgba([0, 0, 255, 255])));
        assert_eq!(s.opacity, 0.5);
    }

    #[test]
    fn text_anchor_and_content() {
        let d = parse(r#"<svg><text x="5" y="6" text-anchor="middle">Jun <tspan>12</tspan></text></svg>"#);
        let e = &d.elements[0];
        assert_eq!(e.text_content.as_deref(), Some("Jun 12"));
        assert_eq!(e.text_anchor, Some(TextAnchor::Middle));
    }

    #[test]
    fn unsupported_elements_warn() {
        let d = parse(r#"<svg><ellipse rx="3" ry="2"/><circle r="1"/></svg>"#);
        assert_eq!(d.elements.len(), 1);
        assert_eq!(d.warnings.len(), 1);
        assert_eq!(d.warnings[0].element, "ellipse");
    }

    #[test]
    fn malformed_reports_byte_offset() {
        let src = "<svg>\n  <circle r=\"1\">\n</svg>";
        match parse_document(src.as_bytes()) {
            Err(SvgError::Malformed { offset, .. }) => assert!(offset > 6 && offset <= src.len()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn classification_kinds_and_radii() {
        let d = parse(r#"<svg><circle cx="1" cy="1" r="3"/><path d="M0 0 L1 1 L2 0 L3 1 L4 0 L5 1 L6 0 L7 1 L8 0 L9 1 L10 0 L11 1" fill="none" stroke="red"/><rect width="2" height="2"/><text x="0" y="0">a</text></svg>"#);
        let mut ids = IdGen::starting_at(1);
        let c = classify_visual_objects(&d.elements, &mut ids);
        let kinds: Vec<_> = c.objects.iter().map(|o| o.kind).collect();
        assert_eq!(kinds, vec![ObjectKind::Point, ObjectKind::Line, ObjectKind::Area]);
        assert_eq!(c.objects[1].control_point_ids.len(), 12);
        assert_eq!(c.points[0].r, 3.0);
        assert!(c.points[1..].iter().all(|p| p.r == 0.0));
        assert_eq!(c.texts.len(), 1);
    }

    #[test]
    fn axis_furniture_is_routed_out_of_sets() {
        let mut svg = String::from(r#"<svg width="640" height="400"><line x1="60" y1="360" x2="620" y2="360" stroke="black"/>"#);
        for i in 0..5 {
            let x = 100.0 + 100.0 * i as f64;
            svg.push_str(&format!(r#"<line x1="{x}" y1="360" x2="{x}" y2="366" stroke="black"/>"#));
            svg.push_str(&format!(r##"<rect x="{}" y="200" width="40" height="160" fill="{}"/>"##, x - 20.0, if i % 2 == 0 { "#111111" } else { "#222222" }));
        }
        svg.push_str("</svg>");
        let d = parse(&svg);
        let mut ids = IdGen::starting_at(1);
        let c = classify_visual_objects(&d.elements, &mut ids);
        let e = extract_object_sets(&c.objects, &c.points, &c.texts, d.bounds, &mut ids);
        assert_eq!(e.axis_lines.len(), 1);
        assert_eq!(e.tick_marks.len(), 5);
        assert_eq!(e.sets.len(), 1);
        assert_eq!(e.sets[0].object_ids.len(), 5);
    }
}
