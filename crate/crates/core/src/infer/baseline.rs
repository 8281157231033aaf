//! Axes from plot furniture, and the axis the marks rest on.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::axis::classify_axis;
use super::intervals::detect_even_intervals;
use super::shape::{cluster, extent, is_rect_like, min_max, points_of};
use crate::model::{Axis, Baseline, Canvas, Dim, IdGen, ObjectId, ObjectKind, Orientation, SetId, SupportOp};
use crate::svg::{AxisLine, TextElement, TickMark};

/// Distance within which an object edge counts as resting on a line.
pub const ALIGNMENT_TOLERANCE: f64 = 2.0;
/// Share of a set's objects that must rest on the line.
pub const GROUNDED_FRACTION: f64 = 0.8;
/// Furthest a label may sit from its axis line.
pub const LABEL_DISTANCE: f64 = 40.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BaselineError {
    #[error("no baseline: no axis line has aligned object edges")]
    NoBaseline,
}

/// Position of a label along an axis of the given orientation.
fn along(text: &TextElement, horizontal: bool) -> f64 {
    if horizontal {
        text.x
    } else {
        // Text y is the glyph baseline; labels are centred on their tick a
        // few pixels above it.
        text.y - 4.0
    }
}

fn across(text: &TextElement, horizontal: bool) -> f64 {
    if horizontal {
        text.y
    } else {
        text.x
    }
}

/// Which side of `line` the plot lies on, judged from the other axis lines.
fn plot_side(line: &AxisLine, lines: &[AxisLine], fallback_center: f64) -> f64 {
    let perpendicular: Vec<&AxisLine> = lines.iter().filter(|l| l.horizontal != line.horizontal).collect();
    let mid = if perpendicular.is_empty() {
        fallback_center
    } else {
        perpendicular.iter().map(|l| 0.5 * (l.extent[0] + l.extent[1])).sum::<f64>() / perpendicular.len() as f64
    };
    if mid < line.position {
        -1.0
    } else {
        1.0
    }
}

/// Builds one axis per furniture line, pairing tick marks with the labels
/// beside them.
pub fn build_axes(
    lines: &[AxisLine],
    marks: &[TickMark],
    texts: &[TextElement],
    canvas_center: [f64; 2],
    ids: &mut IdGen,
) -> Vec<(ObjectId, Axis)> {
    let mut out = Vec::new();
    for line in lines {
        let fallback = if line.horizontal { canvas_center[1] } else { canvas_center[0] };
        let outward = -plot_side(line, lines, fallback);
        let candidates: Vec<&TextElement> = texts
            .iter()
            .filter(|t| {
                let off = (across(t, line.horizontal) - line.position) * outward;
                let pos = along(t, line.horizontal);
                off > 0.0 && off <= LABEL_DISTANCE && pos >= line.extent[0] - 20.0 && pos <= line.extent[1] + 20.0
            })
            .collect();
        let mut positions: Vec<f64> = marks.iter().filter(|m| m.axis_line == line.object_id).map(|m| m.position).collect();
        positions.sort_by(f64::total_cmp);
        positions.dedup_by(|a, b| (*a - *b).abs() < 0.5);

        let mut labelled: Vec<(f64, String)> = Vec::new();
        if positions.is_empty() {
            labelled = modal_row(&candidates, line.horizontal);
        } else {
            let spacing = positions.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let reach = if spacing.is_finite() { (spacing / 2.0).max(1.0) } else { LABEL_DISTANCE };
            let mut used = HashSet::new();
            for &p in &positions {
                let best = candidates
                    .iter()
                    .enumerate()
                    .filter(|(i, t)| !used.contains(i) && (along(t, line.horizontal) - p).abs() <= reach)
                    .min_by(|a, b| {
                        (along(a.1, line.horizontal) - p).abs().total_cmp(&(along(b.1, line.horizontal) - p).abs())
                    });
                if let Some((i, t)) = best {
                    if !t.content.trim().is_empty() {
                        used.insert(i);
                        labelled.push((p, t.content.trim().to_string()));
                    }
                }
            }
        }
        let class = classify_axis(&labelled);
        let orientation = if line.horizontal { Orientation::Horizontal } else { Orientation::Vertical };
        out.push((
            line.object_id,
            Axis {
                id: ids.axis(),
                orientation,
                axis_kind: class.kind,
                baseline_position: line.position,
                extent: line.extent,
                ticks: class.ticks,
                scale: class.scale,
            },
        ));
    }
    out
}

/// Labels in the most populated row (or column) when no tick marks exist.
fn modal_row(texts: &[&TextElement], horizontal: bool) -> Vec<(f64, String)> {
    let mut rows: HashMap<i64, Vec<&TextElement>> = HashMap::new();
    for t in texts {
        rows.entry(across(t, horizontal).round() as i64).or_default().push(t);
    }
    let Some((_, row)) = rows.into_iter().max_by_key(|(k, v)| (v.len(), -k.abs())) else {
        return Vec::new();
    };
    let mut out: Vec<(f64, String)> = row
        .into_iter()
        .filter(|t| !t.content.trim().is_empty())
        .map(|t| (along(t, horizontal), t.content.trim().to_string()))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 0.5);
    out
}

/// Objects of `set` that rest on the line, directly or through a shared
/// corner with a resting object nearer the line.
fn grounded(canvas: &Canvas, index: &HashMap<crate::model::PointId, usize>, members: &[ObjectId], dim: Dim, line: f64) -> (Vec<ObjectId>, f64) {
    let tick_dim = dim.other();
    let objs: Vec<_> = members.iter().filter_map(|id| canvas.object(*id)).collect();
    let mut on: Vec<bool> = vec![false; objs.len()];
    let mut contact = 0.0;
    let mut distance = vec![0.0; objs.len()];
    for (k, o) in objs.iter().enumerate() {
        let pts = points_of(o, index, canvas);
        let (lo, hi) = extent(&pts, dim);
        distance[k] = (0.5 * (lo + hi) - line).abs();
        if (lo - line).abs() <= ALIGNMENT_TOLERANCE || (hi - line).abs() <= ALIGNMENT_TOLERANCE {
            on[k] = true;
            let touching: Vec<_> = pts.iter().copied().filter(|p| (p.pos(dim) - line).abs() <= ALIGNMENT_TOLERANCE).collect();
            let (a, b) = extent(&touching, tick_dim);
            contact += b - a;
        }
    }
    // Propagate outward through coincident control points.
    let mut order: Vec<usize> = (0..objs.len()).collect();
    order.sort_by(|a, b| distance[*a].total_cmp(&distance[*b]));
    let mut changed = true;
    while changed {
        changed = false;
        for &k in &order {
            if on[k] {
                continue;
            }
            let pts = points_of(objs[k], index, canvas);
            let hit = (0..objs.len()).filter(|j| on[*j] && distance[*j] < distance[k]).any(|j| {
                points_of(objs[j], index, canvas).iter().any(|q| {
                    pts.iter().any(|p| {
                        (p.x - q.x).abs() <= ALIGNMENT_TOLERANCE && (p.y - q.y).abs() <= ALIGNMENT_TOLERANCE
                    })
                })
            });
            if hit {
                on[k] = true;
                changed = true;
            }
        }
    }
    (objs.iter().zip(&on).filter(|(_, g)| **g).map(|(o, _)| o.id).collect(), contact)
}

/// Chooses the axis whose line the area and line sets rest on, and the tick
/// areas along it.
pub fn detect_baseline_axis(canvas: &Canvas) -> Result<Baseline, BaselineError> {
    let index = canvas.point_index();
    let mut best: Option<(f64, Baseline)> = None;
    for axis in &canvas.axes {
        let dim = axis.dim().other();
        let line = axis.baseline_position;
        let mut set_ids: Vec<SetId> = Vec::new();
        let mut contact = 0.0;
        let mut side = 0.0;
        for set in &canvas.object_sets {
            if !matches!(set.kind, ObjectKind::Area | ObjectKind::Line) {
                continue;
            }
            let (on, c) = grounded(canvas, &index, &set.object_ids, dim, line);
            if (on.len() as f64) < GROUNDED_FRACTION * set.object_ids.len() as f64 {
                continue;
            }
            set_ids.push(set.id);
            contact += c;
            for id in &set.object_ids {
                if let Some(b) = canvas.object(*id).and_then(|o| canvas.object_bounds(o)) {
                    side += b.center(dim) - line;
                }
            }
        }
        if set_ids.is_empty() {
            continue;
        }
        let data_side = if side < 0.0 { SupportOp::Le } else { SupportOp::Ge };
        let candidate = Baseline {
            axis_id: axis.id,
            dim,
            position: line,
            data_side,
            tick_positions: Vec::new(),
            set_ids,
        };
        if best.as_ref().is_none_or(|(c, _)| contact > *c) {
            best = Some((contact, candidate));
        }
    }
    let (_, mut baseline) = best.ok_or(BaselineError::NoBaseline)?;
    let axis = canvas.axis(baseline.axis_id).expect("candidate axis exists");
    let labels: Vec<f64> = axis.ticks.iter().map(|t| t.position).collect();
    baseline.tick_positions = tick_positions(canvas, &index, &baseline, &labels);
    Ok(baseline)
}

/// Tick-area centers along the baseline.
fn tick_positions(
    canvas: &Canvas,
    index: &HashMap<crate::model::PointId, usize>,
    baseline: &Baseline,
    labels: &[f64],
) -> Vec<f64> {
    let t = baseline.tick_dim();
    let mut bar_spans: Vec<(f64, f64)> = Vec::new();
    let mut coords: Vec<f64> = Vec::new();
    for sid in &baseline.set_ids {
        let Some(set) = canvas.set(*sid) else { continue };
        for oid in &set.object_ids {
            let Some(o) = canvas.object(*oid) else { continue };
            let pts = points_of(o, index, canvas);
            if is_rect_like(o, &pts) {
                bar_spans.push(extent(&pts, t));
            } else {
                coords.extend(pts.iter().map(|p| p.pos(t)));
            }
        }
    }
    if !bar_spans.is_empty() {
        let centers = cluster(bar_spans.iter().map(|(a, b)| 0.5 * (a + b)).collect(), 1.0);
        let min_width = bar_spans.iter().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
        // Evenly spaced bar centers, one bar column per slot.
        if let Ok(det) = detect_even_intervals(&centers) {
            let on_lattice = centers.iter().all(|c| {
                let k = ((c - det.phase) / det.interval).round();
                (c - det.phase - k * det.interval).abs() <= 1.0
            });
            if on_lattice && det.interval >= 0.9 * min_width {
                return centers;
            }
        }
        // Bars clustered around label anchors.
        if !labels.is_empty() {
            let mut groups: Vec<Option<(f64, f64)>> = vec![None; labels.len()];
            for &(a, b) in &bar_spans {
                let c = 0.5 * (a + b);
                let k = super::shape::nearest_tick(labels, c).expect("labels nonempty");
                groups[k] = Some(match groups[k] {
                    Some((lo, hi)) => (lo.min(a), hi.max(b)),
                    None => (a, b),
                });
            }
            if groups.iter().all(Option::is_some) {
                return groups.into_iter().flatten().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
            }
        }
        return centers;
    }
    let cols = cluster(coords, super::shape::SAME_COORD);
    if cols.len() >= 2 {
        return cols;
    }
    let (lo, hi) = min_max(cols.into_iter());
    if lo.is_finite() {
        vec![0.5 * (lo + hi)]
    } else {
        labels.to_vec()
    }
}
