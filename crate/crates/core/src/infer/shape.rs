//! Object geometry measured relative to a baseline.

use std::collections::HashMap;

use crate::model::{Baseline, Canvas, ControlPoint, Dim, ObjectKind, PointId, VisualObject};

pub(crate) const SAME_COORD: f64 = 0.5;

pub(crate) fn points_of<'a>(
    obj: &VisualObject,
    index: &HashMap<PointId, usize>,
    canvas: &'a Canvas,
) -> Vec<&'a ControlPoint> {
    obj.control_point_ids.iter().map(|p| &canvas.points[index[p]]).collect()
}

/// Four-point area whose points sit on the corners of their bounding box.
pub fn is_rect_like(obj: &VisualObject, pts: &[&ControlPoint]) -> bool {
    if obj.kind != ObjectKind::Area || pts.len() != 4 {
        return false;
    }
    let (x0, x1) = min_max(pts.iter().map(|p| p.x));
    let (y0, y1) = min_max(pts.iter().map(|p| p.y));
    if x1 - x0 < 1e-9 || y1 - y0 < 1e-9 {
        return false;
    }
    // Solved bars drift off their corners by solver residue.
    let tol = ((x1 - x0).min(y1 - y0) * 0.25).min(SAME_COORD);
    let corner = |p: &&ControlPoint| {
        let on_x = (p.x - x0).abs() <= tol || (p.x - x1).abs() <= tol;
        let on_y = (p.y - y0).abs() <= tol || (p.y - y1).abs() <= tol;
        on_x && on_y
    };
    if !pts.iter().all(corner) {
        return false;
    }
    let mut seen = [false; 4];
    for p in pts {
        let k = usize::from((p.x - x1).abs() < (p.x - x0).abs()) | (usize::from((p.y - y1).abs() < (p.y - y0).abs()) << 1);
        seen[k] = true;
    }
    seen.iter().all(|s| *s)
}

pub(crate) fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Signed distance from the baseline toward the data side.
pub(crate) fn away(baseline: &Baseline, p: &ControlPoint) -> f64 {
    (p.pos(baseline.dim) - baseline.position) * baseline.data_side.sign()
}

/// Corners of a bar named relative to the baseline.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BarCorners {
    /// Near the baseline, ordered by tick coordinate.
    pub near: [PointId; 2],
    /// Far from the baseline, ordered by tick coordinate.
    pub far: [PointId; 2],
    /// Lower tick-coordinate side, ordered near then far.
    pub low: [PointId; 2],
    /// Higher tick-coordinate side, ordered near then far.
    pub high: [PointId; 2],
}

pub(crate) fn bar_corners(baseline: &Baseline, pts: &[&ControlPoint]) -> BarCorners {
    let t = baseline.tick_dim();
    let mut by_away: Vec<&ControlPoint> = pts.to_vec();
    by_away.sort_by(|a, b| away(baseline, a).total_cmp(&away(baseline, b)).then(a.pos(t).total_cmp(&b.pos(t))));
    let mut near = [by_away[0], by_away[1]];
    let mut far = [by_away[2], by_away[3]];
    near.sort_by(|a, b| a.pos(t).total_cmp(&b.pos(t)));
    far.sort_by(|a, b| a.pos(t).total_cmp(&b.pos(t)));
    BarCorners {
        near: [near[0].id, near[1].id],
        far: [far[0].id, far[1].id],
        low: [near[0].id, far[0].id],
        high: [near[1].id, far[1].id],
    }
}

/// Interval an object occupies along `dim`.
pub(crate) fn extent(pts: &[&ControlPoint], dim: Dim) -> (f64, f64) {
    min_max(pts.iter().map(|p| p.pos(dim)))
}

/// Points of an area lying at a tick coordinate, nearest to the baseline first.
pub(crate) fn column<'a>(baseline: &Baseline, pts: &[&'a ControlPoint], at: f64) -> Vec<&'a ControlPoint> {
    let t = baseline.tick_dim();
    let mut col: Vec<&ControlPoint> = pts.iter().copied().filter(|p| (p.pos(t) - at).abs() <= SAME_COORD).collect();
    col.sort_by(|a, b| away(baseline, a).total_cmp(&away(baseline, b)));
    col
}

pub(crate) fn nearest_tick(ticks: &[f64], coord: f64) -> Option<usize> {
    ticks
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - coord).abs().total_cmp(&(b.1 - coord).abs()))
        .map(|(i, _)| i)
}

/// Merges sorted coordinates closer than `tol` into their mean.
pub(crate) fn cluster(mut coords: Vec<f64>, tol: f64) -> Vec<f64> {
    coords.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for c in coords {
        match out.last_mut() {
            Some((sum, n)) if c - *sum / *n as f64 <= tol => {
                *sum += c;
                *n += 1;
            }
            _ => out.push((c, 1)),
        }
    }
    out.into_iter().map(|(s, n)| s / n as f64).collect()
}
