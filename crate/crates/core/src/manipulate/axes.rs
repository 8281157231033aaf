//! Axis-level commands: zoom, tick reordering, sorting.

use std::cmp::Ordering;

use chrono::{Days, NaiveDate};

use super::{CommandReport, ManipulationError, SortKey};
use crate::fixture::{format_value, nice_step};
use crate::infer::is_rect_like;
use crate::model::{
    AxisId, AxisKind, Canvas, CategoryEntry, Constraint, ControlPoint, Dim, ScaleSpec, Scene, Tick, ValueKind,
};

type Result<T> = std::result::Result<T, ManipulationError>;

fn locate(scene: &Scene, axis_id: AxisId) -> Result<usize> {
    scene
        .canvases
        .iter()
        .position(|c| c.axis(axis_id).is_some())
        .ok_or(ManipulationError::UnknownAxis(axis_id))
}

fn label_for(value: f64, kind: ValueKind, step: f64) -> String {
    match kind {
        ValueKind::Numeric => {
            let decimals = (0..12).find(|d| {
                let scaled = step * 10f64.powi(*d);
                (scaled - scaled.round()).abs() < 1e-6 * scaled.abs().max(1.0)
            });
            let rounded = format!("{:.*}", decimals.unwrap_or(12) as usize, value);
            let v: f64 = rounded.parse().unwrap_or(value);
            if v == 0.0 {
                "0".into()
            } else {
                format_value(v)
            }
        }
        ValueKind::Temporal => {
            let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch");
            let day = value.round();
            let date = if day >= 0.0 {
                epoch.checked_add_days(Days::new(day as u64))
            } else {
                epoch.checked_sub_days(Days::new((-day) as u64))
            };
            date.map_or_else(|| format!("{value}"), |d| d.format("%Y-%m-%d").to_string())
        }
    }
}

/// Ticks at round values across the axis extent.
fn round_ticks(scale: &ScaleSpec, extent: [f64; 2]) -> Vec<Tick> {
    let ScaleSpec::Linear { value_kind, .. } = scale else { return Vec::new() };
    let (Some(a), Some(b)) = (scale.to_value(extent[0]), scale.to_value(extent[1])) else { return Vec::new() };
    let (lo, hi) = (a.min(b), a.max(b));
    if !(hi > lo) {
        return Vec::new();
    }
    let step = nice_step((hi - lo) / 5.0);
    let mut ticks = Vec::new();
    let mut k = (lo / step - 1e-9).ceil();
    while k * step <= hi + step * 1e-9 {
        let v = k * step;
        let position = scale.to_px(v).expect("linear scale");
        ticks.push(Tick { position, label: label_for(v, *value_kind, step), value: Some(v) });
        k += 1.0;
    }
    ticks.sort_by(|x, y| x.position.total_cmp(&y.position));
    ticks
}

pub(crate) fn rescale_axis(scene: &mut Scene, axis_id: AxisId, zoom: f64, anchor: f64) -> Result<CommandReport> {
    if !(zoom > 0.0) || !zoom.is_finite() {
        return Err(ManipulationError::InvalidZoom(zoom));
    }
    let ci = locate(scene, axis_id)?;
    let canvas = &mut scene.canvases[ci];
    let axis = canvas.axis(axis_id).expect("located").clone();
    if axis.axis_kind != AxisKind::Continuous {
        return Err(ManipulationError::NotContinuous(axis_id));
    }
    let dim = axis.dim();
    let map = |px: f64| anchor + (px - anchor) * zoom;

    for e in &mut canvas.constraints {
        match &mut e.constraint {
            Constraint::Gravity { dim: d0, d, .. } | Constraint::Support { dim: d0, d, .. } if *d0 == dim => *d = map(*d),
            Constraint::FixedDistance { dim: d0, d, .. } | Constraint::AxisCollision { dim: d0, d, .. } if *d0 == dim => {
                *d *= zoom
            }
            _ => {}
        }
    }
    if let Some(b) = canvas.baseline.as_mut() {
        if b.dim == dim {
            let moved = map(b.position);
            let line = b.axis_id;
            b.position = moved;
            if let Some(a) = canvas.axes.iter_mut().find(|a| a.id == line) {
                a.baseline_position = moved;
            }
        } else {
            for t in &mut b.tick_positions {
                *t = map(*t);
            }
        }
    }
    let a = canvas.axes.iter_mut().find(|a| a.id == axis_id).expect("located");
    if let ScaleSpec::Linear { slope, intercept, .. } = &mut a.scale {
        *slope *= zoom;
        *intercept = anchor + (*intercept - anchor) * zoom;
    }
    a.ticks = round_ticks(&a.scale, a.extent);
    Ok(CommandReport { affected: vec![canvas.id], ..Default::default() })
}

/// Moves every tick-area coordinate of a discrete axis to the slot its tick
/// now occupies. `permutation[i]` is the old index of the tick shown in slot `i`.
pub(crate) fn reorder_ticks(scene: &mut Scene, axis_id: AxisId, permutation: &[usize]) -> Result<CommandReport> {
    let ci = locate(scene, axis_id)?;
    let canvas = &mut scene.canvases[ci];
    let axis = canvas.axis(axis_id).expect("located").clone();
    if axis.axis_kind != AxisKind::Discrete {
        return Err(ManipulationError::NotDiscrete(axis_id));
    }
    let n = axis.ticks.len();
    let mut seen = vec![false; n];
    if permutation.len() != n || !permutation.iter().all(|&j| j < n && !std::mem::replace(&mut seen[j], true)) {
        return Err(ManipulationError::InvalidPermutation(n));
    }
    let old: Vec<f64> = axis.ticks.iter().map(|t| t.position).collect();
    let mut delta = vec![0.0; n];
    for (slot, &j) in permutation.iter().enumerate() {
        delta[j] = old[slot] - old[j];
    }
    let reach = old.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min) / 2.0;
    let shift = |px: f64| -> f64 {
        let nearest = old.iter().enumerate().min_by(|a, b| (a.1 - px).abs().total_cmp(&(b.1 - px).abs()));
        match nearest {
            Some((j, p)) if (p - px).abs() <= reach || n == 1 => px + delta[j],
            _ => px,
        }
    };
    let dim = axis.dim();
    for e in &mut canvas.constraints {
        if let Constraint::Gravity { dim: d0, d, .. } = &mut e.constraint {
            if *d0 == dim {
                *d = shift(*d);
            }
        }
    }
    if let Some(b) = canvas.baseline.as_mut().filter(|b| b.tick_dim() == dim) {
        let moved: Vec<f64> = b.tick_positions.iter().map(|t| shift(*t)).collect();
        let mut order: Vec<usize> = (0..moved.len()).collect();
        order.sort_by(|x, y| moved[*x].total_cmp(&moved[*y]));
        let mut new_index = vec![0; moved.len()];
        for (k, &old_k) in order.iter().enumerate() {
            new_index[old_k] = k;
        }
        b.tick_positions = order.iter().map(|&k| moved[k]).collect();
        for g in &mut canvas.collision_groups {
            if g.tick_index < new_index.len() {
                g.tick_index = new_index[g.tick_index];
            }
        }
    }
    let a = canvas.axes.iter_mut().find(|a| a.id == axis_id).expect("located");
    let labels: Vec<String> = axis.ticks.iter().map(|t| t.label.clone()).collect();
    for (slot, &j) in permutation.iter().enumerate() {
        a.ticks[slot].label = labels[j].clone();
    }
    a.scale = ScaleSpec::Categorical {
        categories: a.ticks.iter().map(|t| CategoryEntry { label: t.label.clone(), position: t.position }).collect(),
    };
    Ok(CommandReport { affected: vec![canvas.id], ..Default::default() })
}

#[derive(Debug, Clone, PartialEq)]
enum KeyValue {
    Number(f64),
    Text(String),
    Missing,
}

fn compare(a: &KeyValue, b: &KeyValue) -> Ordering {
    match (a, b) {
        (KeyValue::Number(x), KeyValue::Number(y)) => x.total_cmp(y),
        (KeyValue::Text(x), KeyValue::Text(y)) => x.cmp(y),
        (KeyValue::Missing, KeyValue::Missing) => Ordering::Equal,
        (KeyValue::Missing, _) => Ordering::Greater,
        (_, KeyValue::Missing) => Ordering::Less,
        (KeyValue::Number(_), KeyValue::Text(_)) => Ordering::Less,
        (KeyValue::Text(_), KeyValue::Number(_)) => Ordering::Greater,
    }
}

/// Key of each tick from the marks standing at it.
fn tick_keys(canvas: &Canvas, dim: Dim, labels: &[f64], key: SortKey) -> Vec<KeyValue> {
    let index = canvas.point_index();
    let grounded: Vec<_> = canvas.baseline.as_ref().map(|b| b.set_ids.clone()).unwrap_or_default();
    let perpendicular = dim.other();
    let mut points: Vec<Vec<(&ControlPoint, String)>> = vec![Vec::new(); labels.len()];
    let nearest = |c: f64| {
        labels.iter().enumerate().min_by(|a, b| (a.1 - c).abs().total_cmp(&(b.1 - c).abs())).map(|(i, _)| i)
    };
    for set in &canvas.object_sets {
        if !grounded.is_empty() && !grounded.contains(&set.id) {
            continue;
        }
        for oid in &set.object_ids {
            let Some(o) = canvas.object(*oid) else { continue };
            let pts: Vec<&ControlPoint> = o.control_point_ids.iter().map(|p| &canvas.points[index[p]]).collect();
            let color = o.style.fill.or(o.style.stroke).map(|c| c.to_hex()).unwrap_or_default();
            if is_rect_like(o, &pts) || pts.len() == 1 {
                let c = pts.iter().map(|p| p.pos(dim)).sum::<f64>() / pts.len() as f64;
                if let Some(k) = nearest(c) {
                    points[k].extend(pts.iter().map(|p| (*p, color.clone())));
                }
            } else {
                for p in pts {
                    if let Some(k) = nearest(p.pos(dim)) {
                        points[k].push((p, color.clone()));
                    }
                }
            }
        }
    }
    points
        .iter()
        .map(|pts| {
            if pts.is_empty() {
                return KeyValue::Missing;
            }
            let span = |d: Dim| {
                let lo = pts.iter().map(|(p, _)| p.pos(d) - p.r).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|(p, _)| p.pos(d) + p.r).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            };
            match key {
                SortKey::Width => KeyValue::Number(span(dim).1 - span(dim).0),
                SortKey::Height => KeyValue::Number(span(perpendicular).1 - span(perpendicular).0),
                SortKey::Left => KeyValue::Number(span(dim).0),
                SortKey::Right => KeyValue::Number(span(dim).1),
                SortKey::Color => KeyValue::Text(pts[0].1.clone()),
            }
        })
        .collect()
}

pub(crate) fn sort_axis(scene: &mut Scene, axis_id: AxisId, key: SortKey, ascending: bool) -> Result<CommandReport> {
    let ci = locate(scene, axis_id)?;
    let canvas = &scene.canvases[ci];
    let axis = canvas.axis(axis_id).expect("located");
    if axis.axis_kind != AxisKind::Discrete {
        return Err(ManipulationError::NotDiscrete(axis_id));
    }
    let labels: Vec<f64> = axis.ticks.iter().map(|t| t.position).collect();
    let keys = tick_keys(canvas, axis.dim(), &labels, key);
    let mut permutation: Vec<usize> = (0..labels.len()).collect();
    permutation.sort_by(|&a, &b| {
        let o = compare(&keys[a], &keys[b]);
        let missing = matches!(keys[a], KeyValue::Missing) || matches!(keys[b], KeyValue::Missing);
        if ascending || missing {
            o
        } else {
            o.reverse()
        }
    });
    reorder_ticks(scene, axis_id, &permutation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_labels_are_round() {
        assert_eq!(label_for(0.30000000000000004, ValueKind::Numeric, 0.1), "0.3");
        assert_eq!(label_for(25.0, ValueKind::Numeric, 5.0), "25");
        assert_eq!(label_for(2.5, ValueKind::Numeric, 2.5), "2.5");
    }

    #[test]
    fn temporal_labels_are_dates() {
        assert_eq!(label_for(11120.0, ValueKind::Temporal, 7.0), "2000-06-12");
    }

    #[test]
    fn round_ticks_cover_extent() {
        let scale = ScaleSpec::Linear { slope: -3.3, intercept: 360.0, value_kind: ValueKind::Numeric };
        let ticks = round_ticks(&scale, [30.0, 360.0]);
        let values: Vec<f64> = ticks.iter().rev().map(|t| t.value.unwrap()).collect();
        assert_eq!(values, vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0]);
    }
}
