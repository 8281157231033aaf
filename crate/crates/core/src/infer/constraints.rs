//! The full constraint system for a canvas.

use std::collections::HashMap;

use super::circles::detect_circle_collisions;
use super::shape::{away, bar_corners, column, extent, is_rect_like, nearest_tick, points_of};
use crate::model::{
    Baseline, Canvas, CollisionGroup, Constraint, ControlPoint, Dim, ObjectId, ObjectKind, PointId, SetId, SupportOp,
    VisualObject,
};

/// Gap between neighbours when stacking is rebuilt perpendicular to the baseline.
pub const STACKED_GAP: f64 = 0.0;
/// Gap between neighbours when grouping is rebuilt along the baseline.
pub const GROUPED_GAP: f64 = 2.0;
/// Overlap tolerated when deciding two members are disjoint.
const DISJOINT_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSystem {
    pub constraints: Vec<Constraint>,
    pub groups: Vec<CollisionGroup>,
    /// Point sets found to be packed against themselves.
    pub governed_sets: Vec<SetId>,
}

/// Member shape as seen from the baseline.
enum Member<'a> {
    Bar { id: ObjectId, pts: Vec<&'a ControlPoint> },
    Band { id: ObjectId, pts: Vec<&'a ControlPoint> },
}

impl<'a> Member<'a> {
    fn id(&self) -> ObjectId {
        match self {
            Member::Bar { id, .. } | Member::Band { id, .. } => *id,
        }
    }

    fn pts(&self) -> &[&'a ControlPoint] {
        match self {
            Member::Bar { pts, .. } | Member::Band { pts, .. } => pts,
        }
    }
}

fn member<'a>(o: &VisualObject, index: &HashMap<PointId, usize>, canvas: &'a Canvas) -> Member<'a> {
    let pts = points_of(o, index, canvas);
    if is_rect_like(o, &pts) {
        Member::Bar { id: o.id, pts }
    } else {
        Member::Band { id: o.id, pts }
    }
}

fn gravity_here(out: &mut Vec<Constraint>, p: &ControlPoint, dims: &[Dim]) {
    for &dim in dims {
        out.push(Constraint::Gravity { point_id: p.id, dim, d: p.pos(dim) });
    }
}

fn baseline_pull(out: &mut Vec<Constraint>, p: &ControlPoint, baseline: &Baseline) {
    out.push(Constraint::Gravity { point_id: p.id, dim: baseline.dim, d: baseline.position });
    out.push(Constraint::Support { point_id: p.id, dim: baseline.dim, d: baseline.position, op: baseline.data_side });
}

fn fixed(a: &ControlPoint, b: &ControlPoint, dim: Dim) -> Constraint {
    Constraint::FixedDistance { point_a_id: a.id, point_b_id: b.id, dim, d: a.pos(dim) - b.pos(dim) }
}

/// Index of the tick area an object belongs to.
pub fn tick_of(canvas: &Canvas, baseline: &Baseline, object: &VisualObject) -> Option<usize> {
    let b = canvas.object_bounds(object)?;
    nearest_tick(&baseline.tick_positions, b.center(baseline.tick_dim()))
}

/// Builds every constraint and collision group of the canvas.
pub fn build_constraints(canvas: &Canvas, baseline: Option<&Baseline>) -> ConstraintSystem {
    let index = canvas.point_index();
    let mut sys = ConstraintSystem::default();
    let stacked: &[SetId] = baseline.map_or(&[], |b| b.set_ids.as_slice());

    for set in &canvas.object_sets {
        let objs: Vec<&VisualObject> = set.object_ids.iter().filter_map(|id| canvas.object(*id)).collect();
        match (baseline, stacked.contains(&set.id)) {
            (Some(base), true) => on_baseline(canvas, &index, base, set.id, &objs, &mut sys),
            _ if set.kind == ObjectKind::Point => {
                let pts: Vec<ControlPoint> = objs
                    .iter()
                    .flat_map(|o| o.control_point_ids.iter().map(|p| canvas.points[index[p]].clone()))
                    .collect();
                for p in &pts {
                    gravity_here(&mut sys.constraints, p, &Dim::BOTH);
                }
                if detect_circle_collisions(&pts).governed {
                    sys.governed_sets.push(set.id);
                    walls(&pts, &mut sys.constraints);
                }
            }
            _ => {
                for o in &objs {
                    for p in points_of(o, &index, canvas) {
                        gravity_here(&mut sys.constraints, p, &Dim::BOTH);
                    }
                }
            }
        }
    }
    sys
}

/// Side walls holding a packed circle set at its current horizontal extent.
fn walls(pts: &[ControlPoint], out: &mut Vec<Constraint>) {
    let left = pts.iter().map(|p| p.x - p.r).fold(f64::INFINITY, f64::min);
    let right = pts.iter().map(|p| p.x + p.r).fold(f64::NEG_INFINITY, f64::max);
    for p in pts {
        out.push(Constraint::Support { point_id: p.id, dim: Dim::X, d: left + p.r, op: SupportOp::Ge });
        out.push(Constraint::Support { point_id: p.id, dim: Dim::X, d: right - p.r, op: SupportOp::Le });
    }
}

fn on_baseline(
    canvas: &Canvas,
    index: &HashMap<PointId, usize>,
    base: &Baseline,
    set_id: SetId,
    objs: &[&VisualObject],
    sys: &mut ConstraintSystem,
) {
    let t = base.tick_dim();
    let members: Vec<Member> = objs.iter().map(|o| member(o, index, canvas)).collect();
    for m in &members {
        match m {
            Member::Bar { pts, .. } => {
                let centre = {
                    let (lo, hi) = extent(pts, t);
                    0.5 * (lo + hi)
                };
                let target = nearest_tick(&base.tick_positions, centre).map_or(centre, |k| base.tick_positions[k]);
                for p in pts {
                    sys.constraints.push(Constraint::Gravity { point_id: p.id, dim: t, d: target });
                    baseline_pull(&mut sys.constraints, p, base);
                }
                let c = bar_corners(base, pts);
                let by = |id: PointId| pts.iter().copied().find(|p| p.id == id).expect("corner of this bar");
                let ring = [c.near[0], c.near[1], c.far[1], c.far[0]];
                for k in 0..4 {
                    let (a, b) = (by(ring[k]), by(ring[(k + 1) % 4]));
                    for dim in Dim::BOTH {
                        sys.constraints.push(fixed(a, b, dim));
                    }
                }
            }
            Member::Band { pts, .. } => {
                for p in pts {
                    gravity_here(&mut sys.constraints, p, &[t]);
                    baseline_pull(&mut sys.constraints, p, base);
                }
                for &at in &base.tick_positions {
                    let col = column(base, pts, at);
                    for w in col.windows(2) {
                        sys.constraints.push(fixed(w[1], w[0], base.dim));
                    }
                }
            }
        }
    }

    for (k, _) in base.tick_positions.iter().enumerate() {
        let in_tick: Vec<&Member> = members
            .iter()
            .filter(|m| match m {
                Member::Bar { pts, .. } => {
                    let (lo, hi) = extent(pts, t);
                    nearest_tick(&base.tick_positions, 0.5 * (lo + hi)) == Some(k)
                }
                Member::Band { pts, .. } => !column(base, pts, base.tick_positions[k]).is_empty(),
            })
            .collect();
        if in_tick.len() < 2 {
            continue;
        }
        let Some((dim, order)) = arrangement(base, &in_tick, base.tick_positions[k]) else { continue };
        let group = CollisionGroup { set_id, tick_index: k, dim, ordered_object_ids: order };
        sys.constraints.extend(group_constraints(canvas, base, &group, None));
        sys.groups.push(group);
    }
}

/// Span of a member across (perpendicular) or along the baseline at one tick.
fn span(base: &Baseline, m: &Member, dim: Dim, at: f64) -> (f64, f64) {
    match m {
        Member::Band { pts, .. } if dim == base.dim => {
            let col = column(base, pts, at);
            let a: Vec<f64> = col.iter().map(|p| away(base, p)).collect();
            (a.iter().copied().fold(f64::INFINITY, f64::min), a.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        }
        _ if dim == base.dim => {
            let a: Vec<f64> = m.pts().iter().map(|p| away(base, p)).collect();
            (a.iter().copied().fold(f64::INFINITY, f64::min), a.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        }
        _ => extent(m.pts(), dim),
    }
}

fn disjoint_order(spans: &mut [(f64, f64, ObjectId)]) -> bool {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    spans.windows(2).all(|w| w[1].0 >= w[0].1 - DISJOINT_TOLERANCE)
}

/// Whether the members of a tick stack away from the baseline or sit side by
/// side along it, and their order.
fn arrangement(base: &Baseline, members: &[&Member], at: f64) -> Option<(Dim, Vec<ObjectId>)> {
    let mut across: Vec<(f64, f64, ObjectId)> = members
        .iter()
        .map(|m| {
            let (lo, hi) = span(base, m, base.dim, at);
            (lo, hi, m.id())
        })
        .collect();
    if disjoint_order(&mut across) {
        return Some((base.dim, across.into_iter().map(|s| s.2).collect()));
    }
    if members.iter().any(|m| matches!(m, Member::Band { .. })) {
        return None;
    }
    let mut along: Vec<(f64, f64, ObjectId)> = members
        .iter()
        .map(|m| {
            let (lo, hi) = extent(m.pts(), base.tick_dim());
            (lo, hi, m.id())
        })
        .collect();
    if disjoint_order(&mut along) {
        return Some((base.tick_dim(), along.into_iter().map(|s| s.2).collect()));
    }
    None
}

/// Collision constraints linking neighbours of a group in order. `gap` of
/// `None` keeps the observed gap (never negative).
pub fn group_constraints(canvas: &Canvas, base: &Baseline, group: &CollisionGroup, gap: Option<f64>) -> Vec<Constraint> {
    let index = canvas.point_index();
    let members: Vec<Member> =
        group.ordered_object_ids.iter().filter_map(|id| canvas.object(*id)).map(|o| member(o, &index, canvas)).collect();
    let at = base.tick_positions.get(group.tick_index).copied();
    let mut out = Vec::new();
    for w in members.windows(2) {
        let pairs: Vec<(PointId, PointId)> = match (&w[0], &w[1], at) {
            (Member::Bar { pts: a, .. }, Member::Bar { pts: b, .. }, _) => {
                let (ca, cb) = (bar_corners(base, a), bar_corners(base, b));
                if group.dim == base.dim {
                    // Far edge of the inner bar against the near edge of the outer one.
                    (0..2).map(|k| oriented(base, ca.far[k], cb.near[k])).collect()
                } else {
                    (0..2).map(|k| (cb.low[k], ca.high[k])).collect()
                }
            }
            (Member::Band { pts: a, .. }, Member::Band { pts: b, .. }, Some(at)) if group.dim == base.dim => {
                match (column(base, a, at).last(), column(base, b, at).first()) {
                    (Some(inner), Some(outer)) => vec![oriented(base, inner.id, outer.id)],
                    _ => Vec::new(),
                }
            }
            _ => Vec::new(),
        };
        let observed = pairs
            .iter()
            .map(|(u, l)| canvas.points[index[u]].pos(group.dim) - canvas.points[index[l]].pos(group.dim))
            .fold(f64::INFINITY, f64::min);
        let d = gap.unwrap_or(observed.max(0.0));
        out.extend(pairs.into_iter().map(|(upper_id, lower_id)| Constraint::AxisCollision {
            upper_id,
            lower_id,
            dim: group.dim,
            d,
        }));
    }
    out
}

/// Orders an (inner, outer) stacking pair as (upper, lower) by coordinate.
fn oriented(base: &Baseline, inner: PointId, outer: PointId) -> (PointId, PointId) {
    if base.data_side.sign() > 0.0 {
        (outer, inner)
    } else {
        (inner, outer)
    }
}

