//! Constraint handles and direct constraint editing.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{touches_any, CommandReport, GroupAttribute, GroupTargets, ManipulationError};
use crate::infer::is_rect_like;
use crate::model::{
    CanvasId, Constraint, ConstraintEntry, ControlPoint, Dim, IdGen, ObjectId, PointId, Scene, SetId, SupportOp,
};

type Result<T> = std::result::Result<T, ManipulationError>;

/// Handles offered per class.
pub const HANDLE_COUNT: usize = 5;

/// Equal-width bins for numeric attributes.
const NUMERIC_BINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HandleClass {
    Gravity,
    Support,
}

/// A cohort of gravity or support constraints sharing one target, edited as a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintHandle {
    pub handle_id: String,
    pub canvas_id: CanvasId,
    pub class: HandleClass,
    pub dim: Dim,
    /// Gravity target, or the support wall (radius removed).
    pub d: f64,
    pub member_point_ids: Vec<PointId>,
}

fn quantize(v: f64) -> i64 {
    (v * 1e6).round() as i64
}

fn dim_name(dim: Dim) -> &'static str {
    match dim {
        Dim::X => "x",
        Dim::Y => "y",
    }
}

fn op_name(op: SupportOp) -> &'static str {
    match op {
        SupportOp::Le => "le",
        SupportOp::Ge => "ge",
    }
}

/// Where a support constraint's wall sits once the point's radius is taken off.
fn wall(d: f64, op: SupportOp, r: f64) -> f64 {
    d - op.sign() * r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CohortKey {
    class: HandleClass,
    dim: Dim,
    op: Option<SupportOp>,
    at: i64,
}

impl CohortKey {
    fn of(c: &Constraint, radius: impl Fn(PointId) -> f64) -> Option<CohortKey> {
        match *c {
            Constraint::Gravity { dim, d, .. } => Some(CohortKey { class: HandleClass::Gravity, dim, op: None, at: quantize(d) }),
            Constraint::Support { point_id, dim, d, op } => Some(CohortKey {
                class: HandleClass::Support,
                dim,
                op: Some(op),
                at: quantize(wall(d, op, radius(point_id))),
            }),
            _ => None,
        }
    }

    fn id(&self, canvas: CanvasId) -> String {
        let class = match self.class {
            HandleClass::Gravity => "gravity",
            HandleClass::Support => "support",
        };
        let value = self.at as f64 / 1e6;
        match self.op {
            Some(op) => format!("c{}/{class}/{}/{}/{value}", canvas.0, dim_name(self.dim), op_name(op)),
            None => format!("c{}/{class}/{}/{value}", canvas.0, dim_name(self.dim)),
        }
    }
}

struct Cohort {
    first_seen: usize,
    entries: Vec<usize>,
    points: Vec<PointId>,
}

fn cohorts(scene: &Scene) -> Vec<(CanvasId, CohortKey, Cohort)> {
    let mut out = Vec::new();
    for canvas in &scene.canvases {
        let index = canvas.point_index();
        let radius = |p: PointId| index.get(&p).map_or(0.0, |&i| canvas.points[i].r);
        let mut map: BTreeMap<CohortKey, Cohort> = BTreeMap::new();
        for (i, e) in canvas.constraints.iter().enumerate() {
            let Some(key) = CohortKey::of(&e.constraint, radius) else { continue };
            let cohort = map.entry(key).or_insert_with(|| Cohort { first_seen: i, entries: Vec::new(), points: Vec::new() });
            cohort.entries.push(i);
            let p = e.constraint.points()[0];
            if !cohort.points.contains(&p) {
                cohort.points.push(p);
            }
        }
        out.extend(map.into_iter().map(|(k, c)| (canvas.id, k, c)));
    }
    out
}

/// The [`HANDLE_COUNT`] largest gravity cohorts and support cohorts in the scene.
pub fn constraint_handles(scene: &Scene) -> Vec<ConstraintHandle> {
    let mut all = cohorts(scene);
    all.sort_by(|a, b| {
        (a.1.class, std::cmp::Reverse(a.2.points.len()), a.0, a.2.first_seen).cmp(&(
            b.1.class,
            std::cmp::Reverse(b.2.points.len()),
            b.0,
            b.2.first_seen,
        ))
    });
    let mut taken: BTreeMap<HandleClass, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (canvas_id, key, cohort) in all {
        let n = taken.entry(key.class).or_default();
        if *n == HANDLE_COUNT {
            continue;
        }
        *n += 1;
        out.push(ConstraintHandle {
            handle_id: key.id(canvas_id),
            canvas_id,
            class: key.class,
            dim: key.dim,
            d: key.at as f64 / 1e6,
            member_point_ids: cohort.points,
        });
    }
    out
}

pub(crate) fn modify_constraint(scene: &mut Scene, handle_id: &str, new_d: f64) -> Result<CommandReport> {
    let found = cohorts(scene).into_iter().find(|(cid, key, _)| key.id(*cid) == handle_id);
    let Some((canvas_id, _, cohort)) = found else {
        return Err(ManipulationError::StaleHandle(handle_id.to_string()));
    };
    let canvas = scene.canvas_mut(canvas_id).expect("cohort canvas");
    let index = canvas.point_index();
    for i in cohort.entries {
        let e = &mut canvas.constraints[i];
        match &mut e.constraint {
            Constraint::Gravity { d, .. } => *d = new_d,
            Constraint::Support { point_id, d, op, .. } => {
                let r = index.get(point_id).map_or(0.0, |&k| canvas.points[k].r);
                *d = new_d + op.sign() * r;
            }
            _ => unreachable!("cohorts hold gravity and support only"),
        }
    }
    Ok(CommandReport { affected: vec![canvas_id], ..Default::default() })
}

pub(crate) fn set_constraints(
    scene: &mut Scene,
    object_ids: &[ObjectId],
    specs: &[Constraint],
    ids: &mut IdGen,
) -> Result<CommandReport> {
    let canvas_id = match object_ids.first() {
        Some(o) => {
            let cid = scene.canvas_of_object(*o).ok_or(ManipulationError::UnknownObject(*o))?;
            if let Some(stray) = object_ids.iter().find(|o| scene.canvas_of_object(**o).is_none()) {
                return Err(ManipulationError::UnknownObject(*stray));
            }
            if object_ids.iter().any(|o| scene.canvas_of_object(*o) != Some(cid)) {
                return Err(ManipulationError::CrossCanvasSelection);
            }
            cid
        }
        None => {
            let Some(p) = specs.iter().flat_map(|s| s.points()).next() else {
                return Ok(CommandReport::default());
            };
            scene
                .canvases
                .iter()
                .find(|c| c.point(p).is_some())
                .map(|c| c.id)
                .ok_or(ManipulationError::DanglingRef(p))?
        }
    };
    let canvas = scene.canvas_mut(canvas_id).expect("canvas present");
    let index = canvas.point_index();
    for spec in specs {
        if let Some(p) = spec.points().into_iter().find(|p| !index.contains_key(p)) {
            return Err(ManipulationError::DanglingRef(p));
        }
    }
    canvas
        .constraints
        .extend(specs.iter().map(|c| ConstraintEntry { id: ids.constraint(), constraint: c.clone() }));
    Ok(CommandReport { affected: vec![canvas_id], ..Default::default() })
}

#[derive(Debug, Clone, PartialEq)]
enum Attr {
    Color(String),
    Number(f64),
}

fn attribute_of(
    attribute: GroupAttribute,
    object: ObjectId,
    pts: &[&ControlPoint],
    color: Option<String>,
    rect: bool,
) -> Result<Attr> {
    let missing = || ManipulationError::AttributeUnavailable { object, attribute };
    let span = |dim: Dim| {
        let lo = pts.iter().map(|p| p.pos(dim) - p.r).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.pos(dim) + p.r).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    match attribute {
        GroupAttribute::Color => color.map(Attr::Color).ok_or_else(missing),
        GroupAttribute::Radius if pts.len() == 1 => Ok(Attr::Number(pts[0].r)),
        GroupAttribute::Width if pts.len() == 1 || rect => Ok(Attr::Number(span(Dim::X))),
        GroupAttribute::Height if pts.len() == 1 || rect => Ok(Attr::Number(span(Dim::Y))),
        _ => Err(missing()),
    }
}

/// Partition index of every member, partitions numbered in ascending order.
fn partition(values: &[Attr]) -> (Vec<usize>, usize) {
    if let Some(Attr::Color(_)) = values.first() {
        let mut distinct: Vec<&str> = values
            .iter()
            .map(|v| match v {
                Attr::Color(c) => c.as_str(),
                Attr::Number(_) => unreachable!("one attribute per call"),
            })
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        let of = values
            .iter()
            .map(|v| match v {
                Attr::Color(c) => distinct.binary_search(&c.as_str()).expect("present"),
                Attr::Number(_) => unreachable!(),
            })
            .collect();
        return (of, distinct.len());
    }
    let nums: Vec<f64> = values
        .iter()
        .map(|v| match v {
            Attr::Number(x) => *x,
            Attr::Color(_) => unreachable!(),
        })
        .collect();
    let lo = nums.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = if hi > lo { NUMERIC_BINS } else { 1 };
    let raw: Vec<usize> = nums
        .iter()
        .map(|x| if bins == 1 { 0 } else { (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1) })
        .collect();
    // Empty bins get no target.
    let mut used: Vec<usize> = raw.clone();
    used.sort_unstable();
    used.dedup();
    let of = raw.iter().map(|b| used.binary_search(b).expect("present")).collect();
    (of, used.len())
}

pub(crate) fn set_constraint_groups(
    scene: &mut Scene,
    set_id: SetId,
    attribute: GroupAttribute,
    dim: Dim,
    targets: &GroupTargets,
    ids: &mut IdGen,
) -> Result<CommandReport> {
    let canvas_id = scene.canvas_of_set(set_id).ok_or(ManipulationError::UnknownSet(set_id))?;
    let canvas = scene.canvas_mut(canvas_id).expect("canvas present");
    let set = canvas.set(set_id).expect("set present").clone();
    let index = canvas.point_index();

    let mut members: Vec<(Vec<PointId>, Attr)> = Vec::new();
    for oid in &set.object_ids {
        let o = canvas.object(*oid).ok_or(ManipulationError::UnknownObject(*oid))?;
        let pts: Vec<&ControlPoint> = o.control_point_ids.iter().map(|p| &canvas.points[index[p]]).collect();
        let color = o.style.fill.or(o.style.stroke).map(|c| c.to_hex());
        let value = attribute_of(attribute, o.id, &pts, color, is_rect_like(o, &pts))?;
        members.push((o.control_point_ids.clone(), value));
    }
    if members.is_empty() {
        return Ok(CommandReport::default());
    }
    let values: Vec<Attr> = members.iter().map(|m| m.1.clone()).collect();
    let (of, count) = partition(&values);
    let positions: Vec<f64> = match targets {
        GroupTargets::Auto => {
            let (lo, hi) = canvas.bounds.extent(dim);
            (0..count).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / count as f64).collect()
        }
        GroupTargets::Positions(p) if p.len() == count => p.clone(),
        GroupTargets::Positions(p) => return Err(ManipulationError::TargetCount { expected: count, got: p.len() }),
    };

    let touched: HashSet<PointId> = members.iter().flat_map(|m| m.0.iter().copied()).collect();
    canvas.constraints.retain(|e| {
        let along = e.constraint.dim() == Some(dim);
        let kind = matches!(e.constraint, Constraint::Gravity { .. } | Constraint::Support { .. });
        !(along && kind && touches_any(e, &touched))
    });
    for ((pids, _), part) in members.iter().zip(&of) {
        let pts: Vec<&ControlPoint> = pids.iter().map(|p| &canvas.points[index[p]]).collect();
        let centre = pts.iter().map(|p| p.pos(dim)).sum::<f64>() / pts.len() as f64;
        for p in pts {
            let d = positions[*part] + (p.pos(dim) - centre);
            let constraint = Constraint::Gravity { point_id: p.id, dim, d };
            canvas.constraints.push(ConstraintEntry { id: ids.constraint(), constraint });
        }
    }
    Ok(CommandReport { affected: vec![canvas_id], ..Default::default() })
}
