//! Object-level commands: stacking direction and order, moving, deleting.

use std::collections::{HashMap, HashSet};

use super::{touches_any, touches_only, CanvasTarget, CommandReport, ManipulationError, TickSelector};
use crate::infer::{group_constraints, is_rect_like, tick_of, GROUPED_GAP, STACKED_GAP};
use crate::model::{
    Baseline, Canvas, CanvasId, CollisionGroup, Constraint, ConstraintEntry, ConstraintId, ControlPoint, Dim, GroupMemory,
    IdGen, ObjectId, ObjectKind, PointId, Scene, SetId, VisualObject, VisualObjectSet,
};

type Result<T> = std::result::Result<T, ManipulationError>;

pub(crate) fn default_gap(base: &Baseline, dim: Dim) -> f64 {
    if dim == base.dim {
        STACKED_GAP
    } else {
        GROUPED_GAP
    }
}

/// The one canvas holding every listed object.
pub(crate) fn canvas_of_objects(scene: &Scene, objects: &[ObjectId]) -> Result<CanvasId> {
    let mut found: Option<CanvasId> = None;
    for id in objects {
        let cid = scene.canvas_of_object(*id).ok_or(ManipulationError::UnknownObject(*id))?;
        match found {
            Some(c) if c != cid => return Err(ManipulationError::CrossCanvasSelection),
            _ => found = Some(cid),
        }
    }
    found.ok_or_else(|| ManipulationError::InvalidOrder("empty selection".into()))
}

fn is_bar(canvas: &Canvas, o: &VisualObject) -> bool {
    let pts: Vec<&ControlPoint> = o.control_point_ids.iter().filter_map(|p| canvas.point(*p)).collect();
    is_rect_like(o, &pts)
}

/// Ids of the collision constraints that implement `group`.
fn group_collision_ids(canvas: &Canvas, group: &CollisionGroup) -> Vec<ConstraintId> {
    let owner = canvas.object_of_point();
    let members: HashSet<ObjectId> = group.ordered_object_ids.iter().copied().collect();
    let banded = group.ordered_object_ids.iter().filter_map(|id| canvas.object(*id)).any(|o| !is_bar(canvas, o));
    let ticks = canvas.baseline.as_ref().map(|b| (b.tick_dim(), b.tick_positions.clone()));
    canvas
        .constraints
        .iter()
        .filter(|e| {
            let Constraint::AxisCollision { upper_id, lower_id, dim, .. } = e.constraint else { return false };
            let inside = |p: PointId| owner.get(&p).is_some_and(|o| members.contains(o));
            if dim != group.dim || !inside(upper_id) || !inside(lower_id) {
                return false;
            }
            if !banded {
                return true;
            }
            // Bands meet at every tick; keep only this tick's links.
            match (&ticks, canvas.point(upper_id)) {
                (Some((t, pos)), Some(p)) => {
                    let c = p.pos(*t);
                    let nearest = pos
                        .iter()
                        .enumerate()
                        .min_by(|a, b| (a.1 - c).abs().total_cmp(&(b.1 - c).abs()))
                        .map(|(i, _)| i);
                    nearest == Some(group.tick_index)
                }
                _ => true,
            }
        })
        .map(|e| e.id)
        .collect()
}

fn remove_group_collisions(canvas: &mut Canvas, group: &CollisionGroup) {
    let doomed: HashSet<ConstraintId> = group_collision_ids(canvas, group).into_iter().collect();
    canvas.constraints.retain(|e| !doomed.contains(&e.id));
}

fn add_group_collisions(canvas: &mut Canvas, group: &CollisionGroup, ids: &mut IdGen) {
    let Some(base) = canvas.baseline.clone() else { return };
    let gap = default_gap(&base, group.dim);
    for constraint in group_constraints(canvas, &base, group, Some(gap)) {
        canvas.constraints.push(ConstraintEntry { id: ids.constraint(), constraint });
    }
}

pub(crate) fn change_stack_direction(scene: &mut Scene, set_id: SetId, new_dim: Dim, ids: &mut IdGen) -> Result<CommandReport> {
    let cid = scene.canvas_of_set(set_id).ok_or(ManipulationError::UnknownSet(set_id))?;
    let canvas = scene.canvas_mut(cid).expect("canvas of set");
    if canvas.baseline.is_none() {
        return Err(ManipulationError::NoStacking(set_id));
    }
    let targets: Vec<usize> = (0..canvas.collision_groups.len()).filter(|i| canvas.collision_groups[*i].set_id == set_id).collect();
    if targets.is_empty() {
        return Err(ManipulationError::NoStacking(set_id));
    }
    for &i in &targets {
        let group = canvas.collision_groups[i].clone();
        if group.dim == new_dim {
            continue;
        }
        if !group.ordered_object_ids.iter().filter_map(|id| canvas.object(*id)).all(|o| is_bar(canvas, o)) {
            return Err(ManipulationError::UnsupportedDirection(set_id));
        }
        remove_group_collisions(canvas, &group);
        let turned = CollisionGroup { dim: new_dim, ..group };
        add_group_collisions(canvas, &turned, ids);
        canvas.collision_groups[i] = turned;
    }
    Ok(CommandReport { affected: vec![cid], ..Default::default() })
}

fn style_match(a: &VisualObject, b: &VisualObject) -> bool {
    a.style.fill == b.style.fill && a.style.stroke == b.style.stroke
}

/// Orders `members` by the rank of each one (or its same-styled stand-in)
/// in `ordered`.
fn order_by(canvas: &Canvas, members: &[ObjectId], ordered: &[ObjectId]) -> Result<Vec<ObjectId>> {
    let rank = |m: ObjectId| -> Result<usize> {
        if let Some(k) = ordered.iter().position(|o| *o == m) {
            return Ok(k);
        }
        let obj = canvas.object(m).ok_or(ManipulationError::UnknownObject(m))?;
        let hits: Vec<usize> = ordered
            .iter()
            .enumerate()
            .filter(|(_, o)| canvas.object(**o).is_some_and(|x| style_match(x, obj)))
            .map(|(k, _)| k)
            .collect();
        match hits.as_slice() {
            [k] => Ok(*k),
            _ => Err(ManipulationError::InvalidOrder(format!("cannot place {m} in the requested order"))),
        }
    };
    let mut ranked: Vec<(usize, ObjectId)> = members.iter().map(|m| rank(*m).map(|r| (r, *m))).collect::<Result<_>>()?;
    ranked.sort_by_key(|(r, _)| *r);
    if ranked.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(ManipulationError::InvalidOrder("two members map to the same rank".into()));
    }
    Ok(ranked.into_iter().map(|(_, m)| m).collect())
}

pub(crate) fn change_stack_order(
    scene: &mut Scene,
    selector: TickSelector,
    ordered: &[ObjectId],
    ids: &mut IdGen,
) -> Result<CommandReport> {
    if ordered.is_empty() {
        return Err(ManipulationError::InvalidOrder("empty order".into()));
    }
    let cid = canvas_of_objects(scene, ordered)?;
    let canvas = scene.canvas_mut(cid).expect("canvas of objects");
    let set_id = canvas.set_of(ordered[0]).map(|s| s.id).ok_or(ManipulationError::InvalidOrder("object is in no set".into()))?;

    let mut plan: Vec<(usize, Vec<ObjectId>)> = Vec::new();
    match selector {
        TickSelector::Index(k) => {
            let i = canvas
                .collision_groups
                .iter()
                .position(|g| g.set_id == set_id && g.tick_index == k && g.ordered_object_ids.contains(&ordered[0]))
                .ok_or_else(|| ManipulationError::InvalidOrder(format!("no collision group at tick {k}")))?;
            let current: HashSet<ObjectId> = canvas.collision_groups[i].ordered_object_ids.iter().copied().collect();
            let wanted: HashSet<ObjectId> = ordered.iter().copied().collect();
            if current != wanted || wanted.len() != ordered.len() {
                return Err(ManipulationError::InvalidOrder("not a permutation of the group".into()));
            }
            plan.push((i, ordered.to_vec()));
        }
        TickSelector::All => {
            for (i, g) in canvas.collision_groups.iter().enumerate().filter(|(_, g)| g.set_id == set_id) {
                plan.push((i, order_by(canvas, &g.ordered_object_ids, ordered)?));
            }
            if plan.is_empty() {
                return Err(ManipulationError::NoStacking(set_id));
            }
        }
    }
    for (i, order) in plan {
        let old = canvas.collision_groups[i].clone();
        remove_group_collisions(canvas, &old);
        let group = CollisionGroup { ordered_object_ids: order, ..old };
        add_group_collisions(canvas, &group, ids);
        canvas.collision_groups[i] = group;
    }
    Ok(CommandReport { affected: vec![cid], ..Default::default() })
}

/// A set's share of the detached objects.
struct SetPiece {
    id: SetId,
    kind: ObjectKind,
    governed: bool,
    on_baseline: bool,
    members: Vec<ObjectId>,
}

/// Everything removed from a canvas along with a batch of objects.
struct Detached {
    objects: Vec<VisualObject>,
    points: Vec<ControlPoint>,
    /// Constraints among detached points only.
    inner: Vec<ConstraintEntry>,
    /// Constraints linking detached and remaining points.
    spanning: Vec<ConstraintEntry>,
    sets: Vec<SetPiece>,
    /// Affected collision groups as they were before detaching.
    groups: Vec<CollisionGroup>,
}

fn detach(canvas: &mut Canvas, removed: &HashSet<ObjectId>, ids: &mut IdGen) -> Detached {
    let points: HashSet<PointId> = canvas
        .objects
        .iter()
        .filter(|o| removed.contains(&o.id))
        .flat_map(|o| o.control_point_ids.iter().copied())
        .collect();

    let groups: Vec<CollisionGroup> = canvas
        .collision_groups
        .iter()
        .filter(|g| g.ordered_object_ids.iter().any(|o| removed.contains(o)))
        .cloned()
        .collect();
    for g in &groups {
        remove_group_collisions(canvas, g);
    }

    let (mut inner, mut spanning, mut kept) = (Vec::new(), Vec::new(), Vec::new());
    for e in canvas.constraints.drain(..) {
        if touches_only(&e, &points) {
            inner.push(e);
        } else if touches_any(&e, &points) {
            spanning.push(e);
        } else {
            kept.push(e);
        }
    }
    canvas.constraints = kept;

    let (objects, rest): (Vec<_>, Vec<_>) = canvas.objects.drain(..).partition(|o| removed.contains(&o.id));
    canvas.objects = rest;
    let (moved_points, rest): (Vec<_>, Vec<_>) = canvas.points.drain(..).partition(|p| points.contains(&p.id));
    canvas.points = rest;

    let grounded: Vec<SetId> = canvas.baseline.as_ref().map(|b| b.set_ids.clone()).unwrap_or_default();
    let mut sets = Vec::new();
    for s in &mut canvas.object_sets {
        let members: Vec<ObjectId> = s.object_ids.iter().copied().filter(|o| removed.contains(o)).collect();
        if members.is_empty() {
            continue;
        }
        s.object_ids.retain(|o| !removed.contains(o));
        sets.push(SetPiece {
            id: s.id,
            kind: s.kind,
            governed: s.collision_governed,
            on_baseline: grounded.contains(&s.id),
            members,
        });
    }
    let emptied: Vec<SetId> = canvas.object_sets.iter().filter(|s| s.object_ids.is_empty()).map(|s| s.id).collect();
    canvas.object_sets.retain(|s| !s.object_ids.is_empty());
    if let Some(b) = canvas.baseline.as_mut() {
        b.set_ids.retain(|s| !emptied.contains(s));
    }

    let mut remaining_groups = Vec::new();
    for g in canvas.collision_groups.drain(..) {
        if !g.ordered_object_ids.iter().any(|o| removed.contains(o)) {
            remaining_groups.push(g);
            continue;
        }
        let left: Vec<ObjectId> = g.ordered_object_ids.iter().copied().filter(|o| !removed.contains(o)).collect();
        if left.len() >= 2 && !emptied.contains(&g.set_id) {
            remaining_groups.push(CollisionGroup { ordered_object_ids: left, ..g });
        }
    }
    canvas.collision_groups = remaining_groups;
    let rebuilt: Vec<CollisionGroup> = canvas
        .collision_groups
        .iter()
        .filter(|g| groups.iter().any(|old| old.set_id == g.set_id && old.tick_index == g.tick_index))
        .cloned()
        .collect();
    for g in &rebuilt {
        add_group_collisions(canvas, g, ids);
    }

    Detached { objects, points: moved_points, inner, spanning, sets, groups }
}

pub(crate) fn delete_objects(scene: &mut Scene, objects: &[ObjectId], ids: &mut IdGen) -> Result<CommandReport> {
    if objects.is_empty() {
        return Ok(CommandReport::default());
    }
    let cid = canvas_of_objects(scene, objects)?;
    let removed: HashSet<ObjectId> = objects.iter().copied().collect();
    let canvas = scene.canvas_mut(cid).expect("canvas of objects");
    let gone = detach(canvas, &removed, ids);
    let dead: HashSet<PointId> = gone.points.iter().map(|p| p.id).collect();
    scene.dormant_constraints.retain(|e| !touches_any(e, &dead));
    for m in &mut scene.group_memory {
        m.ordered_object_ids.retain(|o| !removed.contains(o));
    }
    scene.group_memory.retain(|m| m.ordered_object_ids.len() >= 2);
    Ok(CommandReport { affected: vec![cid], ..Default::default() })
}

/// An empty canvas inheriting the source's frame, axes and baseline.
fn clone_frame(source: &Canvas, ids: &mut IdGen) -> Canvas {
    let mut canvas = Canvas::empty(ids.canvas(), source.bounds);
    let mut axis_map = HashMap::new();
    for a in &source.axes {
        let mut a = a.clone();
        let id = ids.axis();
        axis_map.insert(a.id, id);
        a.id = id;
        canvas.axes.push(a);
    }
    canvas.baseline = source.baseline.as_ref().and_then(|b| {
        axis_map.get(&b.axis_id).map(|&axis_id| Baseline { axis_id, set_ids: Vec::new(), ..b.clone() })
    });
    canvas
}

fn attach(canvas: &mut Canvas, piece: Detached, ids: &mut IdGen) {
    canvas.objects.extend(piece.objects);
    canvas.points.extend(piece.points);
    canvas.constraints.extend(piece.inner);
    for s in piece.sets {
        let existing = canvas.object_sets.iter().position(|t| t.id == s.id && t.kind == s.kind);
        let target_id = match existing {
            Some(i) => {
                canvas.object_sets[i].object_ids.extend(s.members.iter().copied());
                canvas.object_sets[i].id
            }
            None => {
                let id = ids.set();
                canvas.object_sets.push(VisualObjectSet {
                    id,
                    kind: s.kind,
                    object_ids: s.members.clone(),
                    collision_governed: s.governed,
                });
                id
            }
        };
        if s.on_baseline {
            if let Some(b) = canvas.baseline.as_mut() {
                if !b.set_ids.contains(&target_id) {
                    b.set_ids.push(target_id);
                }
            }
        }
    }
}

/// Moves members that came back under a stand-in set into their original set.
fn rejoin(canvas: &mut Canvas, set_id: SetId, members: &[ObjectId]) {
    for o in members {
        let Some(from) = canvas.set_of(*o).map(|s| s.id).filter(|s| *s != set_id) else { continue };
        for set in &mut canvas.object_sets {
            if set.id == from {
                set.object_ids.retain(|x| x != o);
            } else if set.id == set_id {
                set.object_ids.push(*o);
            }
        }
        if canvas.set(from).is_some_and(|s| s.object_ids.is_empty()) {
            canvas.object_sets.retain(|s| s.id != from);
            if let Some(b) = canvas.baseline.as_mut() {
                b.set_ids.retain(|s| *s != from);
            }
        }
    }
}

/// Rebuilds remembered groups whose members are back together on `canvas`.
fn restore_groups(canvas: &mut Canvas, memory: &mut Vec<GroupMemory>, touched: &HashSet<ObjectId>, ids: &mut IdGen) {
    let Some(base) = canvas.baseline.clone() else { return };
    let mut finished = Vec::new();
    for (mi, m) in memory.iter().enumerate() {
        if !m.ordered_object_ids.iter().any(|o| touched.contains(o)) {
            continue;
        }
        let present: Vec<ObjectId> = m.ordered_object_ids.iter().copied().filter(|o| canvas.object(*o).is_some()).collect();
        if present.len() < 2 {
            continue;
        }
        let Some(kind) = canvas.set(m.set_id).map(|s| s.kind) else { continue };
        if !present.iter().all(|o| canvas.set_of(*o).is_some_and(|s| s.kind == kind)) {
            continue;
        }
        let set_id = m.set_id;
        rejoin(canvas, set_id, &present);
        let tick_index = if m.tick_index < base.tick_positions.len() {
            m.tick_index
        } else {
            match canvas.object(present[0]).and_then(|o| tick_of(canvas, &base, o)) {
                Some(k) => k,
                None => continue,
            }
        };
        let is_stale = |g: &CollisionGroup| {
            g.set_id == set_id && g.tick_index == tick_index && g.ordered_object_ids.iter().any(|o| present.contains(o))
        };
        let stale: Vec<CollisionGroup> = canvas.collision_groups.iter().filter(|g| is_stale(g)).cloned().collect();
        for g in &stale {
            remove_group_collisions(canvas, g);
        }
        canvas.collision_groups.retain(|g| !is_stale(g));
        let group = CollisionGroup { set_id, tick_index, dim: m.dim, ordered_object_ids: present.clone() };
        add_group_collisions(canvas, &group, ids);
        canvas.collision_groups.push(group);
        if present.len() == m.ordered_object_ids.len() {
            finished.push(mi);
        }
    }
    for mi in finished.into_iter().rev() {
        memory.remove(mi);
    }
}

pub(crate) fn move_to_canvas(
    scene: &mut Scene,
    objects: &[ObjectId],
    target: CanvasTarget,
    ids: &mut IdGen,
) -> Result<CommandReport> {
    if objects.is_empty() {
        return Ok(CommandReport::default());
    }
    let source_id = canvas_of_objects(scene, objects)?;
    if let CanvasTarget::Canvas(t) = target {
        if scene.canvas(t).is_none() {
            return Err(ManipulationError::UnknownCanvas(t));
        }
        if t == source_id {
            return Ok(CommandReport::default());
        }
    }
    let moved: HashSet<ObjectId> = objects.iter().copied().collect();
    let source_pos = scene.canvases.iter().position(|c| c.id == source_id).expect("source canvas");

    let mut fresh = match target {
        CanvasTarget::New => Some(clone_frame(&scene.canvases[source_pos], ids)),
        CanvasTarget::Canvas(_) => None,
    };
    let piece = detach(&mut scene.canvases[source_pos], &moved, ids);
    for g in &piece.groups {
        if !scene.group_memory.iter().any(|m| m.set_id == g.set_id && m.tick_index == g.tick_index) {
            scene.group_memory.push(GroupMemory {
                set_id: g.set_id,
                tick_index: g.tick_index,
                dim: g.dim,
                ordered_object_ids: g.ordered_object_ids.clone(),
            });
        }
    }
    let mut piece = piece;
    let dropped = piece.spanning.len();
    scene.dormant_constraints.append(&mut piece.spanning);

    let target_id = match target {
        CanvasTarget::New => {
            let c = fresh.take().expect("fresh canvas");
            let id = c.id;
            scene.canvases.insert(source_pos + 1, c);
            id
        }
        CanvasTarget::Canvas(t) => t,
    };
    let mut memory = std::mem::take(&mut scene.group_memory);
    {
        let canvas = scene.canvas_mut(target_id).expect("target canvas");
        attach(canvas, piece, ids);
        restore_groups(canvas, &mut memory, &moved, ids);
    }
    scene.group_memory = memory;
    revive_dormant(scene);

    let mut affected = vec![source_id, target_id];
    let source_empty = scene.canvas(source_id).is_some_and(|c| c.objects.is_empty());
    if source_empty && scene.canvases.len() > 1 {
        scene.canvases.retain(|c| c.id != source_id);
        affected.retain(|c| *c != source_id);
    }
    Ok(CommandReport {
        affected,
        dropped_constraints: dropped,
        created_canvas: matches!(target, CanvasTarget::New).then_some(target_id),
    })
}

/// Returns parked constraints to a canvas once all their points share it.
fn revive_dormant(scene: &mut Scene) {
    let mut still = Vec::new();
    for e in std::mem::take(&mut scene.dormant_constraints) {
        let pts = e.constraint.points();
        let home = scene.canvases.iter_mut().find(|c| pts.iter().all(|p| c.point(*p).is_some()));
        match home {
            Some(c) => c.constraints.push(e),
            None => still.push(e),
        }
    }
    scene.dormant_constraints = still;
}
