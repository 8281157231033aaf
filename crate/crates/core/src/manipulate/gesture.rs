//! Completed pointer gestures to commands.

use serde::{Deserialize, Serialize};

use super::{CanvasTarget, ManipulationCommand, ManipulationError, TickSelector};
use crate::model::{AxisId, ObjectId, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GesturePoint {
    pub x: f64,
    pub y: f64,
    pub t_ms: f64,
}

/// A finished gesture in the source canvas's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Gesture {
    Drag { object_ids: Vec<ObjectId>, path: Vec<GesturePoint> },
    Zoom { axis_id: AxisId, factor: f64, anchor: f64 },
    TickDrag { axis_id: AxisId, tick_index: usize, to: f64 },
    HandleDrag { handle_id: String, to: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GestureConfig {
    /// Release speed in px/s above which a drag out of the canvas deletes.
    pub delete_speed: f64,
}

impl Default for GestureConfig {
    fn default() -> Self {
        GestureConfig { delete_speed: 1500.0 }
    }
}

/// Speed over the last segment of the path with a positive duration.
fn release_speed(path: &[GesturePoint]) -> f64 {
    let Some(last) = path.last() else { return 0.0 };
    path.iter()
        .rev()
        .skip(1)
        .find(|p| p.t_ms < last.t_ms)
        .map_or(0.0, |p| (last.x - p.x).hypot(last.y - p.y) / ((last.t_ms - p.t_ms) / 1000.0))
}

/// The command a gesture stands for, or `None` when it changes nothing.
pub fn translate_gesture(
    scene: &Scene,
    gesture: &Gesture,
    config: &GestureConfig,
) -> Result<Option<ManipulationCommand>, ManipulationError> {
    match gesture {
        Gesture::Zoom { axis_id, factor, anchor } => {
            Ok(Some(ManipulationCommand::RescaleAxis { axis_id: *axis_id, zoom_factor: *factor, anchor: *anchor }))
        }
        Gesture::HandleDrag { handle_id, to } => {
            Ok(Some(ManipulationCommand::ModifyConstraint { handle_id: handle_id.clone(), new_d: *to }))
        }
        Gesture::TickDrag { axis_id, tick_index, to } => {
            let canvas = scene
                .canvas_of_axis(*axis_id)
                .and_then(|c| scene.canvas(c))
                .ok_or(ManipulationError::UnknownAxis(*axis_id))?;
            let axis = canvas.axis(*axis_id).expect("axis on its canvas");
            let n = axis.ticks.len();
            if *tick_index >= n {
                return Err(ManipulationError::InvalidPermutation(n));
            }
            let slot = axis
                .ticks
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.position - to).abs().total_cmp(&(b.1.position - to).abs()))
                .map(|(i, _)| i)
                .expect("nonempty ticks");
            if slot == *tick_index {
                return Ok(None);
            }
            let mut permutation: Vec<usize> = (0..n).filter(|i| i != tick_index).collect();
            permutation.insert(slot, *tick_index);
            Ok(Some(ManipulationCommand::ReorderTicks { axis_id: *axis_id, permutation }))
        }
        Gesture::Drag { object_ids, path } => drag(scene, object_ids, path, config),
    }
}

fn drag(
    scene: &Scene,
    object_ids: &[ObjectId],
    path: &[GesturePoint],
    config: &GestureConfig,
) -> Result<Option<ManipulationCommand>, ManipulationError> {
    let (Some(first), Some(last)) = (path.first(), path.last()) else { return Ok(None) };
    let Some(&lead) = object_ids.first() else { return Ok(None) };
    let cid = scene.canvas_of_object(lead).ok_or(ManipulationError::UnknownObject(lead))?;
    let canvas = scene.canvas(cid).expect("canvas present");

    if !canvas.bounds.contains(last.x, last.y) {
        let cmd = if release_speed(path) > config.delete_speed {
            ManipulationCommand::DeleteObjects { object_ids: object_ids.to_vec() }
        } else {
            ManipulationCommand::MoveToCanvas { object_ids: object_ids.to_vec(), target_canvas_id: CanvasTarget::New }
        };
        return Ok(Some(cmd));
    }

    let Some(group) = canvas.collision_groups.iter().find(|g| g.ordered_object_ids.contains(&lead)) else {
        return Ok(None);
    };
    let Some(base) = canvas.baseline.as_ref() else { return Ok(None) };
    let shift = [last.x - first.x, last.y - first.y];
    let dim = group.dim;
    let key = |id: ObjectId| -> f64 {
        let o = canvas.object(id).expect("group member");
        let b = canvas.object_bounds(o).expect("member points");
        let moved = if object_ids.contains(&id) { shift[dim.index()] } else { 0.0 };
        let c = b.center(dim) + moved;
        // Stacks are listed nearest the baseline first, side-by-side groups in axis order.
        if dim == base.dim {
            base.data_side.sign() * (c - base.position)
        } else {
            c
        }
    };
    let mut order = group.ordered_object_ids.clone();
    order.sort_by(|a, b| key(*a).total_cmp(&key(*b)));
    if order == group.ordered_object_ids {
        return Ok(None);
    }
    Ok(Some(ManipulationCommand::ChangeStackOrder {
        tick_index_or_all: TickSelector::Index(group.tick_index),
        ordered_object_ids: order,
    }))
}
