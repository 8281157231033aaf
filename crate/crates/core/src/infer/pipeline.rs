//! Document bytes to a constrained scene.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::baseline::{build_axes, detect_baseline_axis};
use super::constraints::build_constraints;
use super::shape::{is_rect_like, points_of};
use crate::model::{Canvas, ConstraintEntry, IdGen, ObjectId, ObjectKind, Scene, SetId};
use crate::svg::{classify_visual_objects, extract_object_sets, parse_document, SvgError};

#[derive(Debug, Error)]
pub enum InferError {
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("no visual objects")]
    NoVisualObjects,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum InferWarning {
    UnsupportedElement { element: String, offset: usize },
    /// Legend-like mark left out of every object set.
    Unclassified { object_id: ObjectId },
    NoBaseline,
    /// Stacked bands floating free of any axis: relative and absolute
    /// heights cannot be told apart.
    ThemeRiverAmbiguity { set_id: SetId },
}

impl std::fmt::Display for InferWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InferWarning::UnsupportedElement { element, offset } => {
                write!(f, "unsupported element <{element}> at byte {offset} skipped")
            }
            InferWarning::Unclassified { object_id } => write!(f, "unclassified legend-like mark {object_id}"),
            InferWarning::NoBaseline => write!(f, "no baseline: constraints are gravity-only"),
            InferWarning::ThemeRiverAmbiguity { set_id } => {
                write!(f, "set {set_id} may be a ThemeRiver; band heights are ambiguous")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Inference {
    pub scene: Scene,
    pub warnings: Vec<InferWarning>,
}

/// Parses a chart document and infers its constraint system.
pub fn infer_scene(bytes: &[u8]) -> Result<Inference, InferError> {
    let parsed = parse_document(bytes)?;
    let mut warnings: Vec<InferWarning> = parsed
        .warnings
        .iter()
        .map(|w| InferWarning::UnsupportedElement { element: w.element.clone(), offset: w.offset })
        .collect();

    let mut ids = IdGen::starting_at(1);
    let canvas_id = ids.canvas();
    let classified = classify_visual_objects(&parsed.elements, &mut ids);
    let extraction = extract_object_sets(&classified.objects, &classified.points, &classified.texts, parsed.bounds, &mut ids);
    if extraction.sets.is_empty() {
        return Err(InferError::NoVisualObjects);
    }

    let kept: HashSet<ObjectId> = extraction
        .sets
        .iter()
        .flat_map(|s| s.object_ids.iter().copied())
        .chain(extraction.unclassified.iter().copied())
        .collect();
    let mut canvas = Canvas::empty(canvas_id, parsed.bounds);
    canvas.objects = classified.objects.iter().filter(|o| kept.contains(&o.id)).cloned().collect();
    let live: HashSet<_> = canvas.objects.iter().flat_map(|o| o.control_point_ids.iter().copied()).collect();
    canvas.points = classified.points.iter().filter(|p| live.contains(&p.id)).cloned().collect();
    canvas.object_sets = extraction.sets.clone();
    let b = parsed.bounds;
    let centre = [b.x + b.width / 2.0, b.y + b.height / 2.0];
    canvas.axes = build_axes(&extraction.axis_lines, &extraction.tick_marks, &classified.texts, centre, &mut ids)
        .into_iter()
        .map(|(_, a)| a)
        .collect();
    warnings.extend(extraction.unclassified.iter().map(|&object_id| InferWarning::Unclassified { object_id }));

    canvas.baseline = match detect_baseline_axis(&canvas) {
        Ok(base) => Some(base),
        Err(_) => {
            warnings.push(InferWarning::NoBaseline);
            None
        }
    };
    warnings.extend(themeriver_sets(&canvas).into_iter().map(|set_id| InferWarning::ThemeRiverAmbiguity { set_id }));

    let system = build_constraints(&canvas, canvas.baseline.as_ref());
    for set in &mut canvas.object_sets {
        set.collision_governed = system.governed_sets.contains(&set.id);
    }
    canvas.constraints =
        system.constraints.into_iter().map(|constraint| ConstraintEntry { id: ids.constraint(), constraint }).collect();
    canvas.collision_groups = system.groups;

    let mut scene = Scene::empty();
    scene.canvases.push(canvas);
    scene.store_ids(ids);
    Ok(Inference { scene, warnings })
}

/// Area sets of several free-form bands that rest on no baseline.
fn themeriver_sets(canvas: &Canvas) -> Vec<SetId> {
    let index = canvas.point_index();
    let grounded: &[SetId] = canvas.baseline.as_ref().map_or(&[], |b| b.set_ids.as_slice());
    canvas
        .object_sets
        .iter()
        .filter(|s| s.kind == ObjectKind::Area && !grounded.contains(&s.id))
        .filter(|s| {
            s.object_ids
                .iter()
                .filter_map(|id| canvas.object(*id))
                .filter(|o| !is_rect_like(o, &points_of(o, &index, canvas)))
                .count()
                >= 2
        })
        .map(|s| s.id)
        .collect()
}
