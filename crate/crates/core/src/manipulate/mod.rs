//! Manipulation commands: rewrite a scene's constraints, then re-solve.

mod axes;
mod gesture;
mod handles;
mod stacking;

use std::collections::HashSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{
    validate_scene, AxisId, CanvasId, Constraint, ConstraintEntry, Dim, ObjectId, PointId, Scene, SetId, Violation,
};
use crate::solver::{solve, Frame, SolveError, SolveStatus, SolverConfig};

pub use gesture::{translate_gesture, Gesture, GestureConfig, GesturePoint};
pub use handles::{constraint_handles, ConstraintHandle, HandleClass, HANDLE_COUNT};

/// Which collision groups a reorder applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickSelector {
    Index(usize),
    All,
}

impl Serialize for TickSelector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TickSelector::Index(i) => s.serialize_u64(*i as u64),
            TickSelector::All => s.serialize_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for TickSelector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(i) => Ok(TickSelector::Index(i)),
            Raw::Word(w) if w == "all" => Ok(TickSelector::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a tick index or \"all\", got {w:?}"))),
        }
    }
}

/// Destination of a move: an existing canvas or a fresh one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanvasTarget {
    Canvas(CanvasId),
    New,
}

impl Serialize for CanvasTarget {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CanvasTarget::Canvas(id) => s.serialize_u64(id.0),
            CanvasTarget::New => s.serialize_str("new"),
        }
    }
}

impl<'de> Deserialize<'de> for CanvasTarget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Id(i) => Ok(CanvasTarget::Canvas(CanvasId(i))),
            Raw::Word(w) if w == "new" => Ok(CanvasTarget::New),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a canvas id or \"new\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SortKey {
    Width,
    Height,
    Left,
    Right,
    Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GroupAttribute {
    Color,
    Radius,
    Width,
    Height,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupTargets {
    Auto,
    Positions(Vec<f64>),
}

impl Serialize for GroupTargets {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupTargets::Auto => s.serialize_str("auto"),
            GroupTargets::Positions(p) => p.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for GroupTargets {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(p) => Ok(GroupTargets::Positions(p)),
            Raw::Word(w) if w == "auto" => Ok(GroupTargets::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a list of px or \"auto\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase")]
pub enum ManipulationCommand {
    ChangeStackDirection { set_id: SetId, new_dim: Dim },
    ChangeStackOrder { tick_index_or_all: TickSelector, ordered_object_ids: Vec<ObjectId> },
    MoveToCanvas { object_ids: Vec<ObjectId>, target_canvas_id: CanvasTarget },
    DeleteObjects { object_ids: Vec<ObjectId> },
    RescaleAxis { axis_id: AxisId, zoom_factor: f64, anchor: f64 },
    ReorderTicks { axis_id: AxisId, permutation: Vec<usize> },
    SortAxis { axis_id: AxisId, key: SortKey, ascending: bool },
    ModifyConstraint { handle_id: String, new_d: f64 },
    SetConstraints { object_ids: Vec<ObjectId>, constraint_specs: Vec<Constraint> },
    SetConstraintGroups {
        set_id: SetId,
        attribute: GroupAttribute,
        #[serde(default = "default_group_dim")]
        dim: Dim,
        targets: GroupTargets,
    },
}

fn default_group_dim() -> Dim {
    Dim::X
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ManipulationError {
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("unknown set {0}")]
    UnknownSet(SetId),
    #[error("unknown axis {0}")]
    UnknownAxis(AxisId),
    #[error("unknown canvas {0}")]
    UnknownCanvas(CanvasId),
    #[error("set {0} has no collision groups")]
    NoStacking(SetId),
    #[error("set {0} holds bands that cannot be laid side by side")]
    UnsupportedDirection(SetId),
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("selection spans more than one canvas")]
    CrossCanvasSelection,
    #[error("axis {0} is not continuous")]
    NotContinuous(AxisId),
    #[error("axis {0} is not discrete")]
    NotDiscrete(AxisId),
    #[error("zoom factor {0} must be positive")]
    InvalidZoom(f64),
    #[error("permutation is not a bijection over {0} ticks")]
    InvalidPermutation(usize),
    #[error("stale constraint handle {0}")]
    StaleHandle(String),
    #[error("constraint references missing point {0}")]
    DanglingRef(PointId),
    #[error("object {object} has no {attribute:?}")]
    AttributeUnavailable { object: ObjectId, attribute: GroupAttribute },
    #[error("expected {expected} targets, got {got}")]
    TargetCount { expected: usize, got: usize },
    #[error("result would violate scene invariants: {0:?}")]
    Invalid(Vec<Violation>),
}

/// What a command changed besides geometry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommandReport {
    /// Canvases whose constraint systems changed and must be re-solved.
    pub affected: Vec<CanvasId>,
    /// Constraints parked because their points ended up on different canvases.
    pub dropped_constraints: usize,
    /// Canvas created by the command, if any.
    pub created_canvas: Option<CanvasId>,
}

/// Applies a command to a copy of `scene`. The copy has its version bumped
/// and is unsolved; `scene` itself is never touched.
pub fn apply(scene: &Scene, cmd: &ManipulationCommand) -> Result<(Scene, CommandReport), ManipulationError> {
    let mut next = scene.clone();
    let mut ids = next.ids();
    let report = match cmd {
        ManipulationCommand::ChangeStackDirection { set_id, new_dim } => {
            stacking::change_stack_direction(&mut next, *set_id, *new_dim, &mut ids)?
        }
        ManipulationCommand::ChangeStackOrder { tick_index_or_all, ordered_object_ids } => {
            stacking::change_stack_order(&mut next, *tick_index_or_all, ordered_object_ids, &mut ids)?
        }
        ManipulationCommand::MoveToCanvas { object_ids, target_canvas_id } => {
            stacking::move_to_canvas(&mut next, object_ids, *target_canvas_id, &mut ids)?
        }
        ManipulationCommand::DeleteObjects { object_ids } => stacking::delete_objects(&mut next, object_ids, &mut ids)?,
        ManipulationCommand::RescaleAxis { axis_id, zoom_factor, anchor } => {
            axes::rescale_axis(&mut next, *axis_id, *zoom_factor, *anchor)?
        }
        ManipulationCommand::ReorderTicks { axis_id, permutation } => {
            axes::reorder_ticks(&mut next, *axis_id, permutation)?
        }
        ManipulationCommand::SortAxis { axis_id, key, ascending } => axes::sort_axis(&mut next, *axis_id, *key, *ascending)?,
        ManipulationCommand::ModifyConstraint { handle_id, new_d } => handles::modify_constraint(&mut next, handle_id, *new_d)?,
        ManipulationCommand::SetConstraints { object_ids, constraint_specs } => {
            handles::set_constraints(&mut next, object_ids, constraint_specs, &mut ids)?
        }
        ManipulationCommand::SetConstraintGroups { set_id, attribute, dim, targets } => {
            handles::set_constraint_groups(&mut next, *set_id, *attribute, *dim, targets, &mut ids)?
        }
    };
    next.store_ids(ids);
    next.version += 1;
    let violations = validate_scene(&next);
    if !violations.is_empty() {
        return Err(ManipulationError::Invalid(violations));
    }
    Ok((next, report))
}

/// Re-solves the listed canvases in place, forwarding frames tagged with the
/// canvas they belong to. A `Break` from the sink stops that solve early.
pub fn solve_canvases(
    scene: &mut Scene,
    canvases: &[CanvasId],
    config: &SolverConfig,
    sink: &mut dyn FnMut(CanvasId, &Frame) -> ControlFlow<()>,
) -> Result<Vec<(CanvasId, SolveStatus)>, SolveError> {
    let mut statuses: Vec<(CanvasId, SolveStatus)> = Vec::new();
    for cid in canvases {
        if statuses.iter().any(|(c, _)| c == cid) {
            continue;
        }
        let Some(canvas) = scene.canvas(*cid) else { continue };
        let mut forward = |f: &Frame| sink(*cid, f);
        let outcome = solve(canvas, config, &mut forward)?;
        *scene.canvas_mut(*cid).expect("canvas present") = outcome.canvas;
        statuses.push((*cid, outcome.status));
        if outcome.status == SolveStatus::Cancelled {
            break;
        }
    }
    Ok(statuses)
}

#[derive(Debug, Error)]
pub enum ExecuteError {
    #[error(transparent)]
    Command(#[from] ManipulationError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Applies a command and re-solves every affected canvas.
pub fn execute(
    scene: &Scene,
    cmd: &ManipulationCommand,
    config: &SolverConfig,
    sink: &mut dyn FnMut(CanvasId, &Frame) -> ControlFlow<()>,
) -> Result<(Scene, CommandReport), ExecuteError> {
    let (mut next, report) = apply(scene, cmd)?;
    solve_canvases(&mut next, &report.affected, config, sink)?;
    Ok((next, report))
}

/// A failed script step, 1-based, with the scene as it stood before it.
#[derive(Debug, Error)]
#[error("step {step}: {error}")]
pub struct ScriptError {
    pub step: usize,
    pub error: ExecuteError,
    pub scene: Box<Scene>,
}

/// Manipulation script document: a list of commands, bare or wrapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Script {
    Bare(Vec<ManipulationCommand>),
    Wrapped { commands: Vec<ManipulationCommand> },
}

impl Script {
    pub fn commands(&self) -> &[ManipulationCommand] {
        match self {
            Script::Bare(c) | Script::Wrapped { commands: c } => c,
        }
    }
}

/// Runs commands in order with a solve after each. `on_frame` receives the
/// 1-based step, the canvas and the frame.
pub fn run_script(
    scene: &Scene,
    commands: &[ManipulationCommand],
    config: &SolverConfig,
    on_frame: &mut dyn FnMut(usize, CanvasId, &Frame),
) -> Result<Scene, ScriptError> {
    let mut current = scene.clone();
    for (i, cmd) in commands.iter().enumerate() {
        let step = i + 1;
        let mut sink = |cid: CanvasId, f: &Frame| {
            on_frame(step, cid, f);
            ControlFlow::Continue(())
        };
        match execute(&current, cmd, config, &mut sink) {
            Ok((next, _)) => current = next,
            Err(error) => return Err(ScriptError { step, error, scene: Box::new(current) }),
        }
    }
    Ok(current)
}

/// Constraints whose every point lies in `points`.
pub(crate) fn touches_only(c: &ConstraintEntry, points: &HashSet<PointId>) -> bool {
    c.constraint.points().iter().all(|p| points.contains(p))
}

pub(crate) fn touches_any(c: &ConstraintEntry, points: &HashSet<PointId>) -> bool {
    c.constraint.points().iter().any(|p| points.contains(p))
}
