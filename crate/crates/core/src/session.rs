//! Message protocol between an interactive client and one scene.
//!
//! [`Session::handle`] is synchronous: it emits every reply through `out`,
//! including the frame stream of any solve it triggers. A `Break` from `out`
//! cancels the running solve; the scene keeps the positions reached so far.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::export::{export_canvas, ExportFormat};
use crate::infer::{infer_scene, InferWarning};
use crate::manipulate::{
    apply, constraint_handles, solve_canvases, translate_gesture, CommandReport, ConstraintHandle, Gesture,
    GestureConfig, ManipulationCommand,
};
use crate::model::{
    deserialize_scene, validate_scene, Baseline, Canvas, CanvasId, CollisionGroup, Constraint, ConstraintEntry, IdGen,
    Scene,
};
use crate::solver::{Frame, SolveStatus, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CanvasOpKind {
    Delete,
    Duplicate,
    Reset,
    ToggleConstraintLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase")]
pub enum ClientMessage {
    /// A vector chart, or a scene document (recognised by a leading `{`).
    LoadDocument { document: String },
    ApplyCommand { scene_version: u64, command: ManipulationCommand },
    ApplyGesture { scene_version: u64, gesture: Gesture },
    ExportCanvas { canvas_id: CanvasId, format: ExportFormat },
    CanvasOp { canvas_id: CanvasId, op: CanvasOpKind },
    SetFrameStride { stride: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase")]
pub enum ServerMessage {
    SceneSnapshot { scene: Scene, handles: Vec<ConstraintHandle>, constraint_layer: Vec<CanvasId> },
    Frame { version: u64, canvas_id: CanvasId, frame: Frame },
    CommandResult {
        ok: bool,
        version: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        command: Option<ManipulationCommand>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        report: Option<CommandReport>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        statuses: Vec<(CanvasId, SolveStatus)>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<InferWarning>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<ErrorInfo>,
    },
    ExportResult { canvas_id: CanvasId, format: ExportFormat, document: String },
}

impl ServerMessage {
    fn failure(kind: &str, message: impl Into<String>) -> Self {
        ServerMessage::CommandResult {
            ok: false,
            version: None,
            command: None,
            report: None,
            statuses: Vec::new(),
            warnings: Vec::new(),
            error: Some(ErrorInfo { kind: kind.into(), message: message.into() }),
        }
    }

    fn success(version: u64) -> Self {
        ServerMessage::CommandResult {
            ok: true,
            version: Some(version),
            command: None,
            report: None,
            statuses: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }
}

/// Variant name of an error's debug form, e.g. `NoStacking`.
fn kind_of(e: &impl std::fmt::Debug) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric()).collect()
}

#[derive(Debug, Clone, Default)]
pub struct Session {
    scene: Option<Scene>,
    /// Each canvas as first published, for `Reset`.
    originals: HashMap<CanvasId, Canvas>,
    layer: BTreeSet<CanvasId>,
    stride: usize,
    pub solver: SolverConfig,
    pub gestures: GestureConfig,
}

type Out<'a> = &'a mut dyn FnMut(ServerMessage) -> ControlFlow<()>;

impl Session {
    pub fn new() -> Self {
        Session { stride: 1, ..Default::default() }
    }

    pub fn scene(&self) -> Option<&Scene> {
        self.scene.as_ref()
    }

    /// Parses one JSON client message and handles it; malformed input is
    /// answered with an error result.
    pub fn handle_text(&mut self, text: &str, out: Out) {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg, out),
            Err(e) => {
                let _ = out(ServerMessage::failure("MalformedMessage", e.to_string()));
            }
        }
    }

    pub fn handle(&mut self, msg: ClientMessage, out: Out) {
        match msg {
            ClientMessage::LoadDocument { document } => self.load(&document, out),
            ClientMessage::ApplyCommand { scene_version, command } => self.command(scene_version, command, out),
            ClientMessage::ApplyGesture { scene_version, gesture } => {
                let Some(scene) = self.scene.as_ref() else {
                    let _ = out(ServerMessage::failure("NoScene", "no document loaded"));
                    return;
                };
                match translate_gesture(scene, &gesture, &self.gestures) {
                    Ok(Some(command)) => self.command(scene_version, command, out),
                    Ok(None) => {
                        let _ = out(ServerMessage::success(scene.version));
                    }
                    Err(e) => {
                        let _ = out(ServerMessage::failure(&kind_of(&e), e.to_string()));
                    }
                }
            }
            ClientMessage::ExportCanvas { canvas_id, format } => {
                let Some(scene) = self.scene.as_ref() else {
                    let _ = out(ServerMessage::failure("NoScene", "no document loaded"));
                    return;
                };
                let reply = match export_canvas(scene, canvas_id, format) {
                    Ok(bytes) => ServerMessage::ExportResult {
                        canvas_id,
                        format,
                        document: String::from_utf8(bytes).expect("exports are UTF-8"),
                    },
                    Err(e) => ServerMessage::failure(&kind_of(&e), e.to_string()),
                };
                let _ = out(reply);
            }
            ClientMessage::CanvasOp { canvas_id, op } => self.canvas_op(canvas_id, op, out),
            ClientMessage::SetFrameStride { stride } => {
                self.stride = stride.max(1);
                let _ = out(ServerMessage::success(self.scene.as_ref().map_or(0, |s| s.version)));
            }
        }
    }

    /// The current scene with its handles and constraint-layer state.
    pub fn snapshot(&self) -> ServerMessage {
        let scene = self.scene.clone().unwrap_or_else(Scene::empty);
        let handles = constraint_handles(&scene);
        ServerMessage::SceneSnapshot { scene, handles, constraint_layer: self.layer.iter().copied().collect() }
    }

    fn remember_new_canvases(&mut self) {
        if let Some(scene) = &self.scene {
            for c in &scene.canvases {
                self.originals.entry(c.id).or_insert_with(|| c.clone());
            }
        }
    }

    fn load(&mut self, document: &str, out: Out) {
        let loaded = if document.trim_start().starts_with('{') {
            deserialize_scene(document.as_bytes())
                .map(|s| (s, Vec::new()))
                .map_err(|e| ServerMessage::failure("Document", e.to_string()))
        } else {
            infer_scene(document.as_bytes())
                .map(|i| (i.scene, i.warnings))
                .map_err(|e| ServerMessage::failure(&kind_of(&e), e.to_string()))
        };
        match loaded {
            Ok((scene, warnings)) => {
                let version = scene.version;
                self.scene = Some(scene);
                self.originals.clear();
                self.layer.clear();
                self.remember_new_canvases();
                let mut result = ServerMessage::success(version);
                if let ServerMessage::CommandResult { warnings: w, .. } = &mut result {
                    *w = warnings;
                }
                if out(result).is_continue() {
                    let _ = out(self.snapshot());
                }
            }
            Err(reply) => {
                let _ = out(reply);
            }
        }
    }

    fn command(&mut self, version: u64, command: ManipulationCommand, out: Out) {
        let Some(scene) = self.scene.as_ref() else {
            let _ = out(ServerMessage::failure("NoScene", "no document loaded"));
            return;
        };
        if version != scene.version {
            let _ = out(ServerMessage::failure(
                "StaleVersion",
                format!("command targets version {version}, scene is at {}", scene.version),
            ));
            return;
        }
        let (next, report) = match apply(scene, &command) {
            Ok(r) => r,
            Err(e) => {
                let _ = out(ServerMessage::failure(&kind_of(&e), e.to_string()));
                return;
            }
        };
        let affected = report.affected.clone();
        self.publish(next, &affected, Some(command), Some(report), out);
    }

    /// Solves `affected` canvases of `next`, streaming frames, then makes it current.
    fn publish(
        &mut self,
        mut next: Scene,
        affected: &[CanvasId],
        command: Option<ManipulationCommand>,
        report: Option<CommandReport>,
        out: Out,
    ) {
        let version = next.version;
        let stride = self.stride.max(1);
        let mut stopped = false;
        let solved = {
            let mut sink = |canvas_id: CanvasId, frame: &Frame| {
                if frame.converged || frame.tick_index.is_multiple_of(stride) {
                    let flow = out(ServerMessage::Frame { version, canvas_id, frame: frame.clone() });
                    stopped |= flow.is_break();
                    return flow;
                }
                ControlFlow::Continue(())
            };
            solve_canvases(&mut next, affected, &self.solver, &mut sink)
        };
        let statuses = match solved {
            Ok(s) => s,
            Err(e) => {
                let _ = out(ServerMessage::failure(&kind_of(&e), e.to_string()));
                return;
            }
        };
        self.scene = Some(next);
        self.remember_new_canvases();
        if let Some(scene) = &self.scene {
            self.layer.retain(|c| scene.canvas(*c).is_some());
        }
        if stopped {
            return;
        }
        let mut result = ServerMessage::success(version);
        if let ServerMessage::CommandResult { command: c, report: r, statuses: s, .. } = &mut result {
            *c = command;
            *r = report;
            *s = statuses;
        }
        if out(result).is_continue() {
            let _ = out(self.snapshot());
        }
    }

    fn canvas_op(&mut self, canvas_id: CanvasId, op: CanvasOpKind, out: Out) {
        let Some(scene) = self.scene.as_ref() else {
            let _ = out(ServerMessage::failure("NoScene", "no document loaded"));
            return;
        };
        let Some(pos) = scene.canvases.iter().position(|c| c.id == canvas_id) else {
            let _ = out(ServerMessage::failure("UnknownCanvas", format!("unknown canvas {canvas_id}")));
            return;
        };
        let mut next = scene.clone();
        let mut affected = Vec::new();
        match op {
            CanvasOpKind::ToggleConstraintLayer => {
                if !self.layer.remove(&canvas_id) {
                    self.layer.insert(canvas_id);
                }
                let _ = out(self.snapshot());
                return;
            }
            CanvasOpKind::Delete => {
                let gone = next.canvases.remove(pos);
                let points: std::collections::HashSet<_> = gone.points.iter().map(|p| p.id).collect();
                let objects: std::collections::HashSet<_> = gone.objects.iter().map(|o| o.id).collect();
                next.dormant_constraints.retain(|e| !e.constraint.points().iter().any(|p| points.contains(p)));
                next.group_memory.retain(|m| !m.ordered_object_ids.iter().any(|o| objects.contains(o)));
            }
            CanvasOpKind::Duplicate => {
                let mut ids = next.ids();
                let copy = duplicate_canvas(&next.canvases[pos], &mut ids);
                next.store_ids(ids);
                next.canvases.insert(pos + 1, copy);
            }
            CanvasOpKind::Reset => {
                let original = self.originals.get(&canvas_id).cloned().expect("published canvases are remembered");
                let elsewhere = next
                    .canvases
                    .iter()
                    .filter(|c| c.id != canvas_id)
                    .any(|c| original.objects.iter().any(|o| c.object(o.id).is_some()));
                if elsewhere {
                    let _ = out(ServerMessage::failure(
                        "ResetConflict",
                        "objects of this canvas now live on another canvas; move them back first",
                    ));
                    return;
                }
                next.canvases[pos] = original;
                affected.push(canvas_id);
            }
        }
        next.version += 1;
        let violations = validate_scene(&next);
        if !violations.is_empty() {
            let _ = out(ServerMessage::failure("Invalid", format!("{violations:?}")));
            return;
        }
        self.publish(next, &affected, None, None, out);
    }
}

/// A copy of `canvas` under fresh ids throughout.
pub fn duplicate_canvas(canvas: &Canvas, ids: &mut IdGen) -> Canvas {
    let points: HashMap<_, _> = canvas.points.iter().map(|p| (p.id, ids.point())).collect();
    let objects: HashMap<_, _> = canvas.objects.iter().map(|o| (o.id, ids.object())).collect();
    let sets: HashMap<_, _> = canvas.object_sets.iter().map(|s| (s.id, ids.set())).collect();
    let axes: HashMap<_, _> = canvas.axes.iter().map(|a| (a.id, ids.axis())).collect();
    let mut c = canvas.clone();
    c.id = ids.canvas();
    for p in &mut c.points {
        p.id = points[&p.id];
    }
    for o in &mut c.objects {
        o.id = objects[&o.id];
        for p in &mut o.control_point_ids {
            *p = points[p];
        }
    }
    for s in &mut c.object_sets {
        s.id = sets[&s.id];
        for o in &mut s.object_ids {
            *o = objects[o];
        }
    }
    for a in &mut c.axes {
        a.id = axes[&a.id];
    }
    c.constraints = canvas
        .constraints
        .iter()
        .map(|e| {
            let mut constraint = e.constraint.clone();
            match &mut constraint {
                Constraint::Gravity { point_id, .. } | Constraint::Support { point_id, .. } => *point_id = points[point_id],
                Constraint::FixedDistance { point_a_id, point_b_id, .. }
                | Constraint::CircleCollision { point_a_id, point_b_id, .. } => {
                    *point_a_id = points[point_a_id];
                    *point_b_id = points[point_b_id];
                }
                Constraint::AxisCollision { upper_id, lower_id, .. } => {
                    *upper_id = points[upper_id];
                    *lower_id = points[lower_id];
                }
            }
            ConstraintEntry { id: ids.constraint(), constraint }
        })
        .collect();
    c.collision_groups = canvas
        .collision_groups
        .iter()
        .map(|g| CollisionGroup {
            set_id: sets[&g.set_id],
            tick_index: g.tick_index,
            dim: g.dim,
            ordered_object_ids: g.ordered_object_ids.iter().map(|o| objects[o]).collect(),
        })
        .collect();
    c.baseline = canvas.baseline.as_ref().map(|b| Baseline {
        axis_id: axes[&b.axis_id],
        set_ids: b.set_ids.iter().filter_map(|s| sets.get(s).copied()).collect(),
        ..b.clone()
    });
    c
}
