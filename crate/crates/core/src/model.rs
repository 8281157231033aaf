//! Scene, canvas, visual objects, axes and constraints.
//!
//! Coordinates are screen pixels: `x` grows rightward, `y` grows downward.
//! Everything in a [`Scene`] is plain data; mutation happens through the
//! manipulation engine which always works on a cloned snapshot.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Current version of the scene document layout.
pub const SCHEMA_VERSION: u32 = 1;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(PointId, "p");
id_type!(ObjectId, "o");
id_type!(SetId, "s");
id_type!(AxisId, "a");
id_type!(ConstraintId, "k");
id_type!(CanvasId, "c");

/// Monotonic id source shared by every id kind of one scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdGen {
    next: u64,
}

impl IdGen {
    pub fn starting_at(next: u64) -> Self {
        Self { next: next.max(1) }
    }

    pub fn next_raw(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn point(&mut self) -> PointId {
        PointId(self.next_raw())
    }
    pub fn object(&mut self) -> ObjectId {
        ObjectId(self.next_raw())
    }
    pub fn set(&mut self) -> SetId {
        SetId(self.next_raw())
    }
    pub fn axis(&mut self) -> AxisId {
        AxisId(self.next_raw())
    }
    pub fn constraint(&mut self) -> ConstraintId {
        ConstraintId(self.next_raw())
    }
    pub fn canvas(&mut self) -> CanvasId {
        CanvasId(self.next_raw())
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    X,
    Y,
}

impl Dim {
    pub const BOTH: [Dim; 2] = [Dim::X, Dim::Y];

    pub fn index(self) -> usize {
        match self {
            Dim::X => 0,
            Dim::Y => 1,
        }
    }

    pub fn other(self) -> Dim {
        match self {
            Dim::X => Dim::Y,
            Dim::Y => Dim::X,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dim::X => "x",
            Dim::Y => "y",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ControlPoint {
    pub id: PointId,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

impl ControlPoint {
    pub fn new(id: PointId, x: f64, y: f64, r: f64) -> Self {
        Self { id, x, y, r, vx: 0.0, vy: 0.0 }
    }

    pub fn pos(&self, dim: Dim) -> f64 {
        match dim {
            Dim::X => self.x,
            Dim::Y => self.y,
        }
    }

    pub fn set_pos(&mut self, dim: Dim, value: f64) {
        match dim {
            Dim::X => self.x = value,
            Dim::Y => self.y = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Point,
    Line,
    Area,
}

/// 8-bit RGBA color; serialized as `#rrggbbaa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rgba(pub [u8; 4]);

impl Rgba {
    pub const BLACK: Rgba = Rgba([0, 0, 0, 255]);

    pub fn with_alpha_factor(self, factor: f64) -> Rgba {
        let [r, g, b, a] = self.0;
        let scaled = (a as f64 * factor.clamp(0.0, 1.0)).round() as u8;
        Rgba([r, g, b, scaled])
    }

    pub fn to_hex(self) -> String {
        let [r, g, b, a] = self.0;
        format!("#{r:02x}{g:02x}{b:02x}{a:02x}")
    }

    pub fn rgb_hex(self) -> String {
        let [r, g, b, _] = self.0;
        format!("#{r:02x}{g:02x}{b:02x}")
    }

    pub fn alpha_fraction(self) -> f64 {
        self.0[3] as f64 / 255.0
    }
}

impl fmt::Display for Rgba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid color literal `{0}`")]
pub struct ColorParseError(pub String);

impl FromStr for Rgba {
    type Err = ColorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').ok_or_else(|| ColorParseError(s.to_string()))?;
        let byte = |i: usize| {
            hex.get(i..i + 2)
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .ok_or_else(|| ColorParseError(s.to_string()))
        };
        match hex.len() {
            6 => Ok(Rgba([byte(0)?, byte(2)?, byte(4)?, 255])),
            8 => Ok(Rgba([byte(0)?, byte(2)?, byte(4)?, byte(6)?])),
            _ => Err(ColorParseError(s.to_string())),
        }
    }
}

impl Serialize for Rgba {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Rgba {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Presentation attributes carried over from the source document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StyleRecord {
    pub fill: Option<Rgba>,
    pub stroke: Option<Rgba>,
    pub stroke_width: f64,
    pub opacity: f64,
}

impl Default for StyleRecord {
    fn default() -> Self {
        Self { fill: Some(Rgba::BLACK), stroke: None, stroke_width: 1.0, opacity: 1.0 }
    }
}

impl StyleRecord {
    /// Coarse class used for set grouping: whether the mark is filled and/or stroked.
    pub fn class(&self) -> (bool, bool) {
        (self.fill.is_some(), self.stroke.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisualObject {
    pub id: ObjectId,
    pub kind: ObjectKind,
    pub control_point_ids: Vec<PointId>,
    pub style: StyleRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisualObjectSet {
    pub id: SetId,
    pub kind: ObjectKind,
    pub object_ids: Vec<ObjectId>,
    /// Point sets only: members are kept apart by pairwise circle collisions,
    /// discovered at solve time rather than stored as explicit constraints.
    #[serde(default)]
    pub collision_governed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    /// The coordinate an axis with this orientation measures.
    pub fn dim(self) -> Dim {
        match self {
            Orientation::Horizontal => Dim::X,
            Orientation::Vertical => Dim::Y,
        }
    }

    pub fn measuring(dim: Dim) -> Self {
        match dim {
            Dim::X => Orientation::Horizontal,
            Dim::Y => Orientation::Vertical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tick {
    pub position: f64,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ValueKind {
    Numeric,
    /// Values are days since 1970-01-01.
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CategoryEntry {
    pub label: String,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ScaleSpec {
    /// `px = slope * value + intercept`.
    Linear { slope: f64, intercept: f64, value_kind: ValueKind },
    Categorical { categories: Vec<CategoryEntry> },
}

impl ScaleSpec {
    pub fn to_px(&self, value: f64) -> Option<f64> {
        match self {
            ScaleSpec::Linear { slope, intercept, .. } => Some(slope * value + intercept),
            ScaleSpec::Categorical { .. } => None,
        }
    }

    pub fn to_value(&self, px: f64) -> Option<f64> {
        match self {
            ScaleSpec::Linear { slope, intercept, .. } if *slope != 0.0 => {
                Some((px - intercept) / slope)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Axis {
    pub id: AxisId,
    pub orientation: Orientation,
    pub axis_kind: AxisKind,
    /// Coordinate of the axis line along its perpendicular.
    pub baseline_position: f64,
    /// Start and end of the axis line along its own direction.
    pub extent: [f64; 2],
    pub ticks: Vec<Tick>,
    pub scale: ScaleSpec,
}

impl Axis {
    pub fn dim(&self) -> Dim {
        self.orientation.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SupportOp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl SupportOp {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            SupportOp::Le => value <= threshold,
            SupportOp::Ge => value >= threshold,
        }
    }

    /// Sign of the allowed side: `-1` for `<=`, `+1` for `>=`.
    pub fn sign(self) -> f64 {
        match self {
            SupportOp::Le => -1.0,
            SupportOp::Ge => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Constraint {
    /// Attracts `point[dim]` toward `d`.
    Gravity { point_id: PointId, dim: Dim, d: f64 },
    /// Satisfied iff `point[dim] op d`.
    Support { point_id: PointId, dim: Dim, d: f64, op: SupportOp },
    /// Enforces `a[dim] - b[dim] = d`.
    FixedDistance { point_a_id: PointId, point_b_id: PointId, dim: Dim, d: f64 },
    /// Enforces `upper[dim] - lower[dim] >= d`; "upper" is the point with the
    /// larger coordinate along `dim`.
    AxisCollision { upper_id: PointId, lower_id: PointId, dim: Dim, d: f64 },
    /// Enforces Euclidean distance `>= d`.
    CircleCollision { point_a_id: PointId, point_b_id: PointId, d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ConstraintClass {
    Gravity,
    Support,
    Fixed,
    Collision,
}

impl Constraint {
    pub fn points(&self) -> Vec<PointId> {
        match *self {
            Constraint::Gravity { point_id, .. } | Constraint::Support { point_id, .. } => {
                vec![point_id]
            }
            Constraint::FixedDistance { point_a_id, point_b_id, .. }
            | Constraint::CircleCollision { point_a_id, point_b_id, .. } => {
                vec![point_a_id, point_b_id]
            }
            Constraint::AxisCollision { upper_id, lower_id, .. } => vec![upper_id, lower_id],
        }
    }

    pub fn d(&self) -> f64 {
        match *self {
            Constraint::Gravity { d, .. }
            | Constraint::Support { d, .. }
            | Constraint::FixedDistance { d, .. }
            | Constraint::AxisCollision { d, .. }
            | Constraint::CircleCollision { d, .. } => d,
        }
    }

    pub fn dim(&self) -> Option<Dim> {
        match *self {
            Constraint::Gravity { dim, .. }
            | Constraint::Support { dim, .. }
            | Constraint::FixedDistance { dim, .. }
            | Constraint::AxisCollision { dim, .. } => Some(dim),
            Constraint::CircleCollision { .. } => None,
        }
    }

    pub fn class(&self) -> ConstraintClass {
        match self {
            Constraint::Gravity { .. } => ConstraintClass::Gravity,
            Constraint::Support { .. } => ConstraintClass::Support,
            Constraint::FixedDistance { .. } => ConstraintClass::Fixed,
            Constraint::AxisCollision { .. } | Constraint::CircleCollision { .. } => {
                ConstraintClass::Collision
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintEntry {
    pub id: ConstraintId,
    #[serde(flatten)]
    pub constraint: Constraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollisionGroup {
    pub set_id: SetId,
    pub tick_index: usize,
    pub dim: Dim,
    /// Bottom (closest to the baseline) or left member first.
    pub ordered_object_ids: Vec<ObjectId>,
}

/// The axis exerting gravity and support on a stacked object set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Baseline {
    pub axis_id: AxisId,
    /// Coordinate perpendicular to the baseline (`y` for a horizontal axis).
    pub dim: Dim,
    pub position: f64,
    /// Side of the baseline where data lives, as a support op on `dim`.
    pub data_side: SupportOp,
    /// Tick-area centers along the baseline direction.
    pub tick_positions: Vec<f64>,
    /// Object sets stacked on this baseline.
    pub set_ids: Vec<SetId>,
}

impl Baseline {
    pub fn tick_dim(&self) -> Dim {
        self.dim.other()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self { x, y, width, height }
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && px <= self.x + self.width && py >= self.y && py <= self.y + self.height
    }

    pub fn extent(&self, dim: Dim) -> (f64, f64) {
        match dim {
            Dim::X => (self.x, self.x + self.width),
            Dim::Y => (self.y, self.y + self.height),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Canvas {
    pub id: CanvasId,
    pub bounds: Rect,
    pub points: Vec<ControlPoint>,
    pub objects: Vec<VisualObject>,
    pub object_sets: Vec<VisualObjectSet>,
    pub axes: Vec<Axis>,
    pub constraints: Vec<ConstraintEntry>,
    pub collision_groups: Vec<CollisionGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Baseline>,
}

impl Canvas {
    pub fn empty(id: CanvasId, bounds: Rect) -> Self {
        Self {
            id,
            bounds,
            points: Vec::new(),
            objects: Vec::new(),
            object_sets: Vec::new(),
            axes: Vec::new(),
            constraints: Vec::new(),
            collision_groups: Vec::new(),
            baseline: None,
        }
    }

    pub fn point_index(&self) -> HashMap<PointId, usize> {
        self.points.iter().enumerate().map(|(i, p)| (p.id, i)).collect()
    }

    pub fn point(&self, id: PointId) -> Option<&ControlPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn object(&self, id: ObjectId) -> Option<&VisualObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn set(&self, id: SetId) -> Option<&VisualObjectSet> {
        self.object_sets.iter().find(|s| s.id == id)
    }

    pub fn axis(&self, id: AxisId) -> Option<&Axis> {
        self.axes.iter().find(|a| a.id == id)
    }

    pub fn set_of(&self, object: ObjectId) -> Option<&VisualObjectSet> {
        self.object_sets.iter().find(|s| s.object_ids.contains(&object))
    }

    /// Axis-aligned bounds of an object's control points (radius included).
    pub fn object_bounds(&self, object: &VisualObject) -> Option<Bounds> {
        let index = self.point_index();
        let mut bounds: Option<Bounds> = None;
        for pid in &object.control_point_ids {
            let p = &self.points[*index.get(pid)?];
            let b = Bounds { min: [p.x - p.r, p.y - p.r], max: [p.x + p.r, p.y + p.r] };
            bounds = Some(match bounds {
                Some(acc) => acc.union(&b),
                None => b,
            });
        }
        bounds
    }

    pub fn object_of_point(&self) -> HashMap<PointId, ObjectId> {
        let mut map = HashMap::new();
        for o in &self.objects {
            for p in &o.control_point_ids {
                map.insert(*p, o.id);
            }
        }
        map
    }

    /// Constraint classes acting on the canvas, counting collision-governed
    /// point sets as collision even though their pairs are implicit.
    pub fn classes_present(&self) -> std::collections::BTreeSet<ConstraintClass> {
        let mut out: std::collections::BTreeSet<_> = self.constraints.iter().map(|c| c.constraint.class()).collect();
        if self.object_sets.iter().any(|s| s.collision_governed) {
            out.insert(ConstraintClass::Collision);
        }
        out
    }

    pub fn count_by_class(&self) -> BTreeMap<ConstraintClass, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.constraints {
            *counts.entry(c.constraint.class()).or_insert(0) += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn union(&self, other: &Bounds) -> Bounds {
        Bounds {
            min: [self.min[0].min(other.min[0]), self.min[1].min(other.min[1])],
            max: [self.max[0].max(other.max[0]), self.max[1].max(other.max[1])],
        }
    }

    pub fn center(&self, dim: Dim) -> f64 {
        let i = dim.index();
        0.5 * (self.min[i] + self.max[i])
    }

    pub fn size(&self, dim: Dim) -> f64 {
        let i = dim.index();
        self.max[i] - self.min[i]
    }

    pub fn lo(&self, dim: Dim) -> f64 {
        self.min[dim.index()]
    }

    pub fn hi(&self, dim: Dim) -> f64 {
        self.max[dim.index()]
    }
}

/// Full ordering of a collision group remembered when objects leave a canvas,
/// so the group can be rebuilt in its original order if they come back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupMemory {
    pub set_id: SetId,
    pub tick_index: usize,
    pub dim: Dim,
    pub ordered_object_ids: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scene {
    pub schema_version: u32,
    pub version: u64,
    pub next_id: u64,
    pub canvases: Vec<Canvas>,
    /// Constraints whose points were split across canvases; revived once all
    /// their points share a canvas again.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dormant_constraints: Vec<ConstraintEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group_memory: Vec<GroupMemory>,
}

impl Default for Scene {
    fn default() -> Self {
        Self::empty()
    }
}

impl Scene {
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            version: 0,
            next_id: 1,
            canvases: Vec::new(),
            dormant_constraints: Vec::new(),
            group_memory: Vec::new(),
        }
    }

    pub fn ids(&self) -> IdGen {
        IdGen::starting_at(self.next_id)
    }

    pub fn store_ids(&mut self, ids: IdGen) {
        self.next_id = self.next_id.max(ids.peek());
    }

    pub fn canvas(&self, id: CanvasId) -> Option<&Canvas> {
        self.canvases.iter().find(|c| c.id == id)
    }

    pub fn canvas_mut(&mut self, id: CanvasId) -> Option<&mut Canvas> {
        self.canvases.iter_mut().find(|c| c.id == id)
    }

    pub fn canvas_of_object(&self, id: ObjectId) -> Option<CanvasId> {
        self.canvases.iter().find(|c| c.object(id).is_some()).map(|c| c.id)
    }

    pub fn canvas_of_set(&self, id: SetId) -> Option<CanvasId> {
        self.canvases.iter().find(|c| c.set(id).is_some()).map(|c| c.id)
    }

    pub fn canvas_of_axis(&self, id: AxisId) -> Option<CanvasId> {
        self.canvases.iter().find(|c| c.axis(id).is_some()).map(|c| c.id)
    }
}

/// One invariant violation found by [`validate_scene`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Violation {
    DuplicateCanvasId { canvas_id: CanvasId },
    DuplicateId { canvas_id: CanvasId, id: u64 },
    NonFinitePoint { canvas_id: CanvasId, point_id: PointId },
    NegativeRadius { canvas_id: CanvasId, point_id: PointId },
    RadiusOnLineOrArea { canvas_id: CanvasId, object_id: ObjectId, point_id: PointId },
    BadArity { canvas_id: CanvasId, object_id: ObjectId, kind: ObjectKind, count: usize },
    DanglingPointRef { canvas_id: CanvasId, owner: String, point_id: PointId },
    DanglingObjectRef { canvas_id: CanvasId, owner: String, object_id: ObjectId },
    SharedPoint { canvas_id: CanvasId, point_id: PointId },
    SetKindMismatch { canvas_id: CanvasId, set_id: SetId, object_id: ObjectId },
    EmptySet { canvas_id: CanvasId, set_id: SetId },
    NonFiniteConstraint { canvas_id: CanvasId, constraint_id: ConstraintId },
    SelfReference { canvas_id: CanvasId, constraint_id: ConstraintId },
    TickOrder { canvas_id: CanvasId, axis_id: AxisId },
    EmptyTickLabel { canvas_id: CanvasId, axis_id: AxisId, index: usize },
    TickValueMismatch { canvas_id: CanvasId, axis_id: AxisId, index: usize },
    NonInvertibleScale { canvas_id: CanvasId, axis_id: AxisId },
    GroupOutsideSet { canvas_id: CanvasId, set_id: SetId, object_id: ObjectId },
    GroupDuplicateMember { canvas_id: CanvasId, set_id: SetId, object_id: ObjectId },
    DanglingAxisRef { canvas_id: CanvasId, axis_id: AxisId },
}

/// Returns every invariant violation; an empty list means the scene is well-formed.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut canvas_ids = BTreeSet::new();
    for canvas in &scene.canvases {
        if !canvas_ids.insert(canvas.id) {
            out.push(Violation::DuplicateCanvasId { canvas_id: canvas.id });
        }
        check_canvas(canvas, &mut out);
    }
    out
}

/// Violations confined to one canvas.
pub fn validate_canvas(canvas: &Canvas) -> Vec<Violation> {
    let mut out = Vec::new();
    check_canvas(canvas, &mut out);
    out
}

fn check_canvas(canvas: &Canvas, out: &mut Vec<Violation>) {
    let cid = canvas.id;
    let mut seen = BTreeSet::new();
    let mut dup = |id: u64, out: &mut Vec<Violation>| {
        if !seen.insert(id) {
            out.push(Violation::DuplicateId { canvas_id: cid, id });
        }
    };
    for p in &canvas.points {
        dup(p.id.0, out);
    }
    for o in &canvas.objects {
        dup(o.id.0, out);
    }
    for s in &canvas.object_sets {
        dup(s.id.0, out);
    }
    for a in &canvas.axes {
        dup(a.id.0, out);
    }
    for c in &canvas.constraints {
        dup(c.id.0, out);
    }

    let points: HashMap<PointId, &ControlPoint> = canvas.points.iter().map(|p| (p.id, p)).collect();
    for p in &canvas.points {
        if ![p.x, p.y, p.vx, p.vy, p.r].iter().all(|v| v.is_finite()) {
            out.push(Violation::NonFinitePoint { canvas_id: cid, point_id: p.id });
        }
        if p.r < 0.0 {
            out.push(Violation::NegativeRadius { canvas_id: cid, point_id: p.id });
        }
    }

    let mut owner_of_point: HashMap<PointId, ObjectId> = HashMap::new();
    for o in &canvas.objects {
        let n = o.control_point_ids.len();
        let arity_ok = match o.kind {
            ObjectKind::Point => n == 1,
            ObjectKind::Line => n >= 2,
            ObjectKind::Area => n >= 3,
        };
        if !arity_ok {
            out.push(Violation::BadArity { canvas_id: cid, object_id: o.id, kind: o.kind, count: n });
        }
        for pid in &o.control_point_ids {
            match points.get(pid) {
                None => out.push(Violation::DanglingPointRef {
                    canvas_id: cid,
                    owner: o.id.to_string(),
                    point_id: *pid,
                }),
                Some(p) => {
                    if o.kind != ObjectKind::Point && p.r != 0.0 {
                        out.push(Violation::RadiusOnLineOrArea {
                            canvas_id: cid,
                            object_id: o.id,
                            point_id: *pid,
                        });
                    }
                }
            }
            if owner_of_point.insert(*pid, o.id).is_some() {
                out.push(Violation::SharedPoint { canvas_id: cid, point_id: *pid });
            }
        }
    }

    let objects: HashMap<ObjectId, &VisualObject> = canvas.objects.iter().map(|o| (o.id, o)).collect();
    for s in &canvas.object_sets {
        if s.object_ids.is_empty() {
            out.push(Violation::EmptySet { canvas_id: cid, set_id: s.id });
        }
        for oid in &s.object_ids {
            match objects.get(oid) {
                None => out.push(Violation::DanglingObjectRef {
                    canvas_id: cid,
                    owner: s.id.to_string(),
                    object_id: *oid,
                }),
                Some(o) if o.kind != s.kind => out.push(Violation::SetKindMismatch {
                    canvas_id: cid,
                    set_id: s.id,
                    object_id: *oid,
                }),
                Some(_) => {}
            }
        }
    }

    for a in &canvas.axes {
        let monotonic = a.ticks.windows(2).all(|w| w[1].position > w[0].position)
            || a.ticks.windows(2).all(|w| w[1].position < w[0].position);
        if !monotonic {
            out.push(Violation::TickOrder { canvas_id: cid, axis_id: a.id });
        }
        for (i, t) in a.ticks.iter().enumerate() {
            if t.label.trim().is_empty() {
                out.push(Violation::EmptyTickLabel { canvas_id: cid, axis_id: a.id, index: i });
            }
            if t.value.is_some() != (a.axis_kind == AxisKind::Continuous) {
                out.push(Violation::TickValueMismatch { canvas_id: cid, axis_id: a.id, index: i });
            }
        }
        let invertible = match (&a.axis_kind, &a.scale) {
            (AxisKind::Continuous, ScaleSpec::Linear { slope, intercept, .. }) => {
                slope.is_finite() && *slope != 0.0 && intercept.is_finite()
            }
            (AxisKind::Discrete, ScaleSpec::Categorical { .. }) => true,
            _ => false,
        };
        if !invertible {
            out.push(Violation::NonInvertibleScale { canvas_id: cid, axis_id: a.id });
        }
    }
    if let Some(b) = &canvas.baseline {
        if canvas.axis(b.axis_id).is_none() {
            out.push(Violation::DanglingAxisRef { canvas_id: cid, axis_id: b.axis_id });
        }
    }

    for entry in &canvas.constraints {
        let c = &entry.constraint;
        for pid in c.points() {
            if !points.contains_key(&pid) {
                out.push(Violation::DanglingPointRef {
                    canvas_id: cid,
                    owner: entry.id.to_string(),
                    point_id: pid,
                });
            }
        }
        if !c.d().is_finite() {
            out.push(Violation::NonFiniteConstraint { canvas_id: cid, constraint_id: entry.id });
        }
        let pts = c.points();
        if pts.len() == 2 && pts[0] == pts[1] {
            out.push(Violation::SelfReference { canvas_id: cid, constraint_id: entry.id });
        }
    }

    for g in &canvas.collision_groups {
        let set = canvas.set(g.set_id);
        let mut members = BTreeSet::new();
        for oid in &g.ordered_object_ids {
            if !members.insert(*oid) {
                out.push(Violation::GroupDuplicateMember {
                    canvas_id: cid,
                    set_id: g.set_id,
                    object_id: *oid,
                });
            }
            if !set.is_some_and(|s| s.object_ids.contains(oid)) {
                out.push(Violation::GroupOutsideSet { canvas_id: cid, set_id: g.set_id, object_id: *oid });
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("scene is not well-formed ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("scene document parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("scene document is not UTF-8 (byte {offset})")]
    Encoding { offset: usize },
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
}

/// Serializes a well-formed scene to its JSON document form.
pub fn serialize_scene(scene: &Scene) -> Result<Vec<u8>, DocumentError> {
    let violations = validate_scene(scene);
    if !violations.is_empty() {
        return Err(DocumentError::Invalid(violations));
    }
    Ok(serde_json::to_vec_pretty(scene).expect("scene serialization is infallible"))
}

pub fn deserialize_scene(bytes: &[u8]) -> Result<Scene, DocumentError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| DocumentError::Encoding { offset: e.valid_up_to() })?;
    let scene: Scene = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if scene.schema_version != SCHEMA_VERSION {
        return Err(DocumentError::SchemaVersion { found: scene.schema_version });
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_canvas() -> Canvas {
        let mut c = Canvas::empty(CanvasId(1), Rect::new(0.0, 0.0, 100.0, 100.0));
        c.points.push(ControlPoint::new(PointId(2), 10.0, 20.0, 5.0));
        c.objects.push(VisualObject {
            id: ObjectId(3),
            kind: ObjectKind::Point,
            control_point_ids: vec![PointId(2)],
            style: StyleRecord::default(),
        });
        c.object_sets.push(VisualObjectSet {
            id: SetId(4),
            kind: ObjectKind::Point,
            object_ids: vec![ObjectId(3)],
            collision_governed: false,
        });
        c
    }

    #[test]
    fn empty_scene_is_valid() {
        assert!(validate_scene(&Scene::empty()).is_empty());
    }

    #[test]
    fn dangling_gravity_is_reported() {
        let mut scene = Scene::empty();
        let mut c = tiny_canvas();
        c.constraints.push(ConstraintEntry {
            id: ConstraintId(9),
            constraint: Constraint::Gravity { point_id: PointId(77), dim: Dim::X, d: 1.0 },
        });
        scene.canvases.push(c);
        let v = validate_scene(&scene);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::DanglingPointRef { point_id: PointId(77), .. }));
    }

    #[test]
    fn radius_on_line_point_is_reported() {
        let mut scene = Scene::empty();
        let mut c = tiny_canvas();
        c.points.push(ControlPoint::new(PointId(10), 0.0, 0.0, 2.0));
        c.points.push(ControlPoint::new(PointId(11), 5.0, 0.0, 0.0));
        c.objects.push(VisualObject {
            id: ObjectId(12),
            kind: ObjectKind::Line,
            control_point_ids: vec![PointId(10), PointId(11)],
            style: StyleRecord::default(),
        });
        scene.canvases.push(c);
        let v = validate_scene(&scene);
        assert!(matches!(v.as_slice(), [Violation::RadiusOnLineOrArea { point_id: PointId(10), .. }]));
    }

    #[test]
    fn fixed_self_reference_is_reported() {
        let mut scene = Scene::empty();
        let mut c = tiny_canvas();
        c.constraints.push(ConstraintEntry {
            id: ConstraintId(20),
            constraint: Constraint::FixedDistance {
                point_a_id: PointId(2),
                point_b_id: PointId(2),
                dim: Dim::X,
                d: 0.0,
            },
        });
        scene.canvases.push(c);
        assert!(matches!(validate_scene(&scene).as_slice(), [Violation::SelfReference { .. }]));
    }

    #[test]
    fn empty_round_trip() {
        let scene = Scene::empty();
        let bytes = serialize_scene(&scene).unwrap();
        assert_eq!(deserialize_scene(&bytes).unwrap(), scene);
    }

    #[test]
    fn truncated_document_is_a_positioned_parse_error() {
        let mut scene = Scene::empty();
        scene.canvases.push(tiny_canvas());
        let bytes = serialize_scene(&scene).unwrap();
        let err = deserialize_scene(&bytes[..bytes.len() / 2]).unwrap_err();
        match err {
            DocumentError::Parse { line, column, .. } => assert!(line > 1 && column > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constraint_json_shape() {
        let entry = ConstraintEntry {
            id: ConstraintId(5),
            constraint: Constraint::Support { point_id: PointId(1), dim: Dim::Y, d: 300.0, op: SupportOp::Le },
        };
        let json = serde_json::to_value(&entry).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"id": 5, "type": "support", "pointId": 1, "dim": "y", "d": 300.0, "op": "<="})
        );
    }

    #[test]
    fn color_hex_round_trip() {
        let c: Rgba = "#1f77b4ff".parse().unwrap();
        assert_eq!(c.0, [0x1f, 0x77, 0xb4, 0xff]);
        assert_eq!(c.to_hex(), "#1f77b4ff");
        assert!("1f77b4".parse::<Rgba>().is_err());
    }
}
