//! Per-tick constraint relaxation and the solve loop around it.

mod quadtree;

pub use quadtree::{brute_force_overlaps, quadtree_overlaps, QuadTree};

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_canvas, Canvas, Constraint, ConstraintId, ObjectKind, PointId, SupportOp, Violation,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverConfig {
    pub alpha0: f64,
    pub alpha_decay_factor: f64,
    pub alpha_min: f64,
    /// Fraction of velocity retained from one tick to the next.
    pub velocity_decay: f64,
    pub max_iterations: usize,
    /// Max per-point displacement (px) under which a tick counts as converged.
    pub convergence_epsilon: f64,
    /// Hard-constraint projection stops once its largest correction is below this.
    pub projection_tolerance: f64,
    pub projection_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            alpha_decay_factor: 0.9772,
            alpha_min: 0.001,
            velocity_decay: 0.6,
            max_iterations: 1000,
            convergence_epsilon: 0.05,
            projection_tolerance: 1e-9,
            projection_sweeps: 200,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("alpha decay factor must lie in (0, 1), got {0}")]
    AlphaDecay(f64),
    #[error("convergence epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error("velocity decay must lie in [0, 1], got {0}")]
    VelocityDecay(f64),
}

impl SolverConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        if !(self.alpha_decay_factor > 0.0 && self.alpha_decay_factor < 1.0) {
            return Err(ConfigError::AlphaDecay(self.alpha_decay_factor));
        }
        if !(self.convergence_epsilon > 0.0) {
            return Err(ConfigError::Epsilon(self.convergence_epsilon));
        }
        if !(0.0..=1.0).contains(&self.velocity_decay) {
            return Err(ConfigError::VelocityDecay(self.velocity_decay));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CirclePairTrace {
    pub point_a_id: PointId,
    pub point_b_id: PointId,
    pub residual: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverStepTrace {
    /// Predicted residual of each explicit constraint when it was visited.
    pub residuals: Vec<(ConstraintId, f64)>,
    /// Circle pairs that were overlapping this tick.
    pub circle_pairs: Vec<CirclePairTrace>,
    pub max_displacement: f64,
    pub alpha: f64,
    pub projection_sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Frame {
    pub tick_index: usize,
    pub points: Vec<(PointId, f64, f64)>,
    pub alpha: f64,
    pub converged: bool,
}

impl Frame {
    /// One record of the newline-delimited frame stream.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("frame serialization is infallible")
    }
}

/// Receives frames while a solve runs; returning `Break` cancels the solve.
pub trait FrameSink {
    fn frame(&mut self, frame: &Frame) -> ControlFlow<()>;
}

impl<F: FnMut(&Frame) -> ControlFlow<()>> FrameSink for F {
    fn frame(&mut self, frame: &Frame) -> ControlFlow<()> {
        self(frame)
    }
}

/// Discards frames.
pub struct NoFrames;

impl FrameSink for NoFrames {
    fn frame(&mut self, _: &Frame) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("non-finite value while relaxing{}", .constraint.map(|c| format!(" constraint {c}")).unwrap_or_default())]
    NumericalDivergence { constraint: Option<ConstraintId> },
    #[error("canvas violates model invariants ({} violations)", .0.len())]
    InvalidCanvas(Vec<Violation>),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolveStatus {
    Converged,
    /// Alpha fell below its floor before displacement dropped under epsilon.
    AlphaExhausted,
    NotConverged,
    Cancelled,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub canvas: Canvas,
    pub status: SolveStatus,
    pub ticks: usize,
}

/// Indexed view of a canvas's constraints, ordered by class then id.
struct System {
    ids: Vec<PointId>,
    gravity: Vec<(ConstraintId, usize, usize, f64)>,
    support: Vec<(ConstraintId, usize, usize, f64, SupportOp)>,
    fixed: Vec<(ConstraintId, usize, usize, usize, f64)>,
    collide: Vec<(ConstraintId, usize, usize, usize, f64)>,
    circles: Vec<(ConstraintId, usize, usize, f64)>,
    circle_sets: Vec<Vec<usize>>,
}

struct State {
    pos: Vec<[f64; 2]>,
    vel: Vec<[f64; 2]>,
    radius: Vec<f64>,
}

impl System {
    fn compile(canvas: &Canvas) -> Self {
        let index = canvas.point_index();
        let at = |id: &PointId| index[id];
        let mut entries: Vec<_> = canvas.constraints.iter().collect();
        entries.sort_by_key(|e| e.id);
        let mut sys = System {
            ids: canvas.points.iter().map(|p| p.id).collect(),
            gravity: Vec::new(),
            support: Vec::new(),
            fixed: Vec::new(),
            collide: Vec::new(),
            circles: Vec::new(),
            circle_sets: Vec::new(),
        };
        for e in entries {
            match &e.constraint {
                Constraint::Gravity { point_id, dim, d } => {
                    sys.gravity.push((e.id, at(point_id), dim.index(), *d))
                }
                Constraint::Support { point_id, dim, d, op } => {
                    sys.support.push((e.id, at(point_id), dim.index(), *d, *op))
                }
                Constraint::FixedDistance { point_a_id, point_b_id, dim, d } => {
                    sys.fixed.push((e.id, at(point_a_id), at(point_b_id), dim.index(), *d))
                }
                Constraint::AxisCollision { upper_id, lower_id, dim, d } => {
                    sys.collide.push((e.id, at(upper_id), at(lower_id), dim.index(), *d))
                }
                Constraint::CircleCollision { point_a_id, point_b_id, d } => {
                    sys.circles.push((e.id, at(point_a_id), at(point_b_id), *d))
                }
            }
        }
        let mut sets: Vec<_> = canvas
            .object_sets
            .iter()
            .filter(|s| s.collision_governed && s.kind == ObjectKind::Point)
            .collect();
        sets.sort_by_key(|s| s.id);
        for s in sets {
            let members: Vec<usize> = s
                .object_ids
                .iter()
                .filter_map(|o| canvas.object(*o))
                .flat_map(|o| o.control_point_ids.iter().map(|p| index[p]))
                .collect();
            if members.len() >= 2 {
                sys.circle_sets.push(members);
            }
        }
        sys
    }

    /// Overlapping pairs inside governed sets at the given centers, as
    /// `(i, j, d)` in point-index space.
    fn governed_pairs(&self, centers: &[[f64; 2]], radius: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for members in &self.circle_sets {
            let c: Vec<[f64; 2]> = members.iter().map(|&i| centers[i]).collect();
            let r: Vec<f64> = members.iter().map(|&i| radius[i]).collect();
            for (a, b) in QuadTree::build(&c, &r).overlaps() {
                let (i, j) = (members[a], members[b]);
                out.push((i, j, radius[i] + radius[j]));
            }
        }
        out
    }

    fn step(
        &self,
        st: &mut State,
        alpha: f64,
        config: &SolverConfig,
        mut trace: Option<&mut SolverStepTrace>,
    ) -> Result<f64, SolveError> {
        let start = st.pos.clone();
        for v in st.vel.iter_mut() {
            v[0] *= config.velocity_decay;
            v[1] *= config.velocity_decay;
        }

        for &(id, p, k, d) in &self.gravity {
            let eps = st.pos[p][k] + st.vel[p][k] - d;
            st.vel[p][k] -= eps * alpha;
            finite(st.vel[p][k], id)?;
            record(&mut trace, id, eps);
        }

        for &(id, p, k, d, op) in &self.support {
            let predicted = st.pos[p][k] + st.vel[p][k];
            let violated = !op.holds(predicted, d);
            if violated {
                st.pos[p][k] = d;
                st.vel[p][k] = 0.0;
            }
            record(&mut trace, id, if violated { predicted - d } else { 0.0 });
        }

        // The predicted residual decides whether a pair is active; the
        // positional correction uses the current residual so that already
        // satisfied geometry is not displaced by in-flight velocity.
        for &(id, a, b, k, d) in &self.fixed {
            let eps = st.pos[a][k] + st.vel[a][k] - st.pos[b][k] - st.vel[b][k] - d;
            let c = st.pos[a][k] - st.pos[b][k] - d;
            st.pos[a][k] -= c * 0.5;
            st.pos[b][k] += c * 0.5;
            let mean = 0.5 * (st.vel[a][k] + st.vel[b][k]);
            st.vel[a][k] = mean;
            st.vel[b][k] = mean;
            finite(st.pos[a][k] + st.pos[b][k] + mean, id)?;
            record(&mut trace, id, eps);
        }

        for &(id, a, b, k, d) in &self.collide {
            let eps = st.pos[a][k] + st.vel[a][k] - st.pos[b][k] - st.vel[b][k] - d;
            if eps < 0.0 {
                let c = (st.pos[a][k] - st.pos[b][k] - d).min(0.0);
                st.pos[a][k] -= c * 0.5;
                st.pos[b][k] += c * 0.5;
                let mean = 0.5 * (st.vel[a][k] + st.vel[b][k]);
                st.vel[a][k] = mean;
                st.vel[b][k] = mean;
                finite(st.pos[a][k] + st.pos[b][k] + mean, id)?;
            }
            record(&mut trace, id, eps);
        }

        let predicted: Vec<[f64; 2]> =
            st.pos.iter().zip(&st.vel).map(|(p, v)| [p[0] + v[0], p[1] + v[1]]).collect();
        let explicit = self.circles.iter().map(|&(id, a, b, d)| (Some(id), a, b, d));
        let lazy = self.governed_pairs(&predicted, &st.radius).into_iter().map(|(a, b, d)| (None, a, b, d));
        for (id, a, b, d) in explicit.chain(lazy) {
            let dx = st.pos[a][0] + st.vel[a][0] - st.pos[b][0] - st.vel[b][0];
            let dy = st.pos[a][1] + st.vel[a][1] - st.pos[b][1] - st.vel[b][1];
            let (ux, uy, dist) = direction(dx, dy, a, b);
            let eps = dist - d;
            if eps < 0.0 {
                let bias = circle_bias(st.radius[a], st.radius[b]);
                st.vel[a][0] -= eps * ux * bias;
                st.vel[a][1] -= eps * uy * bias;
                st.vel[b][0] += eps * ux * (1.0 - bias);
                st.vel[b][1] += eps * uy * (1.0 - bias);
                if !(st.vel[a][0] + st.vel[a][1] + st.vel[b][0] + st.vel[b][1]).is_finite() {
                    return Err(SolveError::NumericalDivergence { constraint: id });
                }
                if let Some(t) = trace.as_deref_mut() {
                    match id {
                        Some(id) => t.residuals.push((id, eps)),
                        None => t.circle_pairs.push(CirclePairTrace {
                            point_a_id: self.ids[a],
                            point_b_id: self.ids[b],
                            residual: eps,
                            bias,
                        }),
                    }
                }
            } else if let (Some(t), Some(id)) = (trace.as_deref_mut(), id) {
                t.residuals.push((id, eps));
            }
        }

        for (p, v) in st.pos.iter_mut().zip(&st.vel) {
            p[0] += v[0];
            p[1] += v[1];
        }

        let sweeps = self.project(st, config);
        let mut max_disp: f64 = 0.0;
        for (p, s) in st.pos.iter().zip(&start) {
            let disp = (p[0] - s[0]).hypot(p[1] - s[1]);
            if !disp.is_finite() {
                return Err(SolveError::NumericalDivergence { constraint: None });
            }
            max_disp = max_disp.max(disp);
        }
        if let Some(t) = trace {
            t.max_displacement = max_disp;
            t.alpha = alpha;
            t.projection_sweeps = sweeps;
        }
        Ok(max_disp)
    }

    /// Gauss-Seidel sweeps over the hard constraints after integration.
    fn project(&self, st: &mut State, config: &SolverConfig) -> usize {
        let sweeps = self.sweep(st, config);
        // Later corrections in a sweep may push a supported point back over by
        // less than the tolerance; supports are hard, so clamp once more.
        for &(_, p, k, d, op) in &self.support {
            if !op.holds(st.pos[p][k], d) {
                st.pos[p][k] = d;
            }
        }
        sweeps
    }

    fn sweep(&self, st: &mut State, config: &SolverConfig) -> usize {
        for sweep in 0..config.projection_sweeps {
            let mut worst: f64 = 0.0;
            for &(_, p, k, d, op) in &self.support {
                if !op.holds(st.pos[p][k], d) {
                    worst = worst.max((st.pos[p][k] - d).abs());
                    st.pos[p][k] = d;
                }
            }
            for &(_, a, b, k, d) in &self.fixed {
                let e = st.pos[a][k] - st.pos[b][k] - d;
                if e != 0.0 {
                    worst = worst.max(e.abs());
                    st.pos[a][k] -= e * 0.5;
                    st.pos[b][k] += e * 0.5;
                }
            }
            for &(_, a, b, k, d) in &self.collide {
                let e = st.pos[a][k] - st.pos[b][k] - d;
                if e < 0.0 {
                    worst = worst.max(-e);
                    st.pos[a][k] -= e * 0.5;
                    st.pos[b][k] += e * 0.5;
                }
            }
            let explicit = self.circles.iter().map(|&(_, a, b, d)| (a, b, d));
            let lazy = if self.circle_sets.is_empty() {
                Vec::new()
            } else {
                self.governed_pairs(&st.pos, &st.radius)
            };
            for (a, b, d) in explicit.chain(lazy) {
                let dx = st.pos[a][0] - st.pos[b][0];
                let dy = st.pos[a][1] - st.pos[b][1];
                let (ux, uy, dist) = direction(dx, dy, a, b);
                let overlap = d - dist;
                if overlap > 0.0 {
                    worst = worst.max(overlap);
                    let bias = circle_bias(st.radius[a], st.radius[b]);
                    st.pos[a][0] += overlap * ux * bias;
                    st.pos[a][1] += overlap * uy * bias;
                    st.pos[b][0] -= overlap * ux * (1.0 - bias);
                    st.pos[b][1] -= overlap * uy * (1.0 - bias);
                }
            }
            if worst < config.projection_tolerance {
                return sweep;
            }
        }
        config.projection_sweeps
    }
}

/// Share of a circle-pair correction taken by the first point.
pub fn circle_bias(r1: f64, r2: f64) -> f64 {
    let total = r1 * r1 + r2 * r2;
    if total > 0.0 {
        r1 * r1 / total
    } else {
        0.5
    }
}

/// Unit vector from b toward a; coincident centers separate along x, with
/// the lower index going left.
fn direction(dx: f64, dy: f64, a: usize, b: usize) -> (f64, f64, f64) {
    let dist = dx.hypot(dy);
    if dist > 1e-12 {
        (dx / dist, dy / dist, dist)
    } else if a < b {
        (-1.0, 0.0, 0.0)
    } else {
        (1.0, 0.0, 0.0)
    }
}

fn finite(value: f64, id: ConstraintId) -> Result<(), SolveError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SolveError::NumericalDivergence { constraint: Some(id) })
    }
}

fn record(trace: &mut Option<&mut SolverStepTrace>, id: ConstraintId, eps: f64) {
    if let Some(t) = trace.as_deref_mut() {
        t.residuals.push((id, eps));
    }
}

fn load(canvas: &Canvas) -> State {
    State {
        pos: canvas.points.iter().map(|p| [p.x, p.y]).collect(),
        vel: canvas.points.iter().map(|p| [p.vx, p.vy]).collect(),
        radius: canvas.points.iter().map(|p| p.r).collect(),
    }
}

fn store(canvas: &mut Canvas, st: &State) {
    for (i, p) in canvas.points.iter_mut().enumerate() {
        p.x = st.pos[i][0];
        p.y = st.pos[i][1];
        p.vx = st.vel[i][0];
        p.vy = st.vel[i][1];
    }
}

fn precheck(canvas: &Canvas, config: &SolverConfig) -> Result<(), SolveError> {
    config.check()?;
    let violations = validate_canvas(canvas);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidCanvas(violations))
    }
}

/// Runs one relaxation tick in place and reports the residuals it saw.
///
/// Velocity carried over from the previous tick is damped at the start of
/// this tick, so the velocity left on the canvas is the one just integrated.
pub fn tick_step(canvas: &mut Canvas, alpha: f64, config: &SolverConfig) -> Result<SolverStepTrace, SolveError> {
    precheck(canvas, config)?;
    let sys = System::compile(canvas);
    let mut st = load(canvas);
    let mut trace = SolverStepTrace::default();
    sys.step(&mut st, alpha, config, Some(&mut trace))?;
    store(canvas, &st);
    Ok(trace)
}

/// Iterates ticks until displacement or alpha falls below its threshold.
/// Velocities are zeroed on return so the canvas is a rest state.
pub fn solve(canvas: &Canvas, config: &SolverConfig, sink: &mut dyn FrameSink) -> Result<SolveOutcome, SolveError> {
    precheck(canvas, config)?;
    let sys = System::compile(canvas);
    let mut st = load(canvas);
    let mut out = canvas.clone();
    let mut alpha = config.alpha0;
    let mut status = SolveStatus::NotConverged;
    let mut ticks = 0;

    for tick in 0..config.max_iterations {
        let disp = sys.step(&mut st, alpha, config, None)?;
        ticks = tick + 1;
        let converged = disp < config.convergence_epsilon;
        let frame = Frame {
            tick_index: tick,
            points: sys.ids.iter().zip(&st.pos).map(|(id, p)| (*id, p[0], p[1])).collect(),
            alpha,
            converged,
        };
        if sink.frame(&frame).is_break() {
            status = SolveStatus::Cancelled;
            break;
        }
        if converged {
            status = SolveStatus::Converged;
            break;
        }
        alpha *= config.alpha_decay_factor;
        if alpha < config.alpha_min {
            status = SolveStatus::AlphaExhausted;
            break;
        }
    }

    for v in st.vel.iter_mut() {
        *v = [0.0, 0.0];
    }
    store(&mut out, &st);
    Ok(SolveOutcome { canvas: out, status, ticks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        CanvasId, ConstraintEntry, ControlPoint, Dim, ObjectId, Rect, SetId, StyleRecord, VisualObject,
        VisualObjectSet,
    };

    fn canvas_with(points: &[(f64, f64, f64)], constraints: Vec<Constraint>) -> Canvas {
        let mut c = Canvas::empty(CanvasId(1000), Rect::new(0.0, 0.0, 500.0, 500.0));
        for (i, &(x, y, r)) in points.iter().enumerate() {
            c.points.push(ControlPoint::new(PointId(i as u64 + 1), x, y, r));
        }
        for (i, k) in constraints.into_iter().enumerate() {
            c.constraints.push(ConstraintEntry { id: ConstraintId(100 + i as u64), constraint: k });
        }
        c
    }

    fn bubbles(points: &[(f64, f64, f64)]) -> Canvas {
        let mut c = canvas_with(points, vec![]);
        let mut ids = Vec::new();
        for (i, p) in c.points.clone().iter().enumerate() {
            let oid = ObjectId(500 + i as u64);
            c.objects.push(VisualObject {
                id: oid,
                kind: ObjectKind::Point,
                control_point_ids: vec![p.id],
                style: StyleRecord::default(),
            });
            ids.push(oid);
        }
        c.object_sets.push(VisualObjectSet {
            id: SetId(900),
            kind: ObjectKind::Point,
            object_ids: ids,
            collision_governed: true,
        });
        c
    }

    #[test]
    fn gravity_at_target_leaves_velocity_alone() {
        let mut c = canvas_with(&[(10.0, 0.0, 0.0)], vec![Constraint::Gravity { point_id: PointId(1), dim: Dim::X, d: 10.0 }]);
        let trace = tick_step(&mut c, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(trace.residuals, vec![(ConstraintId(100), 0.0)]);
        assert_eq!(c.points[0].vx, 0.0);
        assert_eq!(c.points[0].x, 10.0);
    }

    #[test]
    fn gravity_velocity_update() {
        let mut c = canvas_with(&[(12.0, 0.0, 0.0)], vec![Constraint::Gravity { point_id: PointId(1), dim: Dim::X, d: 10.0 }]);
        tick_step(&mut c, 0.3, &SolverConfig::default()).unwrap();
        assert!((c.points[0].vx + 0.6).abs() < 1e-12);
        assert!((c.points[0].x - 11.4).abs() < 1e-12);
    }

    #[test]
    fn support_on_allowed_side_is_untouched() {
        let mut c = canvas_with(
            &[(0.0, 305.0, 0.0)],
            vec![Constraint::Support { point_id: PointId(1), dim: Dim::Y, d: 300.0, op: SupportOp::Ge }],
        );
        c.points[0].vy = 5.0;
        let config = SolverConfig { velocity_decay: 1.0, ..SolverConfig::default() };
        tick_step(&mut c, 1.0, &config).unwrap();
        assert!((c.points[0].y - 310.0).abs() < 1e-9);
        assert!((c.points[0].vy - 5.0).abs() < 1e-9);
    }

    #[test]
    fn support_violation_is_a_hard_projection() {
        let mut c = canvas_with(
            &[(0.0, 290.0, 0.0)],
            vec![Constraint::Support { point_id: PointId(1), dim: Dim::Y, d: 300.0, op: SupportOp::Le }],
        );
        c.points[0].vy = 50.0;
        tick_step(&mut c, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(c.points[0].y, 300.0);
        assert_eq!(c.points[0].vy, 0.0);
    }

    #[test]
    fn two_circles_separate() {
        let c = bubbles(&[(100.0, 100.0, 5.0), (108.0, 100.0, 5.0)]);
        let mut stepped = c.clone();
        let trace = tick_step(&mut stepped, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(trace.circle_pairs.len(), 1);
        assert!(stepped.points[0].vx < 0.0 && stepped.points[1].vx > 0.0);
        let out = solve(&c, &SolverConfig::default(), &mut NoFrames).unwrap();
        let p = &out.canvas.points;
        assert!((p[0].x - p[1].x).hypot(p[0].y - p[1].y) >= 10.0 - 0.05);
    }

    #[test]
    fn gravity_only_reaches_targets() {
        let c = canvas_with(
            &[(0.0, 0.0, 0.0), (50.0, 80.0, 0.0)],
            vec![
                Constraint::Gravity { point_id: PointId(1), dim: Dim::X, d: 40.0 },
                Constraint::Gravity { point_id: PointId(1), dim: Dim::Y, d: -20.0 },
                Constraint::Gravity { point_id: PointId(2), dim: Dim::X, d: 10.0 },
            ],
        );
        let out = solve(&c, &SolverConfig::default(), &mut NoFrames).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        let p = &out.canvas.points;
        assert!((p[0].x - 40.0).abs() <= 0.05 && (p[0].y + 20.0).abs() <= 0.05);
        assert!((p[1].x - 10.0).abs() <= 0.05);
        assert_eq!(p[1].y, 80.0);
    }

    #[test]
    fn converged_canvas_is_idempotent() {
        let c = canvas_with(
            &[(10.0, 300.0, 0.0), (10.0, 250.0, 0.0)],
            vec![
                Constraint::Gravity { point_id: PointId(1), dim: Dim::Y, d: 300.0 },
                Constraint::Gravity { point_id: PointId(2), dim: Dim::Y, d: 300.0 },
                Constraint::Support { point_id: PointId(1), dim: Dim::Y, d: 300.0, op: SupportOp::Le },
                Constraint::Support { point_id: PointId(2), dim: Dim::Y, d: 300.0, op: SupportOp::Le },
                Constraint::FixedDistance { point_a_id: PointId(1), point_b_id: PointId(2), dim: Dim::Y, d: 50.0 },
            ],
        );
        let out = solve(&c, &SolverConfig::default(), &mut NoFrames).unwrap();
        assert!(out.ticks <= 2);
        for (a, b) in c.points.iter().zip(&out.canvas.points) {
            assert!((a.x - b.x).hypot(a.y - b.y) < 0.05);
        }
    }

    #[test]
    fn collision_stack_rests_on_support() {
        // Lower box 300..250, upper box hovering at 200..150, gap 0 required.
        let c = canvas_with(
            &[(0.0, 300.0, 0.0), (0.0, 250.0, 0.0), (0.0, 200.0, 0.0), (0.0, 150.0, 0.0)],
            vec![
                Constraint::Gravity { point_id: PointId(1), dim: Dim::Y, d: 300.0 },
                Constraint::Gravity { point_id: PointId(2), dim: Dim::Y, d: 300.0 },
                Constraint::Gravity { point_id: PointId(3), dim: Dim::Y, d: 300.0 },
                Constraint::Gravity { point_id: PointId(4), dim: Dim::Y, d: 300.0 },
                Constraint::Support { point_id: PointId(1), dim: Dim::Y, d: 300.0, op: SupportOp::Le },
                Constraint::Support { point_id: PointId(3), dim: Dim::Y, d: 300.0, op: SupportOp::Le },
                Constraint::FixedDistance { point_a_id: PointId(1), point_b_id: PointId(2), dim: Dim::Y, d: 50.0 },
                Constraint::FixedDistance { point_a_id: PointId(3), point_b_id: PointId(4), dim: Dim::Y, d: 50.0 },
                Constraint::AxisCollision { upper_id: PointId(2), lower_id: PointId(3), dim: Dim::Y, d: 0.0 },
            ],
        );
        let out = solve(&c, &SolverConfig::default(), &mut NoFrames).unwrap();
        let y: Vec<f64> = out.canvas.points.iter().map(|p| p.y).collect();
        assert!((y[0] - 300.0).abs() < 1e-6 && (y[1] - 250.0).abs() < 1e-6);
        assert!((y[2] - 250.0).abs() < 1e-6 && (y[3] - 200.0).abs() < 1e-6);
    }

    #[test]
    fn solve_is_deterministic() {
        let c = bubbles(&[(100.0, 100.0, 6.0), (104.0, 101.0, 5.0), (98.0, 96.0, 7.0), (120.0, 90.0, 4.0)]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        solve(&c, &SolverConfig::default(), &mut |f: &Frame| {
            a.push(f.clone());
            ControlFlow::Continue(())
        })
        .unwrap();
        solve(&c, &SolverConfig::default(), &mut |f: &Frame| {
            b.push(f.clone());
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(a, b);
        assert!(a.last().unwrap().converged);
    }

    #[test]
    fn sink_can_cancel() {
        let c = canvas_with(&[(0.0, 0.0, 0.0)], vec![Constraint::Gravity { point_id: PointId(1), dim: Dim::X, d: 400.0 }]);
        let out = solve(&c, &SolverConfig::default(), &mut |_: &Frame| ControlFlow::Break(())).unwrap();
        assert_eq!(out.status, SolveStatus::Cancelled);
        assert_eq!(out.ticks, 1);
    }

    #[test]
    fn divergence_names_the_constraint() {
        let mut c = canvas_with(&[(0.0, 0.0, 0.0)], vec![Constraint::Gravity { point_id: PointId(1), dim: Dim::X, d: 1e308 }]);
        let err = tick_step(&mut c, -1e308, &SolverConfig::default()).unwrap_err();
        assert_eq!(err, SolveError::NumericalDivergence { constraint: Some(ConstraintId(100)) });
    }

    #[test]
    fn bias_weights_larger_radius() {
        assert!((circle_bias(10.0, 5.0) - 0.8).abs() < 1e-12);
        assert_eq!(circle_bias(0.0, 0.0), 0.5);
    }
}
