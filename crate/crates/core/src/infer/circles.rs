//! Whether a set of circles is packed against itself.

use serde::{Deserialize, Serialize};

use crate::model::{Constraint, ControlPoint, PointId};
use crate::solver::QuadTree;

pub const SLACK_PERCENTILE: f64 = 10.0;
pub const GOVERNED_SLACK: (f64, f64) = (-0.5, 1.0);
pub const TOUCHING_SLACK: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CircleCollisions {
    pub governed: bool,
    /// Nearest-neighbour slack at the configured percentile.
    pub percentile_slack: f64,
    /// Connected groups (two or more) over pairs with slack at most 1 px.
    pub clusters: Vec<Vec<PointId>>,
    radii: Vec<(PointId, f64)>,
}

impl CircleCollisions {
    /// Every pairwise constraint the set stands for. The solver never needs
    /// these; it discovers overlapping pairs itself.
    pub fn materialize(&self) -> Vec<Constraint> {
        if !self.governed {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (i, &(a, ra)) in self.radii.iter().enumerate() {
            for &(b, rb) in &self.radii[i + 1..] {
                out.push(Constraint::CircleCollision { point_a_id: a, point_b_id: b, d: ra + rb });
            }
        }
        out
    }
}

/// Linear-interpolated percentile of unsorted values.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let rank = p / 100.0 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
}

fn slack(a: &ControlPoint, b: &ControlPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y) - a.r - b.r
}

/// Nearest-neighbour slack of every circle, using the broad phase with
/// radii grown until each circle has found a neighbour.
fn nearest_slacks(points: &[ControlPoint]) -> Vec<f64> {
    let centers: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let mut best = vec![f64::INFINITY; points.len()];
    let mut pad = 2.0 * TOUCHING_SLACK;
    loop {
        let radii: Vec<f64> = points.iter().map(|p| p.r + pad).collect();
        for (i, j) in QuadTree::build(&centers, &radii).overlaps() {
            let s = slack(&points[i], &points[j]);
            best[i] = best[i].min(s);
            best[j] = best[j].min(s);
        }
        if best.iter().all(|b| b.is_finite()) || pad > 1e7 {
            return best;
        }
        pad *= 4.0;
    }
}

pub fn detect_circle_collisions(points: &[ControlPoint]) -> CircleCollisions {
    let radii = points.iter().map(|p| (p.id, p.r)).collect();
    if points.len() < 2 {
        return CircleCollisions { governed: false, percentile_slack: f64::INFINITY, clusters: Vec::new(), radii };
    }
    let slacks = nearest_slacks(points);
    let p10 = percentile(&slacks, SLACK_PERCENTILE);
    let governed = p10 >= GOVERNED_SLACK.0 && p10 <= GOVERNED_SLACK.1;

    // Flood fill over the touching graph.
    let centers: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let grown: Vec<f64> = points.iter().map(|p| p.r + TOUCHING_SLACK / 2.0 + 1e-9).collect();
    let mut adjacency = vec![Vec::new(); points.len()];
    for (i, j) in QuadTree::build(&centers, &grown).overlaps() {
        if slack(&points[i], &points[j]) <= TOUCHING_SLACK {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    let mut label = vec![usize::MAX; points.len()];
    let mut clusters = Vec::new();
    for start in 0..points.len() {
        if label[start] != usize::MAX || adjacency[start].is_empty() {
            continue;
        }
        let id = clusters.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for &j in &adjacency[i] {
                if label[j] == usize::MAX {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members.into_iter().map(|i| points[i].id).collect());
    }
    CircleCollisions { governed, percentile_slack: p10, clusters, radii }
}
