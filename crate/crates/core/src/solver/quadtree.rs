//! Broad phase for circle overlaps.

use crate::model::{ControlPoint, PointId};

const BUCKET: usize = 8;
const MAX_DEPTH: usize = 24;

#[derive(Debug)]
enum Node {
    Leaf(Vec<usize>),
    Split { mid: [f64; 2], children: Box<[Node; 4]> },
}

/// Point quadtree over circle centers; pair tests use the largest radius as
/// query padding so every true overlap is visited.
#[derive(Debug)]
pub struct QuadTree<'a> {
    centers: &'a [[f64; 2]],
    radii: &'a [f64],
    root: Node,
    max_radius: f64,
}

impl<'a> QuadTree<'a> {
    pub fn build(centers: &'a [[f64; 2]], radii: &'a [f64]) -> Self {
        debug_assert_eq!(centers.len(), radii.len());
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in centers {
            for k in 0..2 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        let max_radius = radii.iter().copied().fold(0.0, f64::max);
        let all: Vec<usize> = (0..centers.len()).collect();
        let root = if centers.is_empty() { Node::Leaf(all) } else { split(centers, all, lo, hi, 0) };
        Self { centers, radii, root, max_radius }
    }

    /// Index pairs `(i, j)`, `i < j`, with `dist < r_i + r_j`, sorted.
    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        let mut found = Vec::new();
        for i in 0..self.centers.len() {
            let reach = self.radii[i] + self.max_radius;
            let c = self.centers[i];
            found.clear();
            query(&self.root, self.centers, [c[0] - reach, c[1] - reach], [c[0] + reach, c[1] + reach], &mut found);
            for &j in &found {
                if j > i && overlapping(self.centers, self.radii, i, j) {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

fn split(centers: &[[f64; 2]], items: Vec<usize>, lo: [f64; 2], hi: [f64; 2], depth: usize) -> Node {
    if items.len() <= BUCKET || depth >= MAX_DEPTH {
        return Node::Leaf(items);
    }
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let mut parts: [Vec<usize>; 4] = Default::default();
    for i in items {
        parts[quadrant(centers[i], mid)].push(i);
    }
    let [q0, q1, q2, q3] = parts;
    let child = |q: Vec<usize>, k: usize| {
        let (clo, chi) = child_box(lo, hi, mid, k);
        split(centers, q, clo, chi, depth + 1)
    };
    Node::Split { mid, children: Box::new([child(q0, 0), child(q1, 1), child(q2, 2), child(q3, 3)]) }
}

fn quadrant(c: [f64; 2], mid: [f64; 2]) -> usize {
    usize::from(c[0] >= mid[0]) | (usize::from(c[1] >= mid[1]) << 1)
}

fn child_box(lo: [f64; 2], hi: [f64; 2], mid: [f64; 2], k: usize) -> ([f64; 2], [f64; 2]) {
    let (x0, x1) = if k & 1 == 0 { (lo[0], mid[0]) } else { (mid[0], hi[0]) };
    let (y0, y1) = if k & 2 == 0 { (lo[1], mid[1]) } else { (mid[1], hi[1]) };
    ([x0, y0], [x1, y1])
}

fn query(node: &Node, centers: &[[f64; 2]], qlo: [f64; 2], qhi: [f64; 2], out: &mut Vec<usize>) {
    match node {
        Node::Leaf(items) => {
            for &i in items {
                let c = centers[i];
                if c[0] >= qlo[0] && c[0] <= qhi[0] && c[1] >= qlo[1] && c[1] <= qhi[1] {
                    out.push(i);
                }
            }
        }
        Node::Split { mid, children } => {
            let west = qlo[0] < mid[0];
            let east = qhi[0] >= mid[0];
            let north = qlo[1] < mid[1];
            let south = qhi[1] >= mid[1];
            if west && north {
                query(&children[0], centers, qlo, qhi, out);
            }
            if east && north {
                query(&children[1], centers, qlo, qhi, out);
            }
            if west && south {
                query(&children[2], centers, qlo, qhi, out);
            }
            if east && south {
                query(&children[3], centers, qlo, qhi, out);
            }
        }
    }
}

#[inline]
pub(crate) fn overlapping(centers: &[[f64; 2]], radii: &[f64], i: usize, j: usize) -> bool {
    let dx = centers[i][0] - centers[j][0];
    let dy = centers[i][1] - centers[j][1];
    let r = radii[i] + radii[j];
    dx * dx + dy * dy < r * r
}

/// Pairs of control points whose circles overlap (`dist < r_a + r_b`).
pub fn quadtree_overlaps(points: &[ControlPoint]) -> Vec<(PointId, PointId)> {
    let centers: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let radii: Vec<f64> = points.iter().map(|p| p.r).collect();
    QuadTree::build(&centers, &radii)
        .overlaps()
        .into_iter()
        .map(|(i, j)| (points[i].id, points[j].id))
        .collect()
}

/// All-pairs reference for the same predicate.
pub fn brute_force_overlaps(points: &[ControlPoint]) -> Vec<(PointId, PointId)> {
    let centers: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let radii: Vec<f64> = points.iter().map(|p| p.r).collect();
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if overlapping(&centers, &radii, i, j) {
                out.push((points[i].id, points[j].id));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circles(spec: &[(f64, f64, f64)]) -> Vec<ControlPoint> {
        spec.iter()
            .enumerate()
            .map(|(i, &(x, y, r))| ControlPoint::new(PointId(i as u64 + 1), x, y, r))
            .collect()
    }

    #[test]
    fn empty_and_single() {
        assert!(quadtree_overlaps(&[]).is_empty());
        assert!(quadtree_overlaps(&circles(&[(0.0, 0.0, 5.0)])).is_empty());
    }

    #[test]
    fn touching_is_not_overlapping() {
        let pts = circles(&[(0.0, 0.0, 5.0), (10.0, 0.0, 5.0), (9.0, 30.0, 5.0), (9.0, 39.0, 5.0)]);
        assert_eq!(quadtree_overlaps(&pts), vec![(PointId(3), PointId(4))]);
    }

    #[test]
    fn coincident_centers_do_not_recurse_forever() {
        let pts = circles(&vec![(3.0, 3.0, 1.0); 40]);
        assert_eq!(quadtree_overlaps(&pts).len(), 40 * 39 / 2);
    }

    proptest! {
        #[test]
        fn matches_brute_force(spec in prop::collection::vec((0.0..300.0f64, 0.0..300.0f64, 0.0..15.0f64), 0..120)) {
            let pts = circles(&spec);
            prop_assert_eq!(quadtree_overlaps(&pts), brute_force_overlaps(&pts));
        }
    }
}
