use std::ops::ControlFlow;

use proptest::prelude::*;

use chartforce_core::fixture::{generate_fixture, ChartType, FixtureSpec};
use chartforce_core::infer::infer_scene;
use chartforce_core::manipulate::{apply, ManipulationCommand};
use chartforce_core::model::{
    deserialize_scene, serialize_scene, validate_scene, AxisKind, Canvas, CanvasId, Constraint, ConstraintEntry,
    ConstraintId, ControlPoint, Dim, ObjectId, ObjectKind, PointId, Rect, Scene, SetId, StyleRecord, SupportOp,
    VisualObject, VisualObjectSet,
};
use chartforce_core::solver::{solve, Frame, NoFrames, SolverConfig};

fn chart() -> impl Strategy<Value = ChartType> {
    prop::sample::select(ChartType::ALL.to_vec())
}

fn scene_of(chart: ChartType, seed: u64) -> Scene {
    let f = generate_fixture(&FixtureSpec::new(chart).seed(seed)).unwrap();
    infer_scene(f.svg.as_bytes()).unwrap().scene
}

/// Free points, one point object each, with the given constraints.
fn loose_canvas(points: &[(f64, f64)], constraints: Vec<Constraint>) -> Canvas {
    let mut c = Canvas::empty(CanvasId(1), Rect::new(0.0, 0.0, 400.0, 400.0));
    let base = 100;
    for (i, &(x, y)) in points.iter().enumerate() {
        let pid = PointId(base + i as u64);
        c.points.push(ControlPoint::new(pid, x, y, 0.0));
        c.objects.push(VisualObject {
            id: ObjectId(1000 + i as u64),
            kind: ObjectKind::Point,
            control_point_ids: vec![pid],
            style: StyleRecord::default(),
        });
    }
    c.constraints = constraints
        .into_iter()
        .enumerate()
        .map(|(i, constraint)| ConstraintEntry { id: ConstraintId(5000 + i as u64), constraint })
        .collect();
    c
}

fn frames(canvas: &Canvas) -> Vec<Frame> {
    let mut out = Vec::new();
    let mut sink = |f: &Frame| {
        out.push(f.clone());
        ControlFlow::Continue(())
    };
    solve(canvas, &SolverConfig::default(), &mut sink).unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scene_documents_round_trip(chart in chart(), seed in 0u64..1000) {
        let scene = scene_of(chart, seed);
        let back = deserialize_scene(&serialize_scene(&scene).unwrap()).unwrap();
        prop_assert_eq!(back, scene);
    }

    #[test]
    fn fixtures_are_deterministic(chart in chart(), seed in any::<u64>()) {
        let spec = FixtureSpec::new(chart).seed(seed);
        prop_assert_eq!(generate_fixture(&spec).unwrap().svg, generate_fixture(&spec).unwrap().svg);
    }

    #[test]
    fn lines_and_areas_have_zero_radius(chart in chart(), seed in 0u64..1000) {
        let scene = scene_of(chart, seed);
        let c = &scene.canvases[0];
        for o in c.objects.iter().filter(|o| o.kind != ObjectKind::Point) {
            for p in &o.control_point_ids {
                prop_assert_eq!(c.point(*p).unwrap().r, 0.0);
            }
        }
    }

    #[test]
    fn inferred_collisions_hold_initially(chart in chart(), seed in 0u64..1000) {
        let scene = scene_of(chart, seed);
        let c = &scene.canvases[0];
        for e in &c.constraints {
            if let Constraint::AxisCollision { upper_id, lower_id, dim, d } = e.constraint {
                let eps = c.point(upper_id).unwrap().pos(dim) - c.point(lower_id).unwrap().pos(dim) - d;
                prop_assert!(eps >= -1e-9, "eps {}", eps);
            }
        }
    }

    #[test]
    fn supports_hold_after_every_tick(
        pts in prop::collection::vec((0.0..400.0f64, 0.0..400.0f64), 1..12),
        floor in 50.0..350.0f64,
        pull in 0.0..400.0f64,
    ) {
        let mut cs = Vec::new();
        for i in 0..pts.len() {
            let p = PointId(100 + i as u64);
            cs.push(Constraint::Support { point_id: p, dim: Dim::Y, d: floor, op: SupportOp::Le });
            cs.push(Constraint::Gravity { point_id: p, dim: Dim::Y, d: pull });
        }
        let canvas = loose_canvas(&pts, cs);
        for f in frames(&canvas) {
            for (_, _, y) in &f.points {
                prop_assert!(*y <= floor, "{} above floor {}", y, floor);
            }
        }
    }

    #[test]
    fn gravity_alone_reaches_targets(
        pts in prop::collection::vec((0.0..400.0f64, 0.0..400.0f64, 0.0..400.0f64), 1..10),
    ) {
        let cs = pts
            .iter()
            .enumerate()
            .map(|(i, t)| Constraint::Gravity { point_id: PointId(100 + i as u64), dim: Dim::X, d: t.2 })
            .collect();
        let xy: Vec<(f64, f64)> = pts.iter().map(|t| (t.0, t.1)).collect();
        let canvas = loose_canvas(&xy, cs);
        let cfg = SolverConfig::default();
        let out = solve(&canvas, &cfg, &mut NoFrames).unwrap();
        for (p, t) in out.canvas.points.iter().zip(&pts) {
            prop_assert!((p.x - t.2).abs() <= cfg.convergence_epsilon, "{} vs {}", p.x, t.2);
            prop_assert_eq!(p.y, t.1);
        }
    }

    #[test]
    fn solving_twice_gives_identical_frames(chart in chart(), seed in 0u64..200) {
        let scene = scene_of(chart, seed);
        let mut c = scene.canvases[0].clone();
        for p in &mut c.points {
            p.y -= 7.0;
        }
        prop_assert_eq!(frames(&c), frames(&c));
    }

    #[test]
    fn converged_stacks_are_feasible(seed in 0u64..500, series in 2usize..4, drop in 0.0..30.0f64) {
        let f = generate_fixture(&FixtureSpec::new(ChartType::StackedBar).series(series).ticks(4).seed(seed)).unwrap();
        let scene = infer_scene(f.svg.as_bytes()).unwrap().scene;
        let mut c = scene.canvases[0].clone();
        for p in &mut c.points {
            p.y -= drop;
        }
        let out = solve(&c, &SolverConfig::default(), &mut NoFrames).unwrap().canvas;
        for e in &out.constraints {
            let at = |p: PointId| out.point(p).unwrap();
            match e.constraint {
                Constraint::Support { point_id, dim, d, op } => {
                    prop_assert!(op.holds(at(point_id).pos(dim), d), "{:?} {} {:?} {}", dim, at(point_id).pos(dim), op, d)
                }
                Constraint::AxisCollision { upper_id, lower_id, dim, d } => {
                    prop_assert!(at(upper_id).pos(dim) - at(lower_id).pos(dim) - d >= -0.5)
                }
                Constraint::FixedDistance { point_a_id, point_b_id, dim, d } => {
                    prop_assert!((at(point_a_id).pos(dim) - at(point_b_id).pos(dim) - d).abs() <= 0.5)
                }
                _ => {}
            }
        }
    }

    #[test]
    fn deletes_are_transactional_and_keep_axes(chart in chart(), seed in 0u64..200, pick in prop::collection::vec(any::<prop::sample::Index>(), 0..4)) {
        let scene = scene_of(chart, seed);
        let c = &scene.canvases[0];
        let mut chosen: Vec<ObjectId> = pick.iter().map(|i| c.objects[i.index(c.objects.len())].id).collect();
        chosen.sort();
        chosen.dedup();
        let before = scene.clone();
        match apply(&scene, &ManipulationCommand::DeleteObjects { object_ids: chosen.clone() }) {
            Ok((next, _)) => {
                prop_assert!(validate_scene(&next).is_empty());
                if let Some(after) = next.canvases.first() {
                    prop_assert_eq!(&after.axes, &c.axes);
                    prop_assert_eq!(after.baseline.as_ref().map(|b| b.position), c.baseline.as_ref().map(|b| b.position));
                    prop_assert_eq!(after.objects.len(), c.objects.len() - chosen.len());
                }
            }
            Err(e) => prop_assert!(false, "delete failed: {e}"),
        }
        prop_assert_eq!(scene, before);
    }

    #[test]
    fn tick_reorder_is_a_bijection(n in 3usize..8, seed in 0u64..100, perm in Just(()).prop_perturb(|_, mut rng| {
        let mut p: Vec<usize> = (0..8).collect();
        for i in (1..p.len()).rev() {
            let j = (rng.next_u32() as usize) % (i + 1);
            p.swap(i, j);
        }
        p
    })) {
        let f = generate_fixture(&FixtureSpec::new(ChartType::SimpleBar).ticks(n).seed(seed)).unwrap();
        let scene = infer_scene(f.svg.as_bytes()).unwrap().scene;
        let axis = scene.canvases[0].axes.iter().find(|a| a.axis_kind == AxisKind::Discrete).unwrap().clone();
        let permutation: Vec<usize> = perm.into_iter().filter(|&i| i < n).collect();
        let (next, _) = apply(&scene, &ManipulationCommand::ReorderTicks { axis_id: axis.id, permutation: permutation.clone() }).unwrap();
        let moved = next.canvases[0].axis(axis.id).unwrap();
        for (slot, &old) in permutation.iter().enumerate() {
            prop_assert_eq!(&moved.ticks[slot].label, &axis.ticks[old].label);
            prop_assert_eq!(moved.ticks[slot].position, axis.ticks[slot].position);
        }
        let mut inverse = vec![0; n];
        for (slot, &old) in permutation.iter().enumerate() {
            inverse[old] = slot;
        }
        let (back, _) = apply(&next, &ManipulationCommand::ReorderTicks { axis_id: axis.id, permutation: inverse }).unwrap();
        prop_assert_eq!(&back.canvases[0].axis(axis.id).unwrap().ticks, &axis.ticks);
        let gravity = |s: &Scene| s.canvases[0].constraints.iter().filter_map(|e| match e.constraint {
            Constraint::Gravity { dim: Dim::X, d, .. } => Some(d),
            _ => None,
        }).collect::<Vec<_>>();
        for (a, b) in gravity(&back).iter().zip(gravity(&scene)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn loose_canvas_is_well_formed() {
    let mut c = loose_canvas(&[(1.0, 2.0)], vec![]);
    c.object_sets.push(VisualObjectSet { id: SetId(1), kind: ObjectKind::Point, object_ids: vec![ObjectId(1000)], collision_governed: false });
    let mut scene = Scene::empty();
    scene.canvases.push(c);
    scene.next_id = 10_000;
    assert!(validate_scene(&scene).is_empty(), "{:?}", validate_scene(&scene));
}
