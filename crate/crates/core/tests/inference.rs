use std::collections::BTreeSet;

use chartforce_core::fixture::{generate_fixture, ChartType, Fixture, FixtureSpec};
use chartforce_core::infer::{infer_scene, InferError, InferWarning, Inference};
use chartforce_core::model::{AxisKind, Canvas, Constraint, ConstraintClass, Dim, ObjectKind, SupportOp};
use chartforce_core::solver::{solve, NoFrames, SolverConfig};

fn fixture(spec: FixtureSpec) -> (Fixture, Inference) {
    let f = generate_fixture(&spec).unwrap();
    let inf = infer_scene(f.svg.as_bytes()).unwrap();
    (f, inf)
}

fn canvas(inf: &Inference) -> &Canvas {
    &inf.scene.canvases[0]
}

#[test]
fn five_bar_chart() {
    let (f, inf) = fixture(FixtureSpec::new(ChartType::SimpleBar).ticks(5).seed(3));
    let c = canvas(&inf);
    assert_eq!(c.objects.len(), 5);
    assert_eq!(c.points.len(), 20);
    let base = c.baseline.as_ref().expect("baseline");
    assert_eq!(base.dim, Dim::Y);
    assert_eq!(base.position, 360.0);
    assert_eq!(base.data_side, SupportOp::Le);
    assert_eq!(base.tick_positions.len(), 5);
    for (t, truth) in base.tick_positions.iter().zip(&f.metadata.category_ticks) {
        assert!((t - truth.position).abs() < 0.01, "{t} vs {}", truth.position);
    }
    let counts = c.count_by_class();
    assert_eq!(counts[&ConstraintClass::Gravity], 40);
    assert_eq!(counts[&ConstraintClass::Support], 20);
    assert_eq!(counts[&ConstraintClass::Fixed], 40);
    assert!(!counts.contains_key(&ConstraintClass::Collision));
    assert!(chartforce_core::model::validate_scene(&inf.scene).is_empty());
}

#[test]
fn axes_are_classified_from_labels() {
    let (f, inf) = fixture(FixtureSpec::new(ChartType::StackedBar).seed(7));
    let c = canvas(&inf);
    assert_eq!(c.axes.len(), 2);
    let x = c.axes.iter().find(|a| a.dim() == Dim::X).unwrap();
    let y = c.axes.iter().find(|a| a.dim() == Dim::Y).unwrap();
    assert_eq!(x.axis_kind, AxisKind::Discrete);
    assert_eq!(x.ticks.len(), f.metadata.category_ticks.len());
    assert_eq!(y.axis_kind, AxisKind::Continuous);
    assert_eq!(y.ticks.len(), f.metadata.value_ticks.len());
    assert_eq!(c.baseline.as_ref().unwrap().axis_id, x.id);
}

#[test]
fn stacked_bar_groups_stack_perpendicular() {
    let (_, inf) = fixture(FixtureSpec::new(ChartType::StackedBar).ticks(5).series(2).seed(7));
    let c = canvas(&inf);
    assert_eq!(c.objects.len(), 10);
    assert_eq!(c.collision_groups.len(), 5);
    assert!(c.collision_groups.iter().all(|g| g.dim == Dim::Y && g.ordered_object_ids.len() == 2));
    let collisions: Vec<_> = c.constraints.iter().filter(|e| matches!(e.constraint, Constraint::AxisCollision { .. })).collect();
    assert_eq!(collisions.len(), 10);
    for e in collisions {
        if let Constraint::AxisCollision { upper_id, lower_id, dim, d } = e.constraint {
            let eps = c.point(upper_id).unwrap().pos(dim) - c.point(lower_id).unwrap().pos(dim) - d;
            assert!(eps >= 0.0);
            assert_eq!(d, 0.0);
        }
    }
}

#[test]
fn grouped_bar_ticks_sit_at_label_anchors() {
    let (f, inf) = fixture(FixtureSpec::new(ChartType::GroupedBar).ticks(3).series(2).seed(2));
    let c = canvas(&inf);
    let base = c.baseline.as_ref().unwrap();
    assert_eq!(base.tick_positions.len(), 3);
    for (t, truth) in base.tick_positions.iter().zip(&f.metadata.category_ticks) {
        assert!((t - truth.position).abs() < 0.01);
    }
    assert_eq!(c.collision_groups.len(), 3);
    assert!(c.collision_groups.iter().all(|g| g.dim == Dim::X));
    for e in &c.constraints {
        if let Constraint::AxisCollision { d, .. } = e.constraint {
            assert!((d - 2.0).abs() < 0.01, "{d}");
        }
    }
}

#[test]
fn stacked_area_bands() {
    let (f, inf) = fixture(FixtureSpec::new(ChartType::StackedArea).ticks(6).series(3).seed(4));
    let c = canvas(&inf);
    assert_eq!(c.objects.len(), 3);
    for (o, m) in c.objects.iter().zip(&f.metadata.marks) {
        assert_eq!(o.control_point_ids.len(), m.points.len());
    }
    let base = c.baseline.as_ref().unwrap();
    assert_eq!(base.position, 360.0);
    assert_eq!(base.tick_positions.len(), 6);
    assert_eq!(c.collision_groups.len(), 6);
    assert_eq!(c.count_by_class()[&ConstraintClass::Fixed], 18);
}

#[test]
fn scatter_is_gravity_only() {
    let (_, inf) = fixture(FixtureSpec::new(ChartType::Scatter).seed(5));
    assert!(inf.warnings.contains(&InferWarning::NoBaseline));
    let present = canvas(&inf).classes_present();
    assert_eq!(present, BTreeSet::from([ConstraintClass::Gravity]));
}

#[test]
fn bubbles_are_collision_governed() {
    let (_, inf) = fixture(FixtureSpec::new(ChartType::Bubble).count(120).seed(1));
    let c = canvas(&inf);
    assert_eq!(c.object_sets.len(), 1);
    assert_eq!(c.object_sets[0].kind, ObjectKind::Point);
    assert!(c.object_sets[0].collision_governed);
}

#[test]
fn empty_document_has_no_visual_objects() {
    let err = infer_scene(br#"<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"></svg>"#).unwrap_err();
    assert!(matches!(err, InferError::NoVisualObjects));
    assert_eq!(err.to_string(), "no visual objects");
}

#[test]
fn legend_swatches_are_reported() {
    let (f, _) = fixture(FixtureSpec::new(ChartType::SimpleBar).seed(1));
    let svg = f.svg.replace(
        "</svg>",
        "  <rect x=\"600\" y=\"5\" width=\"10\" height=\"10\" fill=\"#000000\"/>\n  <text x=\"580\" y=\"14\">Legend</text>\n</svg>",
    );
    let inf = infer_scene(svg.as_bytes()).unwrap();
    assert!(inf.warnings.iter().any(|w| matches!(w, InferWarning::Unclassified { .. })));
    assert_eq!(canvas(&inf).object_sets[0].object_ids.len(), 5);
}

#[test]
fn freshly_inferred_systems_are_at_rest() {
    for chart in ChartType::ALL {
        for seed in [1, 2] {
            let (_, inf) = fixture(FixtureSpec::new(chart).seed(seed));
            let before = canvas(&inf);
            let out = solve(before, &SolverConfig::default(), &mut NoFrames).unwrap();
            let worst = before
                .points
                .iter()
                .zip(&out.canvas.points)
                .map(|(a, b)| (a.x - b.x).hypot(a.y - b.y))
                .fold(0.0, f64::max);
            assert!(worst < 0.5, "{chart:?} seed {seed} moved {worst}");
        }
    }
}

#[test]
fn class_pattern_per_chart_type() {
    use ConstraintClass::*;
    let expected = [
        (ChartType::SimpleBar, vec![Gravity, Support, Fixed]),
        (ChartType::StackedBar, vec![Gravity, Support, Fixed, Collision]),
        (ChartType::GroupedBar, vec![Gravity, Support, Fixed, Collision]),
        (ChartType::SimpleArea, vec![Gravity, Support, Fixed]),
        (ChartType::StackedArea, vec![Gravity, Support, Fixed, Collision]),
        (ChartType::Line, vec![Gravity]),
        (ChartType::Scatter, vec![Gravity]),
        (ChartType::Bubble, vec![Gravity, Support, Collision]),
    ];
    for (chart, classes) in expected {
        let (_, inf) = fixture(FixtureSpec::new(chart).seed(9));
        let got = canvas(&inf).classes_present();
        assert_eq!(got, classes.into_iter().collect::<BTreeSet<_>>(), "{chart:?}");
    }
}
