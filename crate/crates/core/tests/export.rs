use chartforce_core::export::{export_canvas, export_svg, ExportFormat};
use chartforce_core::fixture::{generate_fixture, ChartType, FixtureSpec};
use chartforce_core::infer::infer_scene;
use chartforce_core::manipulate::{apply, CanvasTarget, ManipulationCommand};
use chartforce_core::model::{deserialize_scene, Canvas, ConstraintClass, Scene};

fn infer(svg: &str) -> Scene {
    infer_scene(svg.as_bytes()).unwrap().scene
}

fn geometry(c: &Canvas) -> Vec<Vec<(f64, f64, f64)>> {
    c.objects
        .iter()
        .map(|o| o.control_point_ids.iter().map(|p| c.point(*p).unwrap()).map(|p| (p.x, p.y, p.r)).collect())
        .collect()
}

#[test]
fn export_reparses_to_the_same_points() {
    for chart in ChartType::ALL {
        for seed in 0..4 {
            let f = generate_fixture(&FixtureSpec::new(chart).seed(seed)).unwrap();
            let first = infer(&f.svg);
            let second = infer(&export_svg(&first));
            let (a, b) = (geometry(&first.canvases[0]), geometry(&second.canvases[0]));
            assert_eq!(a.len(), b.len(), "{chart:?}");
            for (oa, ob) in a.iter().zip(&b) {
                assert_eq!(oa.len(), ob.len());
                for (p, q) in oa.iter().zip(ob) {
                    assert!((p.0 - q.0).abs() < 1e-3 && (p.1 - q.1).abs() < 1e-3 && (p.2 - q.2).abs() < 1e-3);
                }
            }
        }
    }
}

#[test]
fn exported_axes_infer_the_same_constraints() {
    for chart in ChartType::ALL {
        let f = generate_fixture(&FixtureSpec::new(chart).seed(5)).unwrap();
        let first = infer(&f.svg);
        let second = infer(&export_svg(&first));
        let (a, b) = (&first.canvases[0], &second.canvases[0]);
        assert_eq!(a.count_by_class(), b.count_by_class(), "{chart:?}");
        assert_eq!(a.baseline.as_ref().map(|x| x.tick_positions.clone()), b.baseline.as_ref().map(|x| x.tick_positions.clone()));
        let labels = |c: &Canvas| c.axes.iter().map(|x| x.ticks.iter().map(|t| t.label.clone()).collect::<Vec<_>>()).collect::<Vec<_>>();
        assert_eq!(labels(a), labels(b));
    }
}

#[test]
fn canvases_are_laid_out_left_to_right() {
    let f = generate_fixture(&FixtureSpec::new(ChartType::StackedBar).ticks(3).seed(1)).unwrap();
    let scene = infer(&f.svg);
    let obj = scene.canvases[0].objects[0].id;
    let (two, _) = apply(&scene, &ManipulationCommand::MoveToCanvas { object_ids: vec![obj], target_canvas_id: CanvasTarget::New }).unwrap();
    let svg = export_svg(&two);
    assert!(svg.contains(r#"width="1280""#));
    assert!(svg.contains("translate(640 0)"));
    assert_eq!(svg.matches("<g data-canvas").count(), 2);
}

#[test]
fn single_canvas_scene_export_round_trips() {
    let f = generate_fixture(&FixtureSpec::new(ChartType::Bubble).count(20).seed(1)).unwrap();
    let scene = infer(&f.svg);
    let id = scene.canvases[0].id;
    let bytes = export_canvas(&scene, id, ExportFormat::Scene).unwrap();
    let back = deserialize_scene(&bytes).unwrap();
    assert_eq!(back.canvases, scene.canvases);
    let svg = String::from_utf8(export_canvas(&scene, id, ExportFormat::Svg).unwrap()).unwrap();
    assert_eq!(svg.matches("<circle").count(), 20);
    assert!(infer(&svg).canvases[0].classes_present().contains(&ConstraintClass::Collision));
}
