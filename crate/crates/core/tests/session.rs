use std::ops::ControlFlow;

use chartforce_core::export::ExportFormat;
use chartforce_core::fixture::{generate_fixture, ChartType, FixtureSpec};
use chartforce_core::manipulate::{run_script, Gesture, GesturePoint, ManipulationCommand, HANDLE_COUNT};
use chartforce_core::model::{Dim, Scene};
use chartforce_core::session::{CanvasOpKind, ClientMessage, ServerMessage, Session};
use chartforce_core::solver::SolverConfig;

fn svg(chart: ChartType, seed: u64) -> String {
    generate_fixture(&FixtureSpec::new(chart).seed(seed)).unwrap().svg
}

fn send(session: &mut Session, msg: ClientMessage) -> Vec<ServerMessage> {
    let mut got = Vec::new();
    session.handle(msg, &mut |m| {
        got.push(m);
        ControlFlow::Continue(())
    });
    got
}

fn loaded(chart: ChartType, seed: u64) -> (Session, Scene) {
    let mut s = Session::new();
    let replies = send(&mut s, ClientMessage::LoadDocument { document: svg(chart, seed) });
    let scene = match replies.last() {
        Some(ServerMessage::SceneSnapshot { scene, .. }) => scene.clone(),
        other => panic!("expected a snapshot, got {other:?}"),
    };
    (s, scene)
}

fn ok(m: &ServerMessage) -> bool {
    matches!(m, ServerMessage::CommandResult { ok: true, .. })
}

fn error_kind(m: &ServerMessage) -> Option<&str> {
    match m {
        ServerMessage::CommandResult { ok: false, error: Some(e), .. } => Some(e.kind.as_str()),
        _ => None,
    }
}

#[test]
fn load_publishes_snapshot_with_handles() {
    let mut s = Session::new();
    let replies = send(&mut s, ClientMessage::LoadDocument { document: svg(ChartType::StackedBar, 1) });
    assert_eq!(replies.len(), 2);
    assert!(ok(&replies[0]));
    let ServerMessage::SceneSnapshot { handles, scene, .. } = &replies[1] else { panic!() };
    assert!(!handles.is_empty() && handles.len() <= 2 * HANDLE_COUNT);
    assert_eq!(scene.canvases.len(), 1);
}

#[test]
fn scatter_load_warns_about_baseline() {
    let mut s = Session::new();
    let replies = send(&mut s, ClientMessage::LoadDocument { document: svg(ChartType::Scatter, 1) });
    let ServerMessage::CommandResult { warnings, .. } = &replies[0] else { panic!() };
    assert!(warnings.iter().any(|w| w.to_string().contains("no baseline")));
}

#[test]
fn stale_version_is_rejected() {
    let (mut s, scene) = loaded(ChartType::StackedBar, 2);
    let set = scene.canvases[0].object_sets[0].id;
    let cmd = ManipulationCommand::ChangeStackDirection { set_id: set, new_dim: Dim::X };
    let replies = send(&mut s, ClientMessage::ApplyCommand { scene_version: scene.version + 7, command: cmd.clone() });
    assert_eq!(replies.len(), 1);
    assert_eq!(error_kind(&replies[0]), Some("StaleVersion"));

    let replies = send(&mut s, ClientMessage::ApplyCommand { scene_version: scene.version, command: cmd });
    assert!(replies.iter().any(|m| matches!(m, ServerMessage::Frame { .. })));
    assert!(replies.iter().any(ok));
    let ServerMessage::SceneSnapshot { scene: after, .. } = replies.last().unwrap() else { panic!() };
    assert_eq!(after.version, scene.version + 1);
}

#[test]
fn malformed_message_keeps_session_alive() {
    let (mut s, scene) = loaded(ChartType::SimpleBar, 1);
    let mut got = Vec::new();
    s.handle_text("{\"type\": \"Nope\"}", &mut |m| {
        got.push(m);
        ControlFlow::Continue(())
    });
    assert_eq!(error_kind(&got[0]), Some("MalformedMessage"));
    assert_eq!(s.scene().unwrap().version, scene.version);
    let replies = send(&mut s, ClientMessage::CanvasOp { canvas_id: scene.canvases[0].id, op: CanvasOpKind::ToggleConstraintLayer });
    let ServerMessage::SceneSnapshot { constraint_layer, .. } = &replies[0] else { panic!() };
    assert_eq!(constraint_layer, &vec![scene.canvases[0].id]);
}

#[test]
fn duplicate_adds_an_equal_canvas() {
    let (mut s, scene) = loaded(ChartType::GroupedBar, 3);
    let id = scene.canvases[0].id;
    let replies = send(&mut s, ClientMessage::CanvasOp { canvas_id: id, op: CanvasOpKind::Duplicate });
    let ServerMessage::SceneSnapshot { scene: after, .. } = replies.last().unwrap() else { panic!("{replies:?}") };
    assert_eq!(after.canvases.len(), 2);
    let (a, b) = (&after.canvases[0], &after.canvases[1]);
    assert_ne!(a.id, b.id);
    let geom = |c: &chartforce_core::model::Canvas| c.points.iter().map(|p| (p.x, p.y, p.r)).collect::<Vec<_>>();
    assert_eq!(geom(a), geom(b));
    assert_eq!(a.count_by_class(), b.count_by_class());
    assert_eq!(a.collision_groups.len(), b.collision_groups.len());
}

#[test]
fn delete_and_reset_canvas() {
    let (mut s, scene) = loaded(ChartType::StackedBar, 4);
    let id = scene.canvases[0].id;
    let axis = scene.canvases[0].axes.iter().find(|a| a.axis_kind == chartforce_core::model::AxisKind::Continuous).unwrap().id;
    let zoom = ManipulationCommand::RescaleAxis { axis_id: axis, zoom_factor: 1.5, anchor: 360.0 };
    assert!(send(&mut s, ClientMessage::ApplyCommand { scene_version: scene.version, command: zoom }).iter().any(ok));
    let replies = send(&mut s, ClientMessage::CanvasOp { canvas_id: id, op: CanvasOpKind::Reset });
    let ServerMessage::SceneSnapshot { scene: reset, .. } = replies.last().unwrap() else { panic!("{replies:?}") };
    for (a, b) in reset.canvases[0].points.iter().zip(&scene.canvases[0].points) {
        assert!((a.x - b.x).abs() < 0.5 && (a.y - b.y).abs() < 0.5);
    }
    let replies = send(&mut s, ClientMessage::CanvasOp { canvas_id: id, op: CanvasOpKind::Delete });
    let ServerMessage::SceneSnapshot { scene: empty, .. } = replies.last().unwrap() else { panic!() };
    assert!(empty.canvases.is_empty());
}

#[test]
fn stride_thins_frames_but_keeps_the_last() {
    let (mut s, scene) = loaded(ChartType::StackedBar, 5);
    let set = scene.canvases[0].object_sets[0].id;
    send(&mut s, ClientMessage::SetFrameStride { stride: 10 });
    let replies = send(
        &mut s,
        ClientMessage::ApplyCommand { scene_version: scene.version, command: ManipulationCommand::ChangeStackDirection { set_id: set, new_dim: Dim::X } },
    );
    let ticks: Vec<usize> = replies
        .iter()
        .filter_map(|m| match m {
            ServerMessage::Frame { frame, .. } => Some(frame.tick_index),
            _ => None,
        })
        .collect();
    assert!(ticks.len() >= 2);
    assert!(ticks[..ticks.len() - 1].iter().all(|t| t % 10 == 0));
    let last = replies.iter().rev().find_map(|m| match m {
        ServerMessage::Frame { frame, .. } => Some(frame.converged),
        _ => None,
    });
    assert_eq!(last, Some(true));
}

#[test]
fn break_cancels_the_solve() {
    let (mut s, scene) = loaded(ChartType::StackedBar, 6);
    let set = scene.canvases[0].object_sets[0].id;
    let mut got = Vec::new();
    s.handle(
        ClientMessage::ApplyCommand { scene_version: scene.version, command: ManipulationCommand::ChangeStackDirection { set_id: set, new_dim: Dim::X } },
        &mut |m| {
            let frame = matches!(m, ServerMessage::Frame { .. });
            got.push(m);
            if frame {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    assert_eq!(got.len(), 1);
    assert_eq!(s.scene().unwrap().version, scene.version + 1);
}

#[test]
fn gestures_are_translated_server_side() {
    let (mut s, scene) = loaded(ChartType::SimpleBar, 1);
    let obj = scene.canvases[0].objects[0].id;
    let path = vec![GesturePoint { x: 100.0, y: 200.0, t_ms: 0.0 }, GesturePoint { x: 900.0, y: 200.0, t_ms: 50.0 }];
    let replies = send(&mut s, ClientMessage::ApplyGesture { scene_version: scene.version, gesture: Gesture::Drag { object_ids: vec![obj], path } });
    let result = replies.iter().find(|m| matches!(m, ServerMessage::CommandResult { .. })).unwrap();
    let ServerMessage::CommandResult { command: Some(ManipulationCommand::DeleteObjects { .. }), .. } = result else { panic!("{result:?}") };
    assert_eq!(s.scene().unwrap().canvases[0].objects.len(), 4);
}

#[test]
fn export_returns_a_document() {
    let (mut s, scene) = loaded(ChartType::Line, 2);
    let id = scene.canvases[0].id;
    let replies = send(&mut s, ClientMessage::ExportCanvas { canvas_id: id, format: ExportFormat::Svg });
    let ServerMessage::ExportResult { document, .. } = &replies[0] else { panic!() };
    assert!(document.starts_with("<svg"));
    let replies = send(&mut s, ClientMessage::ExportCanvas { canvas_id: chartforce_core::model::CanvasId(999), format: ExportFormat::Svg });
    assert_eq!(error_kind(&replies[0]), Some("UnknownCanvas"));
}

#[test]
fn session_matches_headless_script() {
    let (mut s, scene) = loaded(ChartType::StackedBar, 7);
    let c = &scene.canvases[0];
    let set = c.object_sets[0].id;
    let lower: Vec<_> = c.objects.iter().step_by(2).map(|o| o.id).collect();
    let script = vec![
        ManipulationCommand::ChangeStackDirection { set_id: set, new_dim: Dim::X },
        ManipulationCommand::ChangeStackDirection { set_id: set, new_dim: Dim::Y },
        ManipulationCommand::DeleteObjects { object_ids: lower },
    ];
    let headless = run_script(&scene, &script, &SolverConfig::default(), &mut |_, _, _| {}).unwrap();
    for (version, command) in (scene.version..).zip(script) {
        let replies = send(&mut s, ClientMessage::ApplyCommand { scene_version: version, command });
        assert!(replies.iter().any(ok));
    }
    assert_eq!(s.scene().unwrap(), &headless);
}

#[test]
fn messages_have_stable_json_shape() {
    let msg: ClientMessage =
        serde_json::from_str(r#"{"type": "CanvasOp", "canvasId": 3, "op": "toggleConstraintLayer"}"#).unwrap();
    assert_eq!(msg, ClientMessage::CanvasOp { canvas_id: chartforce_core::model::CanvasId(3), op: CanvasOpKind::ToggleConstraintLayer });
    let apply: ClientMessage = serde_json::from_str(
        r#"{"type": "ApplyCommand", "sceneVersion": 2, "command": {"type": "DeleteObjects", "objectIds": [4]}}"#,
    )
    .unwrap();
    assert!(matches!(apply, ClientMessage::ApplyCommand { scene_version: 2, .. }));
    let text = serde_json::to_string(&ServerMessage::ExportResult {
        canvas_id: chartforce_core::model::CanvasId(1),
        format: ExportFormat::Svg,
        document: String::new(),
    })
    .unwrap();
    assert_eq!(text, r#"{"type":"ExportResult","canvasId":1,"format":"svg","document":""}"#);
}
