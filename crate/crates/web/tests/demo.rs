use chartforce_core::session::{ServerMessage, Session};
use chartforce_web::{exchange, fixture_svg, Demo};

fn load(session: &mut Session, spec: &str) -> chartforce_core::model::Scene {
    let svg = fixture_svg(spec).unwrap();
    let msg = serde_json::json!({ "type": "LoadDocument", "document": svg }).to_string();
    match exchange(session, &msg).pop() {
        Some(ServerMessage::SceneSnapshot { scene, .. }) => scene,
        other => panic!("{other:?}"),
    }
}

#[test]
fn restack_streams_frames_then_result_then_snapshot() {
    let mut s = Session::new();
    let scene = load(&mut s, r#"{"type": "stackedBar", "seed": 3}"#);
    let set = scene.canvases[0].object_sets[0].id.0;
    let msg = format!(
        r#"{{"type": "ApplyCommand", "sceneVersion": {}, "command": {{"type": "ChangeStackDirection", "setId": {set}, "newDim": "x"}}}}"#,
        scene.version
    );
    let replies = exchange(&mut s, &msg);
    let n = replies.len();
    assert!(n >= 3);
    assert!(replies[..n - 2].iter().all(|m| matches!(m, ServerMessage::Frame { .. })));
    assert!(matches!(replies[n - 2], ServerMessage::CommandResult { ok: true, .. }));
    assert!(matches!(replies[n - 1], ServerMessage::SceneSnapshot { .. }));
}

#[test]
fn demo_replies_are_a_json_array() {
    let mut d = Demo::new();
    assert_eq!(d.export_svg(), "");
    let replies: Vec<ServerMessage> = serde_json::from_str(&d.send("garbage")).unwrap();
    assert!(matches!(&replies[0], ServerMessage::CommandResult { ok: false, error: Some(e), .. } if e.kind == "MalformedMessage"));
    let svg = fixture_svg(r#"{"type": "bubble", "count": 20, "seed": 1}"#).unwrap();
    d.send(&serde_json::json!({ "type": "LoadDocument", "document": svg }).to_string());
    assert!(d.export_svg().matches("<circle").count() == 20);
}

#[test]
fn bad_fixture_spec_is_reported() {
    assert!(fixture_svg(r#"{"type": "pie"}"#).unwrap_err().contains("unknown variant"));
}
