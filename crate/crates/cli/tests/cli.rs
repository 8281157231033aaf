use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chartforce_cli::batch::{frames_path, metadata_path};
use chartforce_core::fixture::{generate_fixture, ChartType, FixtureMetadata, FixtureSpec};
use chartforce_core::infer::infer_scene;
use chartforce_core::manipulate::{run_script, ManipulationCommand};
use chartforce_core::model::{deserialize_scene, Dim, ObjectKind, Scene};
use chartforce_core::session::ServerMessage;
use chartforce_core::solver::SolverConfig;
use tempfile::TempDir;

fn chartforce(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chartforce")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Work { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn chart(&self, name: &str, spec: &FixtureSpec) -> PathBuf {
        self.file(name, &generate_fixture(spec).unwrap().svg)
    }
}

fn points(scene: &Scene) -> Vec<(f64, f64, f64)> {
    scene.canvases.iter().flat_map(|c| c.points.iter().map(|p| (p.x, p.y, p.r))).collect()
}

fn object_geometry(scene: &Scene) -> Vec<Vec<(f64, f64)>> {
    scene
        .canvases
        .iter()
        .flat_map(|c| c.objects.iter().map(move |o| o.control_point_ids.iter().map(|p| c.point(*p).unwrap()).map(|p| (p.x, p.y)).collect()))
        .collect()
}

fn assert_same_geometry(a: &Scene, b: &Scene, tol: f64) {
    let (ga, gb) = (object_geometry(a), object_geometry(b));
    assert_eq!(ga.len(), gb.len());
    for (oa, ob) in ga.iter().zip(&gb) {
        assert_eq!(oa.len(), ob.len());
        for (p, q) in oa.iter().zip(ob) {
            assert!((p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol, "{p:?} vs {q:?}");
        }
    }
}

#[test]
fn parse_five_bars() {
    let w = Work::new();
    let input = w.chart("bars.svg", &FixtureSpec::new(ChartType::SimpleBar).ticks(5).seed(1));
    let out = w.path("bars.scene.json");
    let o = chartforce(&[Path::new("parse"), &input, Path::new("--out"), &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let scene = deserialize_scene(&fs::read(&out).unwrap()).unwrap();
    let c = &scene.canvases[0];
    assert_eq!(c.objects.len(), 5);
    assert!(c.objects.iter().all(|o| o.kind == ObjectKind::Area));
    assert_eq!(c.points.len(), 20);
}

#[test]
fn parse_empty_document_fails() {
    let w = Work::new();
    let input = w.file("empty.svg", r#"<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"></svg>"#);
    let o = chartforce(&[Path::new("parse"), &input, Path::new("--out"), &w.path("x.json")]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no visual objects"), "{}", stderr(&o));
}

#[test]
fn parse_scatter_warns() {
    let w = Work::new();
    let input = w.chart("scatter.svg", &FixtureSpec::new(ChartType::Scatter).seed(2));
    let out = w.path("scatter.json");
    let o = chartforce(&[Path::new("parse"), &input, Path::new("--out"), &out]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("no baseline"), "{}", stderr(&o));
    let scene = deserialize_scene(&fs::read(&out).unwrap()).unwrap();
    let classes = scene.canvases[0].classes_present();
    assert_eq!(classes.len(), 1);
}

#[test]
fn generate_is_deterministic_and_writes_metadata() {
    let w = Work::new();
    let spec = w.file("spec.json", r#"{"type": "stackedBar", "ticks": 5, "series": 2, "seed": 7}"#);
    let (a, b) = (w.path("a.svg"), w.path("b.svg"));
    assert!(chartforce(&[Path::new("generate"), &spec, Path::new("--out"), &a]).status.success());
    assert!(chartforce(&[Path::new("generate"), &spec, Path::new("--out"), &b]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let meta: FixtureMetadata = serde_json::from_slice(&fs::read(metadata_path(&a)).unwrap()).unwrap();
    assert_eq!(meta.marks.len(), 10);
}

#[test]
fn generate_rejects_unknown_type() {
    let w = Work::new();
    let spec = w.file("spec.json", r#"{"type": "pie"}"#);
    let o = chartforce(&[Path::new("generate"), &spec, Path::new("--out"), &w.path("x.svg")]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown variant"));
}

fn run_cli(w: &Work, input: &Path, script: &str) -> (Output, PathBuf, PathBuf) {
    let script = w.file("script.json", script);
    let (frames, out) = (w.path("frames"), w.path("final.svg"));
    let o = chartforce(&[Path::new("run"), input, &script, Path::new("--frames"), &frames, Path::new("--final"), &out]);
    (o, frames, out)
}

#[test]
fn run_regroups_stacked_bars() {
    let w = Work::new();
    let spec = FixtureSpec::new(ChartType::StackedBar).ticks(4).series(2).seed(5);
    let input = w.chart("stacked.svg", &spec);
    let scene = infer_scene(generate_fixture(&spec).unwrap().svg.as_bytes()).unwrap().scene;
    let set = scene.canvases[0].object_sets[0].id;
    let command = ManipulationCommand::ChangeStackDirection { set_id: set, new_dim: Dim::X };
    let (o, frames, out) = run_cli(&w, &input, &serde_json::to_string(&vec![command.clone()]).unwrap());
    assert!(o.status.success(), "{}", stderr(&o));

    let expected = run_script(&scene, &[command], &SolverConfig::default(), &mut |_, _, _| {}).unwrap();
    let written = infer_scene(&fs::read(&out).unwrap()).unwrap().scene;
    assert_same_geometry(&written, &expected, 1e-3);
    for g in &written.canvases[0].collision_groups {
        assert_eq!(g.dim, Dim::X);
    }

    let stream = fs::read_to_string(frames_path(&frames, 1)).unwrap();
    let last = stream.lines().map(|l| serde_json::from_str::<ServerMessage>(l).unwrap()).next_back().unwrap();
    let ServerMessage::Frame { frame, .. } = last else { panic!() };
    assert!(frame.converged);
}

#[test]
fn empty_script_reproduces_input() {
    let w = Work::new();
    let spec = FixtureSpec::new(ChartType::GroupedBar).seed(8);
    let input = w.chart("grouped.svg", &spec);
    let (o, _, out) = run_cli(&w, &input, "[]");
    assert!(o.status.success(), "{}", stderr(&o));
    let before = infer_scene(generate_fixture(&spec).unwrap().svg.as_bytes()).unwrap().scene;
    let after = infer_scene(&fs::read(&out).unwrap()).unwrap().scene;
    assert_eq!(points(&before), points(&after));
}

#[test]
fn scene_documents_are_accepted_as_input() {
    let w = Work::new();
    let input = w.chart("bars.svg", &FixtureSpec::new(ChartType::SimpleBar).seed(3));
    let scene = w.path("bars.json");
    assert!(chartforce(&[Path::new("parse"), &input, Path::new("--out"), &scene]).status.success());
    let (o, _, out) = run_cli(&w, &scene, r#"{"commands": []}"#);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(out).unwrap().starts_with("<svg"));
}

#[test]
fn failing_step_is_reported_and_partial_output_kept() {
    let w = Work::new();
    let spec = FixtureSpec::new(ChartType::StackedBar).seed(9);
    let input = w.chart("stacked.svg", &spec);
    let scene = infer_scene(generate_fixture(&spec).unwrap().svg.as_bytes()).unwrap().scene;
    let set = scene.canvases[0].object_sets[0].id.0;
    let script = format!(
        r#"[{{"type": "ChangeStackDirection", "setId": {set}, "newDim": "x"}},
            {{"type": "DeleteObjects", "objectIds": [987654]}}]"#
    );
    let (o, frames, out) = run_cli(&w, &input, &script);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("step 2"), "{}", stderr(&o));
    assert!(fs::metadata(frames_path(&frames, 1)).unwrap().len() > 0);
    let kept = infer_scene(&fs::read(&out).unwrap()).unwrap().scene;
    assert!(kept.canvases[0].collision_groups.iter().all(|g| g.dim == Dim::X));
}

#[test]
fn malformed_script_is_an_error() {
    let w = Work::new();
    let input = w.chart("bars.svg", &FixtureSpec::new(ChartType::SimpleBar).seed(3));
    let (o, _, _) = run_cli(&w, &input, r#"[{"type": "Explode"}]"#);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("malformed script"));
}
