//! File-to-file commands: parse, run, generate.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use chartforce_core::export::export_svg;
use chartforce_core::fixture::{generate_fixture, FixtureError, FixtureSpec};
use chartforce_core::infer::{infer_scene, InferError, InferWarning};
use chartforce_core::manipulate::{execute, ExecuteError, Script};
use chartforce_core::model::{deserialize_scene, serialize_scene, DocumentError, Scene};
use chartforce_core::session::ServerMessage;
use chartforce_core::solver::SolverConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: not UTF-8 text", .0.display())]
    NotText(PathBuf),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("malformed script: {0}")]
    Script(serde_json::Error),
    #[error("malformed fixture spec: {0}")]
    Spec(serde_json::Error),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("step {step}: {error}")]
    Step { step: usize, error: ExecuteError },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(io(path))?;
    String::from_utf8(bytes).map_err(|_| CliError::NotText(path.to_path_buf()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io(path))
}

/// Reads a chart document or, if it starts with `{`, a scene document.
pub fn load_scene(path: &Path) -> Result<(Scene, Vec<InferWarning>), CliError> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        Ok((deserialize_scene(text.as_bytes())?, Vec::new()))
    } else {
        let inference = infer_scene(text.as_bytes())?;
        Ok((inference.scene, inference.warnings))
    }
}

pub fn parse(input: &Path, out: &Path) -> Result<Vec<InferWarning>, CliError> {
    let inference = infer_scene(read_text(input)?.as_bytes())?;
    write(out, serialize_scene(&inference.scene)?)?;
    Ok(inference.warnings)
}

#[derive(Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub warnings: Vec<InferWarning>,
    pub scene: Scene,
}

/// Frame file of a 1-based script step.
pub fn frames_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("step-{step:03}.ndjson"))
}

/// Runs a script, writing one NDJSON frame stream per command into
/// `frames` and the final chart to `final_out`. On a failing step the
/// frames so far and the chart as it stood before that step are kept.
pub fn run(input: &Path, script: &Path, frames: &Path, final_out: &Path) -> Result<RunSummary, CliError> {
    let (mut scene, warnings) = load_scene(input)?;
    let script: Script = serde_json::from_str(&read_text(script)?).map_err(CliError::Script)?;
    fs::create_dir_all(frames).map_err(io(frames))?;
    let config = SolverConfig::default();
    for (i, command) in script.commands().iter().enumerate() {
        let step = i + 1;
        let path = frames_path(frames, step);
        let mut w = BufWriter::new(File::create(&path).map_err(io(&path))?);
        let mut failed_write = None;
        let outcome = execute(&scene, command, &config, &mut |canvas_id, frame| {
            let line = ServerMessage::Frame { version: scene.version + 1, canvas_id, frame: frame.clone() };
            let line = serde_json::to_string(&line).expect("frames serialize");
            match writeln!(w, "{line}") {
                Ok(()) => ControlFlow::Continue(()),
                Err(e) => {
                    failed_write = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        if let Some(e) = failed_write {
            return Err(CliError::Io { path, source: e });
        }
        w.flush().map_err(io(&path))?;
        log::info!("step {step}: frames written to {}", path.display());
        match outcome {
            Ok((next, _)) => scene = next,
            Err(error) => {
                write(final_out, export_svg(&scene))?;
                return Err(CliError::Step { step, error });
            }
        }
    }
    write(final_out, export_svg(&scene))?;
    Ok(RunSummary { steps: script.commands().len(), warnings, scene })
}

/// Metadata file written next to a generated chart.
pub fn metadata_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn generate(spec: &Path, out: &Path) -> Result<PathBuf, CliError> {
    let spec: FixtureSpec = serde_json::from_str(&read_text(spec)?).map_err(CliError::Spec)?;
    let fixture = generate_fixture(&spec)?;
    write(out, &fixture.svg)?;
    let meta = metadata_path(out);
    write(&meta, serde_json::to_string_pretty(&fixture.metadata).expect("metadata serializes"))?;
    Ok(meta)
}
