//! In-browser session for the static demo page.
//!
//! The page speaks the same JSON protocol as the WebSocket server; replies
//! come back as one JSON array per message instead of a stream.

use std::ops::ControlFlow;

use chartforce_core::export::export_svg;
use chartforce_core::fixture::{generate_fixture, FixtureSpec};
use chartforce_core::session::{ServerMessage, Session};
use wasm_bindgen::prelude::*;

/// Handles one client message, collecting every reply.
pub fn exchange(session: &mut Session, message: &str) -> Vec<ServerMessage> {
    let mut replies = Vec::new();
    session.handle_text(message, &mut |m| {
        replies.push(m);
        ControlFlow::Continue(())
    });
    replies
}

/// Chart document for a fixture spec given as JSON.
pub fn fixture_svg(spec: &str) -> Result<String, String> {
    let spec: FixtureSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    generate_fixture(&spec).map(|f| f.svg).map_err(|e| e.to_string())
}

#[wasm_bindgen]
#[derive(Default)]
pub struct Demo {
    session: Session,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo { session: Session::new() }
    }

    /// Replies to a client message, as a JSON array of server messages.
    pub fn send(&mut self, message: &str) -> String {
        serde_json::to_string(&exchange(&mut self.session, message)).expect("messages serialize")
    }

    /// A synthetic chart, e.g. `{"type": "stackedBar", "seed": 3}`.
    pub fn fixture(spec: &str) -> Result<String, JsError> {
        fixture_svg(spec).map_err(|e| JsError::new(&e))
    }

    /// The whole scene as a chart document; empty before a load.
    #[wasm_bindgen(js_name = exportSvg)]
    pub fn export_svg(&self) -> String {
        self.session.scene().map(export_svg).unwrap_or_default()
    }
}
