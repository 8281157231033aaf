//! WebSocket endpoint: one [`Session`] per connection.
//!
//! Messages are read concurrently with the solve. A worker thread owns the
//! session and applies messages in arrival order; a newer scene-changing
//! message cancels the solve in flight (last writer wins).

use std::net::SocketAddr;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use chartforce_core::session::{CanvasOpKind, ClientMessage, ServerMessage, Session};
use futures::{SinkExt, StreamExt};

/// A client message stamped with its arrival number.
#[derive(Debug)]
pub struct Incoming {
    pub seq: u64,
    pub body: Result<ClientMessage, String>,
}

impl Incoming {
    pub fn parse(seq: u64, text: &str) -> Self {
        Incoming { seq, body: serde_json::from_str(text).map_err(|_| text.to_string()) }
    }

    /// Whether this message replaces the scene a running solve is producing.
    pub fn supersedes(&self) -> bool {
        matches!(
            self.body,
            Ok(ClientMessage::LoadDocument { .. }
                | ClientMessage::ApplyCommand { .. }
                | ClientMessage::ApplyGesture { .. }
                | ClientMessage::CanvasOp { op: CanvasOpKind::Delete | CanvasOpKind::Duplicate | CanvasOpKind::Reset, .. })
        )
    }
}

/// Session plus cancellation bookkeeping.
pub struct Worker {
    pub session: Session,
    /// Arrival number of the newest superseding message.
    latest: Arc<AtomicU64>,
    /// Oldest version a cancelled solve left behind. Commands aimed at any
    /// version from here up to the current one are applied to the current.
    rebase_from: Option<u64>,
}

impl Worker {
    pub fn new(latest: Arc<AtomicU64>) -> Self {
        Worker { session: Session::new(), latest, rebase_from: None }
    }

    fn version(&self) -> Option<u64> {
        self.session.scene().map(|s| s.version)
    }

    /// Handles one message; `send` returns false once the client is gone.
    pub fn handle(&mut self, incoming: Incoming, send: &mut dyn FnMut(ServerMessage) -> bool) {
        let before = self.version();
        let latest = &self.latest;
        let seq = incoming.seq;
        let mut broke = false;
        let mut out = |m: ServerMessage| {
            if send(m) && latest.load(Ordering::SeqCst) <= seq {
                ControlFlow::Continue(())
            } else {
                broke = true;
                ControlFlow::Break(())
            }
        };
        match incoming.body {
            Err(text) => self.session.handle_text(&text, &mut out),
            Ok(mut msg) => {
                if let (Some(from), Some(now)) = (self.rebase_from, before) {
                    if let ClientMessage::ApplyCommand { scene_version, .. } | ClientMessage::ApplyGesture { scene_version, .. } =
                        &mut msg
                    {
                        if (from..now).contains(scene_version) {
                            log::debug!("rebasing command from version {scene_version} to {now}");
                            *scene_version = now;
                        }
                    }
                }
                self.session.handle(msg, &mut out);
            }
        }
        let after = self.version();
        if broke && after != before {
            log::info!("solve cancelled at version {after:?}");
            self.rebase_from = self.rebase_from.or(before);
            send(self.session.snapshot());
        } else if after != before {
            self.rebase_from = None;
        }
    }
}

async fn connection(socket: WebSocket) {
    let (mut sink, mut stream) = socket.split();
    let (out_tx, mut out_rx) = tokio::sync::mpsc::unbounded_channel::<String>();
    let (in_tx, in_rx) = mpsc::channel::<Incoming>();
    let latest = Arc::new(AtomicU64::new(0));

    let worker = {
        let latest = latest.clone();
        tokio::task::spawn_blocking(move || {
            let mut worker = Worker::new(latest);
            let mut send = |m: ServerMessage| out_tx.send(serde_json::to_string(&m).expect("messages serialize")).is_ok();
            while let Ok(incoming) = in_rx.recv() {
                worker.handle(incoming, &mut send);
            }
        })
    };
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
    });

    let mut seq = 0;
    while let Some(Ok(message)) = stream.next().await {
        let text = match message {
            Message::Text(t) => t,
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            _ => continue,
        };
        seq += 1;
        let incoming = Incoming::parse(seq, &text);
        if incoming.supersedes() {
            latest.store(seq, Ordering::SeqCst);
        }
        if in_tx.send(incoming).is_err() {
            break;
        }
    }
    // Stop any solve and let the worker drain.
    latest.store(u64::MAX, Ordering::SeqCst);
    drop(in_tx);
    let _ = worker.await;
    let _ = writer.await;
    log::info!("session closed");
}

async fn upgrade(ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(connection)
}

async fn index() -> &'static str {
    "chartforce session endpoint: open a WebSocket at /ws\n"
}

pub fn router() -> Router {
    Router::new().route("/", get(index)).route("/ws", get(upgrade))
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router()).await
}
