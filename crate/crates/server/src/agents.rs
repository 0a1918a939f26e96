use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use forge_core::agent::{ActionRegistry, AgentRuntime, LlmResponder};
use forge_core::model::{normalize_identifier, AgentModel};
use futures::{SinkExt, StreamExt};
use serde_json::json;
use tokio::sync::watch;

use crate::wire::{WireMessage, BAD_FRAME};
use crate::{bind, block_until_ctrl_c, load_model, spawn, ServeError, ServiceHandle};

struct AgentsState {
    /// Keyed by snake_case agent name.
    runtimes: BTreeMap<String, AgentRuntime>,
    /// The agent answering on the bare `/ws` path, if there is exactly one.
    default: Option<String>,
    stop: watch::Receiver<bool>,
}

/// Serves a single agent at `/ws` (and `/ws/<agent_snake>`).
pub async fn serve_agent(
    agent: AgentModel,
    responder: Arc<dyn LlmResponder>,
    registry: ActionRegistry,
    addr: SocketAddr,
) -> Result<ServiceHandle, ServeError> {
    serve_agents(vec![AgentRuntime::new(agent, responder, registry)], addr).await
}

/// Serves every runtime at `/ws/<agent_snake>`; with exactly one runtime,
/// `/ws` answers too. `GET /healthz` reports liveness.
pub async fn serve_agents(runtimes: Vec<AgentRuntime>, addr: SocketAddr) -> Result<ServiceHandle, ServeError> {
    if runtimes.is_empty() {
        return Err(ServeError::NoAgents);
    }
    let listener = bind(addr).await?;
    let default = (runtimes.len() == 1).then(|| normalize_identifier(&runtimes[0].agent().name));
    let runtimes = runtimes.into_iter().map(|rt| (normalize_identifier(&rt.agent().name), rt)).collect();
    let (stop, stop_rx) = watch::channel(false);
    let state = Arc::new(AgentsState { runtimes, default, stop: stop_rx });
    let router = Router::new()
        .route("/healthz", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/ws", get(default_ws))
        .route("/ws/{agent}", get(named_ws))
        .with_state(state);
    spawn(listener, router, stop)
}

async fn default_ws(State(state): State<Arc<AgentsState>>, ws: WebSocketUpgrade) -> Response {
    match state.default.clone() {
        Some(name) => upgrade(state, name, ws),
        None => not_found(),
    }
}

async fn named_ws(State(state): State<Arc<AgentsState>>, Path(agent): Path<String>, ws: WebSocketUpgrade) -> Response {
    if state.runtimes.contains_key(&agent) {
        upgrade(state, agent, ws)
    } else {
        not_found()
    }
}

fn not_found() -> Response {
    (axum::http::StatusCode::NOT_FOUND, Json(json!({ "error": "NO_ROUTE" }))).into_response()
}

fn upgrade(state: Arc<AgentsState>, agent: String, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| async move {
        if let Err(err) = run_session(&state, &agent, socket).await {
            tracing::debug!(%agent, %err, "session ended with error");
        }
    })
}

/// One connection = one session; frames are handled strictly in order.
async fn run_session(state: &AgentsState, agent: &str, socket: WebSocket) -> Result<(), axum::Error> {
    let runtime = &state.runtimes[agent];
    let (mut tx, mut rx) = socket.split();
    let send = |msg: WireMessage| Message::Text(msg.to_text().into());

    let (mut session, replies) = match runtime.start_session() {
        Ok(started) => started,
        Err(err) => {
            tx.send(send(WireMessage::error("E300", err.to_string()))).await?;
            return tx.close().await;
        }
    };
    tx.send(send(WireMessage::SessionStarted {
        session_id: session.session_id.clone(),
        state: session.current_state.clone(),
        replies,
    }))
    .await?;

    let mut stop = state.stop.clone();
    loop {
        let frame = tokio::select! {
            frame = rx.next() => frame,
            _ = stop.wait_for(|stopped| *stopped) => break,
        };
        let text = match frame {
            None => break,
            Some(Err(err)) => return Err(err),
            Some(Ok(Message::Close(_))) => break,
            Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
            Some(Ok(Message::Binary(_))) => {
                tx.send(send(WireMessage::error(BAD_FRAME, "binary frames are not supported"))).await?;
                continue;
            }
            Some(Ok(Message::Text(text))) => text,
        };
        let reply = match WireMessage::parse(text.as_str()) {
            Ok(WireMessage::UserMessage { session_id, text }) if session_id == session.session_id => {
                match runtime.handle_message(&mut session, &text) {
                    Ok(replies) => WireMessage::AgentReply {
                        session_id,
                        state: session.current_state.clone(),
                        replies,
                    },
                    Err(err) => WireMessage::error("E300", err.to_string()),
                }
            }
            Ok(WireMessage::UserMessage { session_id, .. }) => {
                WireMessage::error(BAD_FRAME, format!("unknown session '{session_id}'"))
            }
            Ok(_) => WireMessage::error(BAD_FRAME, "clients may only send user_message frames"),
            Err(err) => WireMessage::error(BAD_FRAME, format!("malformed frame: {err}")),
        };
        tx.send(send(reply)).await?;
    }
    let _ = tx.close().await;
    Ok(())
}

/// Parses, checks and serves every agent of `source` on `0.0.0.0:port`
/// with the stub responder until Ctrl-C.
pub fn run_agents_blocking(source: &str, port: u16, threshold: f64) -> Result<(), ServeError> {
    let model = load_model(source)?;
    let runtimes = model
        .agents
        .iter()
        .map(|a| AgentRuntime::with_stub(a.clone()).with_threshold(threshold))
        .collect();
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    block_until_ctrl_c(serve_agents(runtimes, addr))
}
