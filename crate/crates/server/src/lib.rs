//! Network services for forge models: the reference CRUD API over HTTP and
//! the agent runtime over WebSocket.
//!
//! Both services are thin shells around `forge_core::store` and
//! `forge_core::agent`; all behaviour lives in the core crate. Each `serve_*`
//! function binds immediately (so a taken port is a startup error), spawns the
//! service on the current tokio runtime and returns a [`ServiceHandle`].

mod api;
mod agents;
pub mod wire;

use std::net::SocketAddr;

use tokio::sync::watch;
use tokio::task::JoinHandle;

pub use agents::{run_agents_blocking, serve_agent, serve_agents};
pub use api::{run_api_blocking, serve_api, ApiHandle};
pub use wire::WireMessage;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("model is invalid:\n{0}")]
    InvalidModel(String),
    #[error("model has no agents")]
    NoAgents,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A running service. Dropping the handle leaves the service running until
/// the runtime shuts down; call [`ServiceHandle::shutdown`] to stop it.
#[derive(Debug)]
pub struct ServiceHandle {
    addr: SocketAddr,
    stop: watch::Sender<bool>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(self) -> std::io::Result<()> {
        let _ = self.stop.send(true);
        match self.task.await {
            Ok(result) => result,
            Err(join) => Err(std::io::Error::other(join)),
        }
    }

    /// Resolves when the service stops on its own (i.e. it failed).
    pub async fn wait(self) -> std::io::Result<()> {
        match self.task.await {
            Ok(result) => result,
            Err(join) => Err(std::io::Error::other(join)),
        }
    }
}

async fn bind(addr: SocketAddr) -> Result<tokio::net::TcpListener, ServeError> {
    tokio::net::TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr, source })
}

fn spawn(listener: tokio::net::TcpListener, router: axum::Router, stop: watch::Sender<bool>) -> Result<ServiceHandle, ServeError> {
    let addr = listener.local_addr()?;
    let mut rx = stop.subscribe();
    let task = tokio::spawn(async move {
        axum::serve(listener, router)
            .with_graceful_shutdown(async move {
                let _ = rx.wait_for(|stopped| *stopped).await;
            })
            .await
    });
    Ok(ServiceHandle { addr, stop, task })
}

/// Parses and checks a model source, rendering error diagnostics.
fn load_model(source: &str) -> Result<forge_core::Model, ServeError> {
    let render = |diags: &[forge_core::Diagnostic]| {
        diags
            .iter()
            .filter(|d| d.is_error())
            .map(|d| forge_core::render_diagnostic(d, "<model>"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let model = forge_core::parse_model(source).map_err(|d| ServeError::InvalidModel(render(&d)))?;
    let diags = forge_core::checker::check_model(&model);
    if forge_core::checker::has_errors(&diags) {
        return Err(ServeError::InvalidModel(render(&diags)));
    }
    Ok(model)
}

/// Runs `fut` on a fresh multi-threaded runtime until Ctrl-C.
fn block_until_ctrl_c<F>(fut: F) -> Result<(), ServeError>
where
    F: std::future::Future<Output = Result<ServiceHandle, ServeError>>,
{
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let handle = fut.await?;
        tracing::info!(addr = %handle.local_addr(), "listening");
        let ServiceHandle { stop, mut task, .. } = handle;
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {
                let _ = stop.send(true);
                task.await.map_err(std::io::Error::other)??;
            }
            res = &mut task => res.map_err(std::io::Error::other)??,
        }
        Ok(())
    })
}
