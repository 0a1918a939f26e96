use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use forge_core::model::Model;
use forge_core::store::{crud_execute, crud_query, health, is_read_only, no_route, ApiResponse, CrudApi, Resolved, Store};
use tokio::sync::watch;

use crate::{bind, block_until_ctrl_c, load_model, spawn, ServeError, ServiceHandle};

struct ApiState {
    api: CrudApi,
    store: RwLock<Store>,
}

/// A running CRUD service plus read access to its store.
#[derive(Debug)]
pub struct ApiHandle {
    service: ServiceHandle,
    state: Arc<ApiState>,
}

impl std::fmt::Debug for ApiState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ApiState").field("model", &self.api.model().name).finish()
    }
}

impl ApiHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.service.local_addr()
    }

    /// A copy of the current store contents.
    pub fn store(&self) -> Store {
        self.state.store.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub async fn shutdown(self) -> std::io::Result<()> {
        self.service.shutdown().await
    }

    pub async fn wait(self) -> std::io::Result<()> {
        self.service.wait().await
    }
}

/// Serves the CRUD API of `model` on `addr`. Reads share the store; every
/// mutation takes it exclusively.
pub async fn serve_api(model: Model, store: Store, addr: SocketAddr) -> Result<ApiHandle, ServeError> {
    let listener = bind(addr).await?;
    let state = Arc::new(ApiState { api: CrudApi::new(model), store: RwLock::new(store) });
    let router = Router::new().fallback(dispatch).with_state(state.clone());
    let (stop, _) = watch::channel(false);
    let service = spawn(listener, router, stop)?;
    Ok(ApiHandle { service, state })
}

async fn dispatch(State(state): State<Arc<ApiState>>, method: Method, uri: Uri, body: Bytes) -> Response {
    let response = match state.api.resolve(method.as_str(), uri.path()) {
        Resolved::Health => health(),
        Resolved::NoRoute => no_route(),
        Resolved::Route(route, id) if is_read_only(route.kind) => {
            let store = state.store.read().unwrap_or_else(|e| e.into_inner());
            crud_query(state.api.model(), &store, route, id)
        }
        Resolved::Route(route, id) => match CrudApi::parse_body(&body) {
            Ok(payload) => {
                let mut store = state.store.write().unwrap_or_else(|e| e.into_inner());
                crud_execute(state.api.model(), &mut store, route, id, payload.as_ref())
            }
            Err(resp) => resp,
        },
    };
    tracing::debug!(%method, path = uri.path(), status = response.status, "request");
    into_http(response)
}

fn into_http(response: ApiResponse) -> Response {
    let status = StatusCode::from_u16(response.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    if status == StatusCode::NO_CONTENT {
        return status.into_response();
    }
    (status, [(header::CONTENT_TYPE, "application/json")], response.body.to_string()).into_response()
}

/// Parses, checks and serves `source` on `0.0.0.0:port` with an empty
/// store until Ctrl-C.
pub fn run_api_blocking(source: &str, port: u16) -> Result<(), ServeError> {
    let model = load_model(source)?;
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    block_until_ctrl_c(async move { serve_api(model, Store::new(), addr).await.map(|h| h.service) })
}
