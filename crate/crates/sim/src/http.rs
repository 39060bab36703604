//! HTTP facade over the simulated platform.
//!
//! Wall-clock arrival times map 1:1 to virtual milliseconds, so a live load
//! generator pointed at these endpoints observes the same latencies a
//! virtual-time run would compute. A driver task advances the event loop as
//! the wall clock passes scheduled events and completes pending responses.
//!
//! Endpoints:
//! - `POST /invoke/{function}`: body is the payload; outcome metadata comes
//!   back in the `x-exec-ms`, `x-total-ms`, `x-cold` and `x-instance`
//!   headers. Unknown function: 404. Throttled: 429. Timed out: 504.
//! - `GET /metrics/{function}`: cumulative counters as JSON.
//! - `PUT /config/{function}`: JSON deployment config; retires instances.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::{oneshot, watch, Notify};
use tokio::task::JoinHandle;

use fncap_core::DeploymentConfig;

use crate::engine::{CallId, InvocationOutcome, Platform, Status};

pub const HEADER_EXEC_MS: &str = "x-exec-ms";
pub const HEADER_TOTAL_MS: &str = "x-total-ms";
pub const HEADER_COLD: &str = "x-cold";
pub const HEADER_INSTANCE: &str = "x-instance";

struct Core {
    platform: Platform,
    waiters: HashMap<CallId, oneshot::Sender<(InvocationOutcome, Option<Vec<u8>>)>>,
}

struct Shared {
    core: Mutex<Core>,
    wake: Notify,
    started: Instant,
}

impl Shared {
    fn now_ms(&self) -> f64 {
        self.started.elapsed().as_secs_f64() * 1000.0
    }
}

/// A bound, serving facade. Dropping the handle leaves the tasks running;
/// call [`HttpServer::shutdown`] to stop them.
pub struct HttpServer {
    pub addr: SocketAddr,
    stop: watch::Sender<bool>,
    server: JoinHandle<()>,
    driver: JoinHandle<()>,
}

impl HttpServer {
    pub async fn shutdown(self) {
        let _ = self.stop.send(true);
        let _ = self.server.await;
        let _ = self.driver.await;
    }
}

/// Serve a platform over HTTP. `bind` is a `host:port` string; port 0 picks
/// a free port (see [`HttpServer::addr`]).
pub async fn serve(platform: Platform, bind: &str) -> std::io::Result<HttpServer> {
    let listener = TcpListener::bind(bind).await?;
    let addr = listener.local_addr()?;
    let shared = Arc::new(Shared {
        core: Mutex::new(Core { platform, waiters: HashMap::new() }),
        wake: Notify::new(),
        started: Instant::now(),
    });
    let (stop, _) = watch::channel(false);

    let driver = tokio::spawn(drive(shared.clone(), stop.subscribe()));

    let app = Router::new()
        .route("/invoke/{function}", post(invoke))
        .route("/metrics/{function}", get(metrics))
        .route("/config/{function}", put(update_config))
        .with_state(shared);
    let mut stop_rx = stop.subscribe();
    let server = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async move {
                let _ = stop_rx.changed().await;
            })
            .await
            .ok();
    });

    Ok(HttpServer { addr, stop, server, driver })
}

/// Advance the platform as the wall clock catches up with scheduled events,
/// waking early whenever a request submits new work.
async fn drive(shared: Arc<Shared>, mut stop: watch::Receiver<bool>) {
    loop {
        let next = {
            let mut core = shared.core.lock().expect("platform lock");
            core.platform.run_until(shared.now_ms());
            for resolved in core.platform.take_resolved() {
                if let Some(tx) = core.waiters.remove(&resolved.call) {
                    let _ = tx.send((resolved.outcome, resolved.response));
                }
            }
            core.platform.next_event_at()
        };
        match next {
            Some(at) => {
                let wait = Duration::from_secs_f64((at - shared.now_ms()).max(0.0) / 1000.0);
                tokio::select! {
                    _ = tokio::time::sleep(wait) => {}
                    _ = shared.wake.notified() => {}
                    _ = stop.changed() => return,
                }
            }
            None => {
                tokio::select! {
                    _ = shared.wake.notified() => {}
                    _ = stop.changed() => return,
                }
            }
        }
    }
}

async fn invoke(
    State(shared): State<Arc<Shared>>,
    Path(function): Path<String>,
    body: Bytes,
) -> Response {
    let rx = {
        let mut core = shared.core.lock().expect("platform lock");
        let at = shared.now_ms().max(core.platform.clock_ms());
        let id = match core.platform.submit(&function, body.to_vec(), at) {
            Ok(id) => id,
            Err(_) => return (StatusCode::NOT_FOUND, "unknown function\n").into_response(),
        };
        let (tx, rx) = oneshot::channel();
        core.waiters.insert(id, tx);
        rx
    };
    shared.wake.notify_one();
    match rx.await {
        Ok((outcome, response)) => outcome_response(outcome, response),
        Err(_) => StatusCode::INTERNAL_SERVER_ERROR.into_response(),
    }
}

fn outcome_response(outcome: InvocationOutcome, response: Option<Vec<u8>>) -> Response {
    let status = match outcome.status {
        Status::Ok => StatusCode::OK,
        Status::Throttled => StatusCode::TOO_MANY_REQUESTS,
        Status::Timeout => StatusCode::GATEWAY_TIMEOUT,
    };
    let mut headers = HeaderMap::new();
    let num = |v: f64| HeaderValue::from_str(&format!("{v:.3}")).expect("numeric header");
    if let Some(exec) = outcome.execution_ms {
        headers.insert(HEADER_EXEC_MS, num(exec));
    }
    headers.insert(HEADER_TOTAL_MS, num(outcome.total_ms));
    headers.insert(HEADER_COLD, HeaderValue::from_static(if outcome.cold { "1" } else { "0" }));
    if let Some(instance) = outcome.instance {
        headers.insert(HEADER_INSTANCE, HeaderValue::from_str(&instance.to_string()).unwrap());
    }
    (status, headers, response.unwrap_or_default()).into_response()
}

async fn metrics(State(shared): State<Arc<Shared>>, Path(function): Path<String>) -> Response {
    let mut core = shared.core.lock().expect("platform lock");
    let now = shared.now_ms();
    core.platform.run_until(now);
    let Some(counters) = core.platform.counters(&function) else {
        return (StatusCode::NOT_FOUND, "unknown function\n").into_response();
    };
    let body = serde_json::json!({
        "function": function,
        "clock_ms": core.platform.clock_ms(),
        "invocations": counters.invocations,
        "completions": counters.completions,
        "throttles": counters.throttles,
        "timeouts": counters.timeouts,
        "cold_starts": counters.cold_starts,
        "live_instances": core.platform.live_instances(&function),
    });
    (StatusCode::OK, axum::Json(body)).into_response()
}

async fn update_config(
    State(shared): State<Arc<Shared>>,
    Path(function): Path<String>,
    body: Bytes,
) -> Response {
    let config: DeploymentConfig = match serde_json::from_slice(&body) {
        Ok(c) => c,
        Err(e) => return (StatusCode::BAD_REQUEST, format!("bad config: {e}\n")).into_response(),
    };
    let mut core = shared.core.lock().expect("platform lock");
    let now = shared.now_ms();
    core.platform.run_until(now);
    match core.platform.update(&function, config) {
        Ok(()) => StatusCode::NO_CONTENT.into_response(),
        Err(_) => (StatusCode::NOT_FOUND, "unknown function\n").into_response(),
    }
}
