//! Closed-loop load generation over HTTP.
//!
//! Same schedule semantics as [`crate::run_load`], but each virtual user is
//! a task issuing real requests against a platform server, paced by the wall
//! clock. Timestamps in the log are milliseconds since the run started;
//! execution and total durations come from the server's response headers.

use std::sync::Arc;
use std::time::{Duration, Instant};

use fncap_sim::http::{HEADER_COLD, HEADER_EXEC_MS, HEADER_INSTANCE, HEADER_TOTAL_MS};
use reqwest::StatusCode;

use crate::engine::LoadOptions;
use crate::error::LoadError;
use crate::log::{RequestLog, RequestRecord, RequestStatus};
use crate::schedule::{LoadStage, VuPlan};

/// Drive `stages` of virtual users against `base_url`'s invoke endpoint.
/// Transport failures and unexpected statuses are logged as
/// [`RequestStatus::Error`] rather than aborting the run.
pub async fn run_load_http(
    base_url: &str,
    function: &str,
    stages: &[LoadStage],
    opts: &LoadOptions,
) -> Result<RequestLog, LoadError> {
    let plan = Arc::new(VuPlan::build(stages, 0.0)?);
    let url = format!("{}/invoke/{}", base_url.trim_end_matches('/'), function);
    let client = reqwest::Client::new();
    let t0 = Instant::now();

    let mut tasks = Vec::with_capacity(plan.max_vus as usize);
    for vu in 1..=plan.max_vus {
        let plan = Arc::clone(&plan);
        let client = client.clone();
        let url = url.clone();
        let payload = opts.payload.clone();
        let backoff_ms = opts.error_backoff_ms;
        tasks.push(tokio::spawn(async move {
            run_vu(vu, &plan, &client, &url, payload, backoff_ms, t0).await
        }));
    }

    let mut records = Vec::new();
    for task in tasks {
        records.extend(task.await.expect("load task panicked"));
    }
    Ok(RequestLog::new(records))
}

async fn run_vu(
    vu: u32,
    plan: &VuPlan,
    client: &reqwest::Client,
    url: &str,
    payload: Vec<u8>,
    backoff_ms: f64,
    t0: Instant,
) -> Vec<RequestRecord> {
    let mut records = Vec::new();
    for &(from_ms, to_ms) in plan.active_intervals(vu) {
        sleep_until_ms(t0, from_ms).await;
        loop {
            let send_ms = elapsed_ms(t0);
            if send_ms >= to_ms || send_ms >= plan.end_ms {
                break;
            }
            let record = send_one(client, url, payload.clone(), send_ms, t0).await;
            let ok = record.status == RequestStatus::Ok;
            records.push(record);
            if !ok {
                tokio::time::sleep(Duration::from_secs_f64(backoff_ms / 1e3)).await;
            }
        }
    }
    records
}

async fn send_one(
    client: &reqwest::Client,
    url: &str,
    payload: Vec<u8>,
    send_ms: f64,
    t0: Instant,
) -> RequestRecord {
    let response = client.post(url).body(payload).send().await;
    let wall_total = elapsed_ms(t0) - send_ms;
    match response {
        Ok(resp) => {
            let status = match resp.status() {
                StatusCode::OK => RequestStatus::Ok,
                StatusCode::TOO_MANY_REQUESTS => RequestStatus::Throttled,
                StatusCode::GATEWAY_TIMEOUT => RequestStatus::Timeout,
                _ => RequestStatus::Error,
            };
            let header_f64 = |name: &str| {
                resp.headers().get(name).and_then(|v| v.to_str().ok()).and_then(|v| v.parse().ok())
            };
            let exec_ms =
                if status == RequestStatus::Ok { header_f64(HEADER_EXEC_MS) } else { None };
            let total_ms = header_f64(HEADER_TOTAL_MS).unwrap_or(wall_total);
            let cold = resp
                .headers()
                .get(HEADER_COLD)
                .and_then(|v| v.to_str().ok())
                .is_some_and(|v| v == "1");
            let instance = resp
                .headers()
                .get(HEADER_INSTANCE)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.parse().ok());
            // Drain the body so the connection returns to the pool.
            let _ = resp.bytes().await;
            RequestRecord { ts_ms: send_ms, status, exec_ms, total_ms, cold, instance }
        }
        Err(_) => RequestRecord {
            ts_ms: send_ms,
            status: RequestStatus::Error,
            exec_ms: None,
            total_ms: wall_total,
            cold: false,
            instance: None,
        },
    }
}

fn elapsed_ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

async fn sleep_until_ms(t0: Instant, at_ms: f64) {
    let now = elapsed_ms(t0);
    if at_ms > now {
        tokio::time::sleep(Duration::from_secs_f64((at_ms - now) / 1e3)).await;
    }
}
