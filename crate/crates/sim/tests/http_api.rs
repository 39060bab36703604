//! End-to-end checks of the HTTP facade against a live socket.

use fncap_core::{DeploymentConfig, FunctionProfile};
use fncap_sim::http::{serve, HEADER_COLD, HEADER_EXEC_MS, HEADER_TOTAL_MS};
use fncap_sim::{Behavior, Platform};

fn quick_leaf(name: &str, base_ms: f64) -> FunctionProfile {
    FunctionProfile::new(name, base_ms).with_noise_sigma(0.0).with_cold_start(0.0)
}

fn header_f64(res: &reqwest::Response, name: &str) -> f64 {
    res.headers()[name].to_str().unwrap().parse().unwrap()
}

#[tokio::test(flavor = "multi_thread")]
async fn invoke_returns_outcome_headers_and_body() {
    let mut platform = Platform::new(1);
    platform
        .deploy(quick_leaf("echo", 20.0), DeploymentConfig::new(2048, 4), Behavior::Compute)
        .unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let url = format!("http://{}/invoke/echo", server.addr);

    let client = reqwest::Client::new();
    let first = client.post(&url).body("{}").send().await.unwrap();
    assert_eq!(first.status(), 200);
    assert_eq!(first.headers()[HEADER_COLD], "1");
    let exec = header_f64(&first, HEADER_EXEC_MS);
    let total = header_f64(&first, HEADER_TOTAL_MS);
    assert!((exec - 20.0).abs() < 0.01, "exec {exec}");
    assert!(total >= exec);
    let body = first.bytes().await.unwrap();
    assert_eq!(body.len(), 256, "default response size");

    let second = client.post(&url).body("{}").send().await.unwrap();
    assert_eq!(second.headers()[HEADER_COLD], "0");

    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn unknown_function_is_404() {
    let server = serve(Platform::new(1), "127.0.0.1:0").await.unwrap();
    let url = format!("http://{}/invoke/ghost", server.addr);
    let res = reqwest::Client::new().post(&url).body("{}").send().await.unwrap();
    assert_eq!(res.status(), 404);
    let res = reqwest::Client::new()
        .get(format!("http://{}/metrics/ghost", server.addr))
        .send()
        .await
        .unwrap();
    assert_eq!(res.status(), 404);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn second_concurrent_request_beyond_the_cap_is_429() {
    let mut platform = Platform::new(1);
    platform
        .deploy(quick_leaf("f", 400.0), DeploymentConfig::new(2048, 1), Behavior::Compute)
        .unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let url = format!("http://{}/invoke/f", server.addr);

    let client = reqwest::Client::new();
    let a = client.post(&url).body("{}").send();
    let b = async {
        // Arrive mid-service of the first request.
        tokio::time::sleep(std::time::Duration::from_millis(100)).await;
        client.post(&url).body("{}").send().await
    };
    let (a, b) = tokio::join!(a, b);
    let mut statuses = [a.unwrap().status().as_u16(), b.unwrap().status().as_u16()];
    statuses.sort_unstable();
    assert_eq!(statuses, [200, 429]);

    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn config_update_changes_observed_durations() {
    let mut platform = Platform::new(1);
    let profile = quick_leaf("f", 100.0).with_saturation_memory(2048);
    platform.deploy(profile, DeploymentConfig::new(256, 2), Behavior::Compute).unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let invoke_url = format!("http://{}/invoke/f", server.addr);
    let config_url = format!("http://{}/config/f", server.addr);

    let client = reqwest::Client::new();
    let slow = client.post(&invoke_url).body("{}").send().await.unwrap();
    assert!((header_f64(&slow, HEADER_EXEC_MS) - 800.0).abs() < 0.01);

    let res = client
        .put(&config_url)
        .body(r#"{"memory_mib": 2048, "concurrency": 2, "timeout_ms": 30000}"#)
        .send()
        .await
        .unwrap();
    assert_eq!(res.status(), 204);

    let fast = client.post(&invoke_url).body("{}").send().await.unwrap();
    assert!((header_f64(&fast, HEADER_EXEC_MS) - 100.0).abs() < 0.01);
    assert_eq!(fast.headers()[HEADER_COLD], "1", "update retires instances");

    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn metrics_endpoint_reports_counters() {
    let mut platform = Platform::new(1);
    platform
        .deploy(quick_leaf("f", 10.0), DeploymentConfig::new(2048, 2), Behavior::Compute)
        .unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let client = reqwest::Client::new();
    for _ in 0..3 {
        client
            .post(format!("http://{}/invoke/f", server.addr))
            .body("{}")
            .send()
            .await
            .unwrap();
    }
    let body = client
        .get(format!("http://{}/metrics/f", server.addr))
        .send()
        .await
        .unwrap()
        .bytes()
        .await
        .unwrap();
    let metrics: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(metrics["invocations"], 3);
    assert_eq!(metrics["completions"], 3);
    assert_eq!(metrics["cold_starts"], 1);
    server.shutdown().await;
}
