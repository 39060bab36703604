//! The HTTP load backend against a live platform server.

use fncap_core::{DeploymentConfig, FunctionProfile};
use fncap_load::{run_load_http, throughput, LoadOptions, LoadStage, RequestStatus};
use fncap_sim::{http::serve, Behavior, Platform};

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn five_hundred_vus_sustain_load_without_errors() {
    let mut platform = Platform::new(7);
    let profile = FunctionProfile::new("echo", 20.0).with_noise_sigma(0.0).with_cold_start(0.0);
    // Saturation memory, so the 20 ms base is the actual service time.
    platform.deploy(profile, DeploymentConfig::new(2048, 600), Behavior::Compute).unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", server.addr);

    // Jump straight to 500 VUs and hold for two seconds of wall time.
    let stages = [LoadStage::new(0.2, 500), LoadStage::new(2.0, 500)];
    let log = run_load_http(&base, "echo", &stages, &LoadOptions::default()).await.unwrap();
    server.shutdown().await;

    let t = throughput(log.records(), 2.2);
    assert_eq!(t.failed + t.throttled, 0, "no throttles or errors expected: {t:?}");
    // 500 VUs looping on a 20 ms service should put four digits of requests
    // through even with client-side overhead.
    assert!(t.ok >= 1000, "only {} requests completed", t.ok);

    // Virtual execution time travels back through the response headers.
    let sample = log.records().iter().find(|r| r.status == RequestStatus::Ok).unwrap();
    let exec = sample.exec_ms.unwrap();
    assert!((exec - 20.0).abs() < 1e-6, "server-reported exec {exec} should be exactly 20 ms");
    assert!(sample.instance.is_some());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn unknown_function_logs_errors_instead_of_aborting() {
    let mut platform = Platform::new(7);
    let profile = FunctionProfile::new("echo", 20.0);
    platform.deploy(profile, DeploymentConfig::new(1024, 4), Behavior::Compute).unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", server.addr);

    let stages = [LoadStage::new(1.0, 2)];
    let opts = LoadOptions { error_backoff_ms: 50.0, ..Default::default() };
    let log = run_load_http(&base, "no-such-function", &stages, &opts).await.unwrap();
    server.shutdown().await;

    assert!(!log.is_empty(), "the VUs should keep retrying through 404s");
    assert!(log.records().iter().all(|r| r.status == RequestStatus::Error));
    assert!(log.records().iter().all(|r| r.exec_ms.is_none() && r.instance.is_none()));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn throttles_surface_as_429_records() {
    let mut platform = Platform::new(3);
    let profile = FunctionProfile::new("narrow", 200.0).with_noise_sigma(0.0);
    platform.deploy(profile, DeploymentConfig::new(512, 1), Behavior::Compute).unwrap();
    let server = serve(platform, "127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", server.addr);

    let stages = [LoadStage::new(0.1, 4), LoadStage::new(1.5, 4)];
    let log = run_load_http(&base, "narrow", &stages, &LoadOptions::default()).await.unwrap();
    server.shutdown().await;

    let t = throughput(log.records(), 1.6);
    assert!(t.ok > 0, "the single instance should serve something");
    assert!(t.throttled > 0, "four VUs against one instance must throttle");
    assert_eq!(t.failed, 0, "no transport errors expected: {t:?}");
}
