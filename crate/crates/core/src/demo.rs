//! A ready-made eight-function demo application and test plan. Used by the
//! CLI's `plan-template` subcommand and throughout the test suites.
//!
//! The workflow: a lightweight HTTP entry fans into a compute-heavy chain
//! (primes -> {linpack, dd} -> gzip -> lr-prediction) and a web chain
//! (web-endpoint -> sentiment), mixing fast and slow profiles so the
//! resulting models face heterogeneous behavior.

use crate::types::{
    ApplicationGraph, CallEdge, CallMode, FunctionProfile, Slo, TestPlan, VuRange,
};

/// Eight heterogeneous synthetic functions wired as a single-entry DAG.
pub fn demo_application() -> ApplicationGraph {
    let profile = |name: &str, base_ms: f64, cold_ms: f64, util: f64| {
        let mut p = FunctionProfile::new(name, base_ms).with_cold_start(cold_ms);
        p.memory_utilization = util;
        p
    };

    let functions = vec![
        profile("nodeinfo", 40.0, 200.0, 0.35),
        profile("primes", 250.0, 250.0, 0.55),
        profile("linpack", 180.0, 250.0, 0.70),
        profile("dd", 120.0, 250.0, 0.50),
        profile("gzip", 300.0, 250.0, 0.75),
        profile("lr-prediction", 350.0, 300.0, 0.80),
        profile("web-endpoint", 30.0, 150.0, 0.30),
        profile("sentiment", 90.0, 220.0, 0.45),
    ];

    let edge = |caller: &str, callee: &str, mode: CallMode, position: u32| CallEdge {
        caller: caller.into(),
        callee: callee.into(),
        mode,
        position,
    };

    let edges = vec![
        edge("nodeinfo", "primes", CallMode::Sync, 0),
        edge("nodeinfo", "web-endpoint", CallMode::Sync, 1),
        edge("primes", "linpack", CallMode::Async, 0),
        edge("primes", "dd", CallMode::Async, 1),
        edge("dd", "gzip", CallMode::Sync, 0),
        edge("gzip", "lr-prediction", CallMode::Sync, 0),
        edge("web-endpoint", "sentiment", CallMode::Sync, 0),
    ];

    ApplicationGraph { functions, edges }
}

/// The default experiment plan: the 5 x 5 memory/concurrency grid over the
/// demo application.
pub fn demo_plan() -> TestPlan {
    TestPlan {
        memory_mib: vec![256, 512, 1024, 2048, 4096],
        concurrency: vec![10, 20, 30, 40, 50],
        duration_s: 120,
        vus: VuRange { min: 5, max: 300 },
        slo: Slo::p95(4000.0),
        seed: 42,
        sampling_interval_s: 60,
        timeout_ms: 30_000,
        app: demo_application(),
    }
}
