//! Sandbox assembly: the target function plus replaying mocks.

use std::collections::BTreeSet;
use std::sync::Arc;

use fncap_core::{ApplicationGraph, DeploymentConfig, FunctionProfile};
use fncap_sim::{Behavior, Platform};

use crate::error::SandboxError;
use crate::store::{ExchangeStore, FrozenStore, ReplayStats};

/// Mock service time. Not zero: a mock still occupies an instance slot for
/// an instant, so queueing around the target stays realistic, but it is
/// negligible next to any real function.
pub const MOCK_LATENCY_MS: f64 = 1.0;

/// A deployed sandbox: which function is under test and who got mocked.
#[derive(Debug)]
pub struct SandboxPlan {
    pub target: String,
    /// Exactly the direct callees of the target in the graph.
    pub mocked_neighbors: BTreeSet<String>,
    store: Arc<FrozenStore>,
}

impl SandboxPlan {
    /// Exact-hit versus fallback counts accumulated by the mocks so far.
    pub fn replay_stats(&self) -> ReplayStats {
        self.store.stats()
    }

    /// What a mock would answer; see [`FrozenStore::lookup`].
    pub fn mock_lookup(&self, callee: &str, payload: &[u8]) -> Result<Vec<u8>, SandboxError> {
        self.store.lookup(callee, payload)
    }
}

/// Deploy `target` unchanged at `config`, plus one replaying mock per
/// direct callee. Indirect callees are not deployed at all; the mocks never
/// call further downstream. Fails without touching the platform if any
/// direct callee has no recording in `store`.
pub fn build_sandbox(
    platform: &mut Platform,
    app: &ApplicationGraph,
    target: &str,
    store: &ExchangeStore,
    config: DeploymentConfig,
) -> Result<SandboxPlan, SandboxError> {
    let profile = app
        .function(target)
        .ok_or_else(|| SandboxError::UnknownFunction(target.to_string()))?
        .clone();
    let edges: Vec<_> = app.callees(target).into_iter().cloned().collect();
    let neighbors: BTreeSet<String> = edges.iter().map(|e| e.callee.clone()).collect();

    let frozen = Arc::new(store.freeze());
    for callee in &neighbors {
        if !frozen.has_callee(callee) {
            return Err(SandboxError::MissingRecording(callee.clone()));
        }
    }

    let behavior =
        if edges.is_empty() { Behavior::Compute } else { Behavior::Workflow(edges.clone()) };
    platform.deploy(profile, config, behavior)?;

    for callee in &neighbors {
        let mock_profile = FunctionProfile::new(callee, MOCK_LATENCY_MS)
            .with_cold_start(0.0)
            .with_noise_sigma(0.0)
            .with_idle_timeout_s(f64::INFINITY);
        let lookup_store = Arc::clone(&frozen);
        let lookup_callee = callee.clone();
        platform.deploy(
            mock_profile,
            // Effectively unlimited: mocks must never be the bottleneck.
            DeploymentConfig::new(128, 1_000_000),
            Behavior::Replay {
                latency_ms: MOCK_LATENCY_MS,
                lookup: Box::new(move |payload| {
                    lookup_store
                        .lookup(&lookup_callee, payload)
                        .expect("coverage was validated when the sandbox was built")
                }),
            },
        )?;
    }

    Ok(SandboxPlan { target: target.to_string(), mocked_neighbors: neighbors, store: frozen })
}
