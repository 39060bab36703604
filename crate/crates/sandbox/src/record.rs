//! Recording runs: capture every inter-function exchange of an application.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use fncap_core::ApplicationGraph;
use fncap_sim::Platform;

use crate::error::SandboxError;
use crate::store::ExchangeStore;

/// What a recording run produced.
#[derive(Debug)]
pub struct RecordingReport {
    pub store: ExchangeStore,
    /// Graph edges that fired at least once.
    pub exercised: BTreeSet<(String, String)>,
    /// Graph edges with zero recordings. Non-empty means the entry payload
    /// (or a timeout) left part of the application dark; sandboxes for
    /// those callers cannot be built from this store.
    pub unexercised: Vec<(String, String)>,
}

/// Drive one request through the fully deployed application and capture
/// every downstream exchange. The platform must already have every graph
/// function deployed (see `Platform::deploy_app`); the run starts at the
/// platform's current clock and continues until all activity (including
/// fire-and-forget branches) settles.
pub fn record_run(
    platform: &mut Platform,
    app: &ApplicationGraph,
    entry_payload: &[u8],
) -> Result<RecordingReport, SandboxError> {
    let entry = app
        .entry()
        .ok_or_else(|| SandboxError::UnknownFunction("<no entry function>".to_string()))?;
    for function in &app.functions {
        if platform.config(&function.name).is_none() {
            return Err(SandboxError::UnknownFunction(function.name.clone()));
        }
    }

    let store = ExchangeStore::new();
    let exercised: Arc<Mutex<BTreeSet<(String, String)>>> = Arc::default();
    {
        let store = store.clone();
        let exercised = Arc::clone(&exercised);
        platform.set_exchange_tap(Box::new(move |exchange| {
            store.record(exchange.callee, exchange.payload, exchange.response, exchange.at_ms);
            exercised
                .lock()
                .unwrap()
                .insert((exchange.caller.to_string(), exchange.callee.to_string()));
        }));
    }

    let at = platform.clock_ms();
    platform.submit(&entry.name, entry_payload.to_vec(), at)?;
    platform.run_to_idle();
    platform.clear_exchange_tap();

    let exercised = Arc::try_unwrap(exercised)
        .expect("tap was dropped with the platform borrow")
        .into_inner()
        .unwrap();
    let unexercised = app
        .edges
        .iter()
        .map(|e| (e.caller.clone(), e.callee.clone()))
        .filter(|pair| !exercised.contains(pair))
        .collect();

    Ok(RecordingReport { store, exercised, unexercised })
}
