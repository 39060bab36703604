//! `fncap record`: capture the inter-function exchanges of the full
//! application so later experiments can sandbox any one function.

use std::fs;
use std::path::{Path, PathBuf};

use fncap_core::{parse_test_plan, DeploymentConfig, TestPlan};
use fncap_load::LoadOptions;
use fncap_sandbox::record_run;
use fncap_sim::Platform;

use crate::error::CliError;
use crate::manifest::RunManifest;

pub const STORE_FILE: &str = "exchanges.json";

#[derive(Debug)]
pub struct RecordOutcome {
    pub store_path: PathBuf,
    pub exchanges: usize,
    pub callees: usize,
    /// Graph edges that never fired during the recording run.
    pub unexercised: Vec<(String, String)>,
}

/// Read and validate the plan file. Unreadable or invalid plans are
/// validation failures: the file is user input.
pub fn read_plan(plan_path: &Path) -> Result<(TestPlan, String), CliError> {
    let bytes = fs::read(plan_path).map_err(|e| {
        CliError::validation(format!("cannot read plan {}: {e}", plan_path.display()))
    })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::validation(format!("{} is not UTF-8", plan_path.display())))?;
    let plan = parse_test_plan(&text)?;
    Ok((plan, crate::manifest::plan_digest(&bytes)))
}

/// The configuration used for recording runs: the most generous cell of the
/// grid, so recording itself never throttles or starves a function.
fn recording_config(plan: &TestPlan) -> DeploymentConfig {
    let memory = *plan.memory_mib.iter().max().expect("validated plans have a memory grid");
    let concurrency = *plan.concurrency.iter().max().expect("validated plans have a grid");
    DeploymentConfig::new(memory, concurrency).with_timeout(plan.timeout_ms)
}

pub fn cmd_record(plan_path: &Path, out: &Path, seed: Option<u64>) -> Result<RecordOutcome, CliError> {
    let (plan, digest) = read_plan(plan_path)?;
    let seed = seed.unwrap_or(plan.seed);
    fs::create_dir_all(out)?;

    let mut platform = Platform::new(seed);
    platform
        .deploy_app(&plan.app, recording_config(&plan))
        .map_err(|e| CliError::runtime(format!("deploying the application: {e}")))?;

    // Record with the same payload the load generator sends, so replay
    // lookups during later experiments hit the store directly.
    let payload = LoadOptions::default().payload;
    let report = record_run(&mut platform, &plan.app, &payload)
        .map_err(|e| CliError::runtime(format!("recording run: {e}")))?;

    let store_path = out.join(STORE_FILE);
    let file = fs::File::create(&store_path)?;
    report
        .store
        .save(file)
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", store_path.display())))?;

    let mut manifest = RunManifest::open_or_new(out, &digest, seed)?;
    manifest.exchange_store = Some(STORE_FILE.to_string());
    manifest.save(out)?;

    Ok(RecordOutcome {
        store_path,
        exchanges: report.store.len(),
        callees: report.store.callees().len(),
        unexercised: report.unexercised,
    })
}
