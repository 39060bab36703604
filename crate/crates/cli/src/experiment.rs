//! `fncap experiment`: sweep the memory x concurrency grid for one target
//! function. Each cell gets a fresh simulator, a sandboxed deployment, a
//! stepped VU load, and a metrics CSV; a failing cell is recorded and the
//! sweep moves on.

use std::fs;
use std::path::{Path, PathBuf};

use fncap_core::{expand_grid, DeploymentConfig, TestPlan, VuRange};
use fncap_load::{percentile, run_load, throughput, LoadOptions, LoadStage};
use fncap_metrics::{collect_series, write_csv};
use fncap_sandbox::{build_sandbox, ExchangeStore};
use fncap_sim::Platform;
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{CellArtifact, CellFailure, RunManifest};
use crate::record::{read_plan, STORE_FILE};
use crate::stream_seed;

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub cells_ok: usize,
    pub cells_failed: usize,
    pub manifest_path: PathBuf,
}

/// Compact per-cell result of the load run, written next to the metrics CSV.
/// All values are virtual-time quantities, so the file is byte-deterministic.
#[derive(Debug, Serialize)]
struct CellSummary {
    function: String,
    memory_mib: u32,
    concurrency: u32,
    windows: usize,
    vu_levels: Vec<u32>,
    requests_total: usize,
    requests_ok: usize,
    requests_throttled: usize,
    requests_failed: usize,
    ok_rps: f64,
    throttle_fraction: f64,
    exec_p95_ms: Option<f64>,
}

/// Make file-name-safe labels out of function names.
pub fn safe_name(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

pub fn metrics_rel_path(function: &str, config: DeploymentConfig) -> String {
    format!("metrics/{}-m{}-c{}.csv", safe_name(function), config.memory_mib, config.concurrency)
}

fn summary_rel_path(function: &str, config: DeploymentConfig) -> String {
    format!("logs/{}-m{}-c{}.json", safe_name(function), config.memory_mib, config.concurrency)
}

/// The VU level held during window `i` of `n`: evenly spaced steps from the
/// plan's minimum to its maximum.
fn vu_level(vus: VuRange, i: usize, n: usize) -> u32 {
    if n <= 1 || vus.max == vus.min {
        return vus.max;
    }
    let span = f64::from(vus.max - vus.min);
    vus.min + (span * i as f64 / (n - 1) as f64).round() as u32
}

/// One warmup window at the minimum level, then one VU step per sampling
/// window: a short ramp into the level and a hold for the rest of the
/// window, so ~90% of every window runs at a constant load.
fn experiment_stages(plan: &TestPlan) -> (Vec<LoadStage>, Vec<u32>) {
    let interval_s = plan.sampling_interval_s as f64;
    let windows = (plan.duration_s / plan.sampling_interval_s) as usize;
    let mut stages = vec![LoadStage::new(interval_s, plan.vus.min)];
    let mut levels = Vec::with_capacity(windows);
    for i in 0..windows {
        let level = vu_level(plan.vus, i, windows);
        stages.push(LoadStage::new(interval_s * 0.1, level));
        stages.push(LoadStage::new(interval_s * 0.9, level));
        levels.push(level);
    }
    (stages, levels)
}

/// Run one grid cell on its own simulator and write its two artifacts.
/// Errors come back as strings: the caller records them and keeps going.
fn run_cell(
    plan: &TestPlan,
    target: &str,
    store: &ExchangeStore,
    config: DeploymentConfig,
    cell_seed: u64,
    out: &Path,
) -> Result<CellArtifact, String> {
    let mut platform = Platform::new(cell_seed);
    build_sandbox(&mut platform, &plan.app, target, store, config)
        .map_err(|e| format!("sandbox: {e}"))?;

    let (stages, vu_levels) = experiment_stages(plan);
    let log = run_load(&mut platform, target, &stages, &LoadOptions::default())
        .map_err(|e| format!("load: {e}"))?;

    // The warmup window absorbs the cold starts and the ramp from zero;
    // metrics begin with the first stepped window.
    let interval_ms = plan.sampling_interval_ms();
    let end_ms = interval_ms * (1.0 + vu_levels.len() as f64);
    let samples = collect_series(&platform, target, interval_ms, end_ms, interval_ms)
        .map_err(|e| format!("metrics: {e}"))?;

    let metrics_csv = metrics_rel_path(target, config);
    let file = fs::File::create(out.join(&metrics_csv)).map_err(|e| e.to_string())?;
    write_csv(&samples, file).map_err(|e| format!("writing metrics: {e}"))?;

    let steady = log.slice(interval_ms, end_ms);
    let counts = throughput(steady, (end_ms - interval_ms) / 1000.0);
    let summary = CellSummary {
        function: target.to_string(),
        memory_mib: config.memory_mib,
        concurrency: config.concurrency,
        windows: samples.len(),
        vu_levels,
        requests_total: counts.total,
        requests_ok: counts.ok,
        requests_throttled: counts.throttled,
        requests_failed: counts.failed,
        ok_rps: counts.ok_rps,
        throttle_fraction: counts.throttle_fraction,
        exec_p95_ms: percentile(steady, 0.95).ok(),
    };
    let load_summary = summary_rel_path(target, config);
    let text = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    fs::write(out.join(&load_summary), text + "\n").map_err(|e| e.to_string())?;

    Ok(CellArtifact {
        function: target.to_string(),
        memory_mib: config.memory_mib,
        concurrency: config.concurrency,
        metrics_csv,
        load_summary,
    })
}

pub fn cmd_experiment(
    plan_path: &Path,
    out: &Path,
    target: &str,
    seed: Option<u64>,
    parallel: usize,
) -> Result<ExperimentOutcome, CliError> {
    let (plan, digest) = read_plan(plan_path)?;
    let seed = seed.unwrap_or(plan.seed);
    if plan.app.function(target).is_none() {
        let known: Vec<&str> = plan.app.functions.iter().map(|f| f.name.as_str()).collect();
        return Err(CliError::validation(format!(
            "unknown target {target:?}; the plan declares [{}]",
            known.join(", ")
        )));
    }

    let store_path = out.join(STORE_FILE);
    let store = if store_path.exists() {
        let file = fs::File::open(&store_path)?;
        ExchangeStore::load(file)
            .map_err(|e| CliError::runtime(format!("{}: {e}", store_path.display())))?
    } else {
        ExchangeStore::new()
    };

    // Fail before the sweep if the sandbox cannot be built at all: every
    // direct callee of the target needs at least one recording.
    let frozen = store.freeze();
    let missing: Vec<String> = plan
        .app
        .callees(target)
        .into_iter()
        .map(|e| e.callee.clone())
        .filter(|callee| !frozen.has_callee(callee))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::validation(format!(
            "no recorded exchanges for [{}]; run `fncap record` into the same --out first",
            missing.join(", ")
        )));
    }

    fs::create_dir_all(out.join("metrics"))?;
    fs::create_dir_all(out.join("logs"))?;

    let grid = expand_grid(&plan);
    let workers = parallel.max(1).min(grid.len().max(1));
    let mut results: Vec<(usize, Result<CellArtifact, String>)> = if workers <= 1 {
        grid.iter()
            .enumerate()
            .map(|(idx, &config)| {
                let cell_seed = stream_seed(seed, &format!("cell-{idx}"));
                (idx, run_cell(&plan, target, &store, config, cell_seed, out))
            })
            .collect()
    } else {
        // Cells are independent simulator instances; round-robin them over
        // the workers. Seeds depend on the grid index alone, so the bytes
        // written never depend on the schedule.
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let plan = &plan;
                    let store = &store;
                    let grid = &grid;
                    scope.spawn(move || {
                        grid.iter()
                            .enumerate()
                            .skip(w)
                            .step_by(workers)
                            .map(|(idx, &config)| {
                                let cell_seed = stream_seed(seed, &format!("cell-{idx}"));
                                (idx, run_cell(plan, target, store, config, cell_seed, out))
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("experiment worker panicked"))
                .collect()
        })
    };
    results.sort_by_key(|(idx, _)| *idx);

    let mut manifest = RunManifest::open_or_new(out, &digest, seed)?;
    if store_path.exists() {
        manifest.exchange_store = Some(STORE_FILE.to_string());
    }
    manifest.cells.retain(|c| c.function != target);
    manifest.failures.clear();
    let mut first_error = None;
    for (idx, result) in results {
        let config = grid[idx];
        match result {
            Ok(cell) => {
                println!(
                    "cell {}/{} m={} c={}: ok -> {}",
                    idx + 1,
                    grid.len(),
                    config.memory_mib,
                    config.concurrency,
                    cell.metrics_csv
                );
                manifest.cells.push(cell);
            }
            Err(error) => {
                eprintln!(
                    "cell {}/{} m={} c={}: FAILED: {error}",
                    idx + 1,
                    grid.len(),
                    config.memory_mib,
                    config.concurrency
                );
                first_error.get_or_insert_with(|| error.clone());
                manifest.failures.push(CellFailure {
                    memory_mib: config.memory_mib,
                    concurrency: config.concurrency,
                    error,
                });
            }
        }
    }
    let cells_ok = manifest.cells.iter().filter(|c| c.function == target).count();
    let cells_failed = manifest.failures.len();
    manifest.save(out)?;

    if cells_ok == 0 {
        return Err(CliError::runtime(format!(
            "all {} grid cells failed; first error: {}",
            grid.len(),
            first_error.unwrap_or_default()
        )));
    }
    Ok(ExperimentOutcome { cells_ok, cells_failed, manifest_path: RunManifest::path_in(out) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vu_levels_step_evenly_from_min_to_max() {
        let vus = VuRange { min: 5, max: 45 };
        let levels: Vec<u32> = (0..5).map(|i| vu_level(vus, i, 5)).collect();
        assert_eq!(levels, vec![5, 15, 25, 35, 45]);
        assert_eq!(vu_level(vus, 0, 1), 45);
    }

    #[test]
    fn stages_tile_the_duration_plus_one_warmup_window() {
        let mut plan = fncap_core::demo::demo_plan();
        plan.duration_s = 180;
        plan.sampling_interval_s = 60;
        let (stages, levels) = experiment_stages(&plan);
        assert_eq!(levels.len(), 3);
        assert_eq!(stages.len(), 1 + 2 * 3);
        let total_s: f64 = stages.iter().map(|s| s.duration_s).sum();
        assert!((total_s - 240.0).abs() < 1e-9);
    }

    #[test]
    fn hostile_function_names_become_safe_file_names() {
        assert_eq!(safe_name("lr-prediction"), "lr-prediction");
        assert_eq!(safe_name("a/b c"), "a_b_c");
    }
}
