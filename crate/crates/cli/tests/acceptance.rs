//! The exit gate for the whole workspace: one test per pipeline guarantee,
//! each printing a PASS or FAIL line with the numbers it saw (run with
//! `--nocapture` to watch them scroll by).
//!
//! The guarantees cover both halves of the system. The platform half:
//! measured capacity agrees with the closed-form ceiling, scales linearly
//! in the concurrency cap, saturates with memory where the duration model
//! saturates, and needs fewer simultaneous instances as memory grows. The
//! pipeline half: models trained on grid experiments generalize to held-out
//! cells, the families obey their algebraic identities, sandboxing actually
//! isolates a target from its neighbors, reruns are byte-identical, and the
//! statistics in the preprocessing path match brute-force reimplementations.

use std::fs;
use std::time::Instant;

use fncap_cli::{cmd_experiment, cmd_record, cmd_train};
use fncap_core::demo::{demo_application, demo_plan};
use fncap_core::stats::{mean, percentile_nearest_rank, simple_linear_fit};
use fncap_core::{
    serialize_test_plan, ApplicationGraph, CallEdge, CallMode, DeploymentConfig, FunctionProfile,
    Slo, TestPlan, VuRange,
};
use fncap_estimate::{ideal_capacity, measure_capacity, EstimateError, MeasureOptions};
use fncap_load::{percentile, ramp_and_hold, run_load, LoadOptions, RequestStatus};
use fncap_model::{
    fit_family, preprocess, r2_score, DatasetOf, DnnInit, FamilyConfig, Mlp,
};
use fncap_sandbox::{build_sandbox, record_run, ExchangeStore};
use fncap_sim::{duration_model, timeline_average, Behavior, Platform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

/// Print the verdict line for one criterion, then enforce it.
fn check(criterion: &str, ok: bool, detail: String) {
    println!("{}: {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{criterion}: {detail}");
}

/// A platform with a single deployed compute function, for capacity probes.
fn solo_platform(
    profile: &FunctionProfile,
    config: DeploymentConfig,
    seed: u64,
) -> Result<Platform, EstimateError> {
    let mut platform = Platform::new(seed);
    platform
        .deploy(profile.clone(), config, Behavior::Compute)
        .map_err(|e| EstimateError::Setup(e.to_string()))?;
    Ok(platform)
}

#[test]
fn measured_capacity_matches_the_arithmetic_ideal() {
    // Ten deterministic 100 ms instances serve exactly 100 requests per
    // second; the load search has to find that number from the outside,
    // within 10%, in under five seconds of wall time.
    let profile = FunctionProfile::new("f", 100.0).with_noise_sigma(0.0).with_cold_start(0.0);
    let config = DeploymentConfig::new(2048, 10);
    let ideal = ideal_capacity(100.0, 10, 1000.0);

    let options = MeasureOptions {
        vu_low: 1,
        vu_high: 40,
        probe_duration_s: 120.0,
        ..MeasureOptions::default()
    };
    let started = Instant::now();
    let measurement = measure_capacity(
        || solo_platform(&profile, config, 7),
        "f",
        Slo::p95(150.0),
        &options,
    )
    .expect("the capacity search completes");
    let elapsed = started.elapsed().as_secs_f64();

    let fc = measurement.estimate.fc_rps;
    let ok = (fc - ideal).abs() <= 0.10 * ideal && elapsed < 5.0;
    check(
        "noiseless measured capacity matches floor(interval / exec) x concurrency",
        ok,
        format!("measured {fc:.1} rps vs ideal {ideal:.0} rps in {elapsed:.2}s"),
    );
}

#[test]
fn capacity_scales_linearly_with_concurrency() {
    // At a fixed 256 MiB, capacity is bounded by the instance cap alone, so
    // sweeping the cap should trace a straight line for every profile in
    // the demo application. The whole sweep must stay under a minute.
    let app = demo_application();
    let started = Instant::now();

    let mut worst = ("-".to_string(), f64::INFINITY);
    for profile in &app.functions {
        // Twice the modeled service time leaves the SLO slack, so the
        // search is throttle-bound and capacity tracks the cap.
        let slo = Slo::p95(2.0 * duration_model(profile, 256));
        let mut caps = Vec::new();
        let mut rates = Vec::new();
        for c in [10u32, 20, 30, 40, 50] {
            let config = DeploymentConfig::new(256, c);
            let options = MeasureOptions {
                vu_low: 1,
                vu_high: 2 * c + 20,
                probe_duration_s: 60.0,
                ..MeasureOptions::default()
            };
            let measurement =
                measure_capacity(|| solo_platform(profile, config, 13), &profile.name, slo, &options)
                    .expect("the capacity search completes");
            caps.push(f64::from(c));
            rates.push(measurement.estimate.fc_rps);
        }
        let (_, _, r2) = simple_linear_fit(&caps, &rates).expect("five distinct points");
        if r2 < worst.1 {
            worst = (profile.name.clone(), r2);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();

    let ok = worst.1 >= 0.95 && elapsed < 60.0;
    check(
        "capacity grows linearly in the concurrency cap for every demo profile",
        ok,
        format!("worst linear fit R2 {:.4} ({}) in {elapsed:.1}s", worst.1, worst.0),
    );
}

#[test]
fn execution_time_saturates_with_memory() {
    // Under the duration model, more memory means faster runs until the
    // saturation point, after which both the execution time and the
    // capacity stop moving.
    let profile = FunctionProfile::new("f", 250.0);
    let mut exec_means = Vec::new();
    for mem in [256u32, 512, 1024, 2048, 4096] {
        let mut platform = Platform::new(11);
        platform
            .deploy(profile.clone(), DeploymentConfig::new(mem, 20), Behavior::Compute)
            .expect("deploy succeeds");
        let stages = ramp_and_hold(180.0, 15);
        let log = run_load(&mut platform, "f", &stages, &LoadOptions::default())
            .expect("the load run completes");
        let steady: Vec<f64> = log
            .slice(18_000.0, 180_000.0)
            .iter()
            .filter(|r| r.status == RequestStatus::Ok)
            .filter_map(|r| r.exec_ms)
            .collect();
        exec_means.push(mean(&steady).expect("the steady window has completions"));
    }
    let strictly_faster = exec_means[0] > exec_means[1] && exec_means[1] > exec_means[2];
    let exec_flat = (exec_means[3] - exec_means[4]).abs() / exec_means[3] <= 0.10;

    let mut capacities = Vec::new();
    for mem in [2048u32, 4096] {
        let config = DeploymentConfig::new(mem, 10);
        let slo = Slo::p95(2.0 * duration_model(&profile, mem));
        let options = MeasureOptions {
            vu_low: 1,
            vu_high: 40,
            probe_duration_s: 60.0,
            ..MeasureOptions::default()
        };
        let measurement = measure_capacity(|| solo_platform(&profile, config, 17), "f", slo, &options)
            .expect("the capacity search completes");
        capacities.push(measurement.estimate.fc_rps);
    }
    let capacity_flat = (capacities[0] - capacities[1]).abs() / capacities[0] <= 0.10;

    let ok = strictly_faster && exec_flat && capacity_flat;
    check(
        "execution time falls with memory and flattens past the saturation point",
        ok,
        format!(
            "means {:?} ms, post-saturation capacity {:.1} vs {:.1} rps",
            exec_means.iter().map(|m| m.round()).collect::<Vec<_>>(),
            capacities[0],
            capacities[1]
        ),
    );
}

#[test]
fn instance_count_economizes_with_memory() {
    // At a fixed 50 requests per second of open-loop load, faster (larger)
    // deployments hold each request for less time, so the time-averaged
    // number of busy instances must not rise as memory grows.
    let profile = FunctionProfile::new("f", 100.0).with_noise_sigma(0.0).with_cold_start(0.0);
    let mut averages = Vec::new();
    for mem in [256u32, 512, 1024, 2048, 4096] {
        let mut platform = Platform::new(5);
        platform
            .deploy(profile.clone(), DeploymentConfig::new(mem, 64), Behavior::Compute)
            .expect("deploy succeeds");
        for i in 0..6000u64 {
            // 50 rps for two minutes, one request every 20 ms.
            platform.submit("f", b"{}".to_vec(), i as f64 * 20.0).expect("submit succeeds");
        }
        platform.run_to_idle();
        let timeline = platform.busy_timeline("f").expect("the function has a timeline");
        averages.push(timeline_average(timeline, 0.0, 120_000.0));
    }
    let ok = averages.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    check(
        "time-averaged busy instances never rise with memory at fixed offered load",
        ok,
        format!("averages {:?}", averages.iter().map(|a| (a * 100.0).round() / 100.0).collect::<Vec<_>>()),
    );
}

#[test]
fn pipeline_models_generalize_on_the_demo_app() {
    // The whole pipeline, end to end: record the demo app, run the 5 x 5
    // grid for all eight functions, train every family, and demand that the
    // network and the forest each reach test R2 >= 0.75 on at least six of
    // the eight functions, all inside ten minutes.
    let dir = TempDir::new().expect("temp dir");
    let out = dir.path().join("run");
    let mut plan = demo_plan();
    // Five windows per cell instead of two, and a VU span that saturates
    // the densest cells without drowning the run in events.
    plan.duration_s = 300;
    plan.vus = VuRange { min: 5, max: 150 };
    let plan_path = dir.path().join("plan.yaml");
    fs::write(&plan_path, serialize_test_plan(&plan)).expect("plan written");

    let started = Instant::now();
    cmd_record(&plan_path, &out, None).expect("recording succeeds");
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    for profile in &plan.app.functions {
        cmd_experiment(&plan_path, &out, &profile.name, None, workers)
            .expect("the grid experiment succeeds");
    }
    cmd_train(&out, None, None, false).expect("training succeeds");
    let elapsed = started.elapsed().as_secs_f64();

    let raw = fs::read_to_string(out.join("models/training.json")).expect("training report");
    let rows: Vec<serde_json::Value> = serde_json::from_str(&raw).expect("valid report");
    let score = |function: &str, family: &str| {
        rows.iter()
            .find(|r| r["function"] == function && r["family"] == family)
            .and_then(|r| r["test_r2"].as_f64())
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut dnn_hits = 0;
    let mut rfr_hits = 0;
    let mut detail = Vec::new();
    for profile in &plan.app.functions {
        let dnn = score(&profile.name, "dnn");
        let rfr = score(&profile.name, "rfr");
        if dnn >= 0.75 {
            dnn_hits += 1;
        }
        if rfr >= 0.75 {
            rfr_hits += 1;
        }
        detail.push(format!("{} dnn {dnn:.2} rfr {rfr:.2}", profile.name));
    }

    let ok = dnn_hits >= 6 && rfr_hits >= 6 && elapsed <= 600.0;
    check(
        "network and forest models generalize across the demo grid",
        ok,
        format!(
            "dnn {dnn_hits}/8 and rfr {rfr_hits}/8 at test R2 >= 0.75 in {elapsed:.0}s ({})",
            detail.join(", ")
        ),
    );
}

#[test]
fn model_family_identities_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x: Vec<Vec<f64>> =
        (0..40).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|r| 3.0 + 1.5 * r[0] - 0.7 * r[1] + 0.2 * r[2] + rng.random_range(-0.05..0.05))
        .collect();
    let data = DatasetOf::new(x, y).expect("well-formed dataset");

    let coefficients = |config: &FamilyConfig| {
        fit_family(&data, config, 1)
            .expect("the fit succeeds")
            .raw_linear_coefficients()
            .expect("a linear-shaped model")
    };
    let gap = |(ai, a_s): &(f64, Vec<f64>), (bi, bs): &(f64, Vec<f64>)| {
        a_s.iter()
            .zip(bs)
            .map(|(a, b)| (a - b).abs())
            .fold((ai - bi).abs(), f64::max)
    };
    let ols = coefficients(&FamilyConfig::Linear);
    let ridge_gap = gap(&ols, &coefficients(&FamilyConfig::Ridge { lambda: 0.0 }));
    let poly_gap = gap(&ols, &coefficients(&FamilyConfig::Polynomial { degree: 1 }));

    let perfect = r2_score(&data.y, &data.y).expect("scorable");
    let y_mean = mean(&data.y).expect("non-empty");
    let at_mean = r2_score(&data.y, &vec![y_mean; data.len()]).expect("scorable");
    // Half the squared error of the mean predictor: residuals 1 and 0
    // against a total spread of 2.
    let halfway = r2_score::<f64>(&[0.0, 2.0], &[1.0, 2.0]).expect("scorable");

    let mut net: Mlp<f64> = Mlp::new(&[4, 8, 6, 1], DnnInit::He, &mut rng);
    let xs: Vec<Vec<f64>> =
        (0..8).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let ys: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, analytic) = net.batch_gradients(&xs, &ys);
    let h = 1e-5;
    let mut grad_err: f64 = 0.0;
    for p in 0..net.num_params() {
        let orig = net.get_param(p);
        net.set_param(p, orig + h);
        let up = net.batch_loss(&xs, &ys);
        net.set_param(p, orig - h);
        let down = net.batch_loss(&xs, &ys);
        net.set_param(p, orig);
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[p].abs().max(numeric.abs()).max(1e-8);
        grad_err = grad_err.max((analytic[p] - numeric).abs() / scale);
    }

    let ok = ridge_gap <= 1e-9
        && poly_gap <= 1e-9
        && (perfect - 1.0).abs() <= 1e-12
        && at_mean.abs() <= 1e-12
        && (halfway - 0.5).abs() <= 1e-12
        && grad_err <= 1e-4;
    check(
        "ridge at zero is least squares, degree one is linear, R2 and gradients check out",
        ok,
        format!(
            "ridge gap {ridge_gap:.2e}, poly gap {poly_gap:.2e}, R2 ({perfect}, {at_mean}, \
             {halfway}), worst gradient error {grad_err:.2e}"
        ),
    );
}

fn neighbor_app(dep_ms: f64) -> ApplicationGraph {
    ApplicationGraph {
        functions: vec![
            FunctionProfile::new("front", 100.0).with_cold_start(0.0),
            FunctionProfile::new("dep", dep_ms).with_cold_start(0.0),
        ],
        edges: vec![CallEdge {
            caller: "front".into(),
            callee: "dep".into(),
            mode: CallMode::Sync,
            position: 0,
        }],
    }
}

fn front_p95(app: &ApplicationGraph, store: Option<&ExchangeStore>) -> f64 {
    let config = DeploymentConfig::new(2048, 20);
    let mut platform = Platform::new(3);
    match store {
        Some(store) => {
            build_sandbox(&mut platform, app, "front", store, config)
                .expect("the sandbox builds");
        }
        None => platform.deploy_app(app, config).expect("the app deploys"),
    }
    let stages = ramp_and_hold(120.0, 10);
    let log =
        run_load(&mut platform, "front", &stages, &LoadOptions::default()).expect("load runs");
    percentile(log.slice(12_000.0, 120_000.0), 0.95).expect("the steady window has completions")
}

#[test]
fn sandboxing_isolates_the_target_from_slow_neighbors() {
    // Slowing the only callee down 10x must barely register on a sandboxed
    // target (its callee is a canned mock) while blowing up the unsandboxed
    // one (a sync call waits for the real callee).
    let fast = neighbor_app(400.0);
    let slow = neighbor_app(4000.0);

    let mut recorder = Platform::new(3);
    recorder.deploy_app(&fast, DeploymentConfig::new(2048, 20)).expect("the app deploys");
    let recording = record_run(&mut recorder, &fast, &LoadOptions::default().payload)
        .expect("the recording run completes");

    let raw_fast = front_p95(&fast, None);
    let raw_slow = front_p95(&slow, None);
    let boxed_fast = front_p95(&fast, Some(&recording.store));
    let boxed_slow = front_p95(&slow, Some(&recording.store));

    let raw_shift = (raw_slow - raw_fast).abs() / raw_fast;
    let boxed_shift = (boxed_slow - boxed_fast).abs() / boxed_fast;
    let ok = boxed_shift < 0.02 && raw_shift > 0.50;
    check(
        "a 10x slower neighbor moves sandboxed p95 by <2% but unsandboxed p95 by >50%",
        ok,
        format!(
            "sandboxed p95 {boxed_fast:.0} -> {boxed_slow:.0} ms ({:.2}%), unsandboxed \
             {raw_fast:.0} -> {raw_slow:.0} ms ({:.0}%)",
            boxed_shift * 100.0,
            raw_shift * 100.0
        ),
    );
}

#[test]
fn identical_plans_and_seeds_reproduce_metric_bytes() {
    let dir = TempDir::new().expect("temp dir");
    let plan = TestPlan {
        memory_mib: vec![256, 1024, 4096],
        concurrency: vec![2, 8],
        duration_s: 240,
        vus: VuRange { min: 2, max: 16 },
        slo: Slo::p95(4000.0),
        seed: 9,
        sampling_interval_s: 60,
        timeout_ms: 30_000,
        app: ApplicationGraph {
            functions: vec![FunctionProfile::new("solo", 60.0)],
            edges: vec![],
        },
    };
    let plan_path = dir.path().join("plan.yaml");
    fs::write(&plan_path, serialize_test_plan(&plan)).expect("plan written");

    let read_metrics = |out: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out.join("metrics"))
            .expect("metrics dir exists")
            .map(|entry| {
                let entry = entry.expect("readable entry");
                (
                    entry.file_name().to_string_lossy().into_owned(),
                    fs::read(entry.path()).expect("readable file"),
                )
            })
            .collect();
        files.sort();
        files
    };

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");
    cmd_experiment(&plan_path, &out_a, "solo", None, 1).expect("run a succeeds");
    cmd_experiment(&plan_path, &out_b, "solo", None, 1).expect("run b succeeds");
    cmd_experiment(&plan_path, &out_c, "solo", None, 3).expect("run c succeeds");

    let a = read_metrics(&out_a);
    let ok = !a.is_empty() && a == read_metrics(&out_b) && a == read_metrics(&out_c);
    check(
        "identical plan and seed reproduce every metrics CSV byte for byte",
        ok,
        format!("{} CSV files compared across three runs", a.len()),
    );
}

/// Linear-interpolation quantile, restated from its textbook definition.
fn brute_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = (h.floor() as usize).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[test]
fn percentile_and_fence_preprocessing_match_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);

    let mut percentile_failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=200);
        // Coarse values so ties occur regularly.
        let values: Vec<f64> =
            (0..n).map(|_| rng.random_range(-500i32..=500) as f64 * 0.5).collect();
        let p: f64 = rng.random_range(0.001..=1.0);
        let got = percentile_nearest_rank(&values, p).expect("valid sample");
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
        if got != sorted[rank - 1] {
            percentile_failures += 1;
        }
    }

    let mut fence_failures = 0;
    for case in 0..1000u64 {
        let n = rng.random_range(30..=80);
        let width = rng.random_range(1..=5);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            // A tight cluster with occasional spikes, so the fences cut.
            let spike = |rng: &mut ChaCha8Rng, v: f64| {
                if rng.random_range(0.0..1.0) < 0.05 {
                    v * 20.0
                } else {
                    v
                }
            };
            x.push(
                (0..width)
                    .map(|_| {
                        let v = rng.random_range(-1.0..1.0);
                        spike(&mut rng, v)
                    })
                    .collect::<Vec<f64>>(),
            );
            let v = rng.random_range(10.0..20.0);
            y.push(spike(&mut rng, v));
        }

        // Brute-force fence filter: a row survives when every feature and
        // the target sit inside 1.5 x IQR of their own column.
        let fences = |column: &[f64]| {
            let q1 = brute_quantile(column, 0.25);
            let q3 = brute_quantile(column, 0.75);
            let spread = 1.5 * (q3 - q1);
            (q1 - spread, q3 + spread)
        };
        let column_fences: Vec<(f64, f64)> =
            (0..width).map(|j| fences(&x.iter().map(|r| r[j]).collect::<Vec<_>>())).collect();
        let y_fence = fences(&y);
        let mut expected: Vec<Vec<f64>> = (0..n)
            .filter(|&i| {
                x[i].iter().zip(&column_fences).all(|(&v, &(lo, hi))| v >= lo && v <= hi)
                    && y[i] >= y_fence.0
                    && y[i] <= y_fence.1
            })
            .map(|i| {
                let mut row = x[i].clone();
                row.push(y[i]);
                row
            })
            .collect();

        let data = DatasetOf::new(x, y).expect("well-formed dataset");
        let split = preprocess(&data, case).expect("enough rows");
        let mut actual: Vec<Vec<f64>> = split
            .train
            .x
            .iter()
            .zip(&split.train.y)
            .chain(split.test.x.iter().zip(&split.test.y))
            .map(|(row, &target)| {
                let mut full = row.clone();
                full.push(target);
                full
            })
            .collect();

        let by_row = |a: &Vec<f64>, b: &Vec<f64>| {
            a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        };
        expected.sort_by(by_row);
        actual.sort_by(by_row);
        if expected != actual {
            fence_failures += 1;
        }
    }

    let ok = percentile_failures == 0 && fence_failures == 0;
    check(
        "percentiles and outlier fences match brute-force reimplementation on 1000 random cases",
        ok,
        format!("{percentile_failures} percentile and {fence_failures} fence mismatches"),
    );
}
