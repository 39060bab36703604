//! `fncap train`: fit all five model families per function from the metrics
//! CSVs of an experiment run (or any CSVs in the same schema), with grid
//! search and 6-fold cross-validation, then write artifacts and the R^2
//! accuracy report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fncap_estimate::AccuracyReport;
use fncap_metrics::{read_csv, MetricsSample};
use fncap_model::{
    dataset_from_samples, evaluate_on_test, preprocess, save_model, train_with_grid_search,
    Dataset, ExecStatistic, Family, ModelError, DEFAULT_K,
};
use serde::Serialize;

use crate::error::CliError;
use crate::experiment::safe_name;
use crate::manifest::RunManifest;

pub const ACCURACY_REPORT_FILE: &str = "models/accuracy.json";
pub const TRAINING_REPORT_FILE: &str = "models/training.json";

/// Default training seed when neither --seed nor a manifest provides one
/// (metrics produced outside this tool).
pub const FALLBACK_SEED: u64 = 42;

#[derive(Debug)]
pub struct TrainOutcome {
    pub trained: Vec<String>,
    /// (function, reason) pairs for functions or families that could not be
    /// trained; the rest of the run proceeds.
    pub skipped: Vec<(String, String)>,
    /// The accuracy report, rendered as a text table or JSON per --json.
    pub rendered: String,
}

/// One row of the training report: where each artifact came from and how it
/// scored, fold by fold.
#[derive(Debug, Serialize)]
struct TrainingRow {
    function: String,
    family: &'static str,
    artifact: String,
    fold_scores: Vec<f64>,
    mean_fold_r2: f64,
    test_r2: f64,
}

pub fn model_rel_path(function: &str, family: Family) -> String {
    format!("models/{}-{}.json", safe_name(function), family.tag())
}

/// Read every metrics CSV under `out/metrics` and group the samples by
/// function. Files are visited in name order so row order is deterministic.
pub fn load_samples_by_function(
    out: &Path,
) -> Result<BTreeMap<String, Vec<MetricsSample>>, CliError> {
    let dir = out.join("metrics");
    if !dir.is_dir() {
        return Err(CliError::validation(format!(
            "no metrics directory at {}; run `fncap experiment` first",
            dir.display()
        )));
    }
    let mut paths: Vec<_> = fs::read_dir(&dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();

    let mut grouped: BTreeMap<String, Vec<MetricsSample>> = BTreeMap::new();
    for path in paths {
        let file = fs::File::open(&path)?;
        let samples = read_csv(file)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        for sample in samples {
            grouped.entry(sample.function.clone()).or_default().push(sample);
        }
    }
    if grouped.is_empty() {
        return Err(CliError::validation(format!(
            "{} holds no metrics CSVs; run `fncap experiment` first",
            dir.display()
        )));
    }
    Ok(grouped)
}

pub fn cmd_train(
    out: &Path,
    seed: Option<u64>,
    target: Option<&str>,
    json: bool,
) -> Result<TrainOutcome, CliError> {
    let mut manifest = RunManifest::load(out)?;
    let seed = seed.or(manifest.as_ref().map(|m| m.seed)).unwrap_or(FALLBACK_SEED);

    let mut grouped = load_samples_by_function(out)?;
    if let Some(target) = target {
        if !grouped.contains_key(target) {
            let known: Vec<&str> = grouped.keys().map(String::as_str).collect();
            return Err(CliError::validation(format!(
                "no metrics for {target:?}; the directory holds [{}]",
                known.join(", ")
            )));
        }
        grouped.retain(|name, _| name == target);
    }

    fs::create_dir_all(out.join("models"))?;

    let mut trained = Vec::new();
    let mut skipped = Vec::new();
    let mut scores = Vec::new();
    let mut rows = Vec::new();
    let mut model_paths: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for (function, samples) in &grouped {
        let data: Dataset = dataset_from_samples(samples, ExecStatistic::Mean);
        let split = match preprocess(&data, seed) {
            Ok(split) => split,
            Err(ModelError::TooFewSamples { needed, got }) => {
                skipped.push((
                    function.clone(),
                    format!("insufficient data: need at least {needed} usable rows, got {got}"),
                ));
                continue;
            }
            Err(e) => {
                skipped.push((function.clone(), e.to_string()));
                continue;
            }
        };

        let mut any = false;
        for family in Family::ALL {
            let result = train_with_grid_search(family, &split.train, DEFAULT_K, seed)
                .and_then(|mut model| {
                    let r2 = evaluate_on_test(&mut model, &split.test)?;
                    Ok((model, r2))
                });
            let (model, r2) = match result {
                Ok(pair) => pair,
                Err(e) => {
                    skipped.push((function.clone(), format!("family {family}: {e}")));
                    continue;
                }
            };
            let rel = model_rel_path(function, family);
            save_model(&model, out.join(&rel))
                .map_err(|e| CliError::runtime(format!("writing {rel}: {e}")))?;
            rows.push(TrainingRow {
                function: function.clone(),
                family: family.tag(),
                artifact: rel.clone(),
                fold_scores: model.fold_scores.clone(),
                mean_fold_r2: model.fold_scores.iter().sum::<f64>()
                    / model.fold_scores.len().max(1) as f64,
                test_r2: r2,
            });
            scores.push((function.clone(), family, r2));
            model_paths.entry(function.clone()).or_default().push(rel);
            any = true;
        }
        if any {
            trained.push(function.clone());
        }
    }

    if trained.is_empty() {
        let reason = skipped
            .first()
            .map(|(f, r)| format!("{f}: {r}"))
            .unwrap_or_else(|| "no functions found".to_string());
        return Err(CliError::runtime(format!("nothing trained; {reason}")));
    }

    let report = AccuracyReport::from_scores(scores);
    let accuracy_json = serde_json::to_string_pretty(&report.to_json())?;
    fs::write(out.join(ACCURACY_REPORT_FILE), accuracy_json + "\n")?;
    let training_json = serde_json::to_string_pretty(&rows)?;
    fs::write(out.join(TRAINING_REPORT_FILE), training_json + "\n")?;

    if let Some(manifest) = manifest.as_mut() {
        for (function, paths) in model_paths {
            manifest.models.insert(function, paths);
        }
        for rel in [ACCURACY_REPORT_FILE, TRAINING_REPORT_FILE] {
            if !manifest.reports.iter().any(|r| r == rel) {
                manifest.reports.push(rel.to_string());
            }
        }
        manifest.save(out)?;
    }

    let rendered = if json {
        serde_json::to_string_pretty(&serde_json::json!({
            "accuracy": report.to_json(),
            "training": rows,
            "skipped": skipped.iter().map(|(f, r)| format!("{f}: {r}")).collect::<Vec<_>>(),
        }))?
    } else {
        report.to_text()
    };
    Ok(TrainOutcome { trained, skipped, rendered })
}
