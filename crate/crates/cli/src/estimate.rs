//! `fncap estimate`: answer "how many requests per second can this function
//! take at this configuration under its SLO?" three ways: closed-form ideal
//! arithmetic, the best trained model, and (with --measure) a fresh
//! SLO-bounded load search on the simulator.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fncap_core::{DeploymentConfig, Slo};
use fncap_estimate::{
    estimate_capacity, ideal_estimate, measure_capacity, CapacityEstimate, EstimateError,
    FeatureImputer, MeasureOptions,
};
use fncap_model::{
    dataset_from_samples, load_model, preprocess, Dataset, ExecStatistic, Family, TrainedModel,
};
use fncap_sandbox::{build_sandbox, ExchangeStore};
use fncap_sim::Platform;

use crate::error::CliError;
use crate::record::{read_plan, STORE_FILE};
use crate::stream_seed;
use crate::train::{load_samples_by_function, model_rel_path};

pub struct EstimateArgs<'a> {
    pub plan_path: &'a Path,
    pub out: &'a Path,
    pub target: &'a str,
    pub memory_mib: u32,
    pub concurrency: u32,
    pub slo_ms: Option<f64>,
    pub family: Option<&'a str>,
    pub measure: bool,
    pub json: bool,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct EstimateOutcome {
    pub estimates: Vec<CapacityEstimate>,
    pub warnings: Vec<String>,
    pub rendered: String,
}

/// Load the requested family's artifact, or every available one and keep
/// the best by held-out R^2.
fn pick_model(
    out: &Path,
    target: &str,
    family: Option<&str>,
) -> Result<TrainedModel, CliError> {
    let candidates: Vec<Family> = match family {
        Some(tag) => {
            let family = Family::from_tag(tag).ok_or_else(|| {
                CliError::validation(format!(
                    "unknown model family {tag:?}; one of lr, plr, rr, rfr, dnn"
                ))
            })?;
            vec![family]
        }
        None => Family::ALL.to_vec(),
    };

    let mut best: Option<TrainedModel> = None;
    for family in candidates {
        let rel = model_rel_path(target, family);
        let path = out.join(&rel);
        if !path.exists() {
            continue;
        }
        let model: TrainedModel = load_model(&path)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        let score = model.test_r2.unwrap_or(f64::NEG_INFINITY);
        if best.as_ref().is_none_or(|b| score > b.test_r2.unwrap_or(f64::NEG_INFINITY)) {
            best = Some(model);
        }
    }
    best.ok_or_else(|| {
        CliError::validation(format!(
            "no model artifacts for {target:?} under {}; run `fncap train` first",
            out.join("models").display()
        ))
    })
}

pub fn cmd_estimate(args: &EstimateArgs<'_>) -> Result<EstimateOutcome, CliError> {
    let (plan, _digest) = read_plan(args.plan_path)?;
    let profile = plan.app.function(args.target).ok_or_else(|| {
        let known: Vec<&str> = plan.app.functions.iter().map(|f| f.name.as_str()).collect();
        CliError::validation(format!(
            "unknown target {:?}; the plan declares [{}]",
            args.target,
            known.join(", ")
        ))
    })?;
    if args.memory_mib < DeploymentConfig::MIN_MEMORY_MIB {
        return Err(CliError::validation(format!(
            "--memory {} is below the minimum of {} MiB",
            args.memory_mib,
            DeploymentConfig::MIN_MEMORY_MIB
        )));
    }
    if args.concurrency < 1 {
        return Err(CliError::validation("--concurrency must be at least 1".to_string()));
    }
    if let Some(ms) = args.slo_ms {
        if !(ms > 0.0) {
            return Err(CliError::validation(format!("--slo-ms {ms} must be positive")));
        }
    }
    let config =
        DeploymentConfig::new(args.memory_mib, args.concurrency).with_timeout(plan.timeout_ms);
    let slo =
        Slo { percentile: plan.slo.percentile, max_ms: args.slo_ms.unwrap_or(plan.slo.max_ms) };

    let mut estimates = vec![ideal_estimate(profile, config, slo)];
    let mut warnings = Vec::new();

    // Model route: the imputer is refit on the same train split the artifact
    // was fit on (the artifact records its seed), so the extrapolation hull
    // matches the model's actual training data.
    let model = pick_model(args.out, args.target, args.family)?;
    let samples = load_samples_by_function(args.out)?
        .remove(args.target)
        .ok_or_else(|| {
            CliError::validation(format!(
                "no metrics for {:?} under {}; the imputer needs the training data",
                args.target,
                args.out.join("metrics").display()
            ))
        })?;
    let data: Dataset = dataset_from_samples(&samples, ExecStatistic::Mean);
    let split = preprocess(&data, model.seed)
        .map_err(|e| CliError::runtime(format!("rebuilding the training split: {e}")))?;
    let imputer = FeatureImputer::fit(&split.train, plan.sampling_interval_s as f64)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let predicted = estimate_capacity(&model, args.target, config, slo, &imputer);
    estimates.push(predicted.estimate);
    warnings.extend(predicted.warnings);

    if args.measure {
        let store_path = args.out.join(STORE_FILE);
        let store = if store_path.exists() {
            let file = fs::File::open(&store_path)?;
            ExchangeStore::load(file)
                .map_err(|e| CliError::runtime(format!("{}: {e}", store_path.display())))?
        } else {
            ExchangeStore::new()
        };
        let measure_seed = stream_seed(args.seed.unwrap_or(plan.seed), "measure");
        let options = MeasureOptions {
            vu_low: plan.vus.min.max(1),
            vu_high: plan.vus.max,
            probe_duration_s: plan.duration_s as f64,
            ..MeasureOptions::default()
        };
        let measurement = measure_capacity(
            || {
                let mut platform = Platform::new(measure_seed);
                build_sandbox(&mut platform, &plan.app, args.target, &store, config)
                    .map_err(|e| EstimateError::Setup(e.to_string()))?;
                Ok(platform)
            },
            args.target,
            slo,
            &options,
        )
        .map_err(|e| CliError::runtime(e.to_string()))?;
        if let Some(note) = &measurement.note {
            warnings.push(note.clone());
        }
        estimates.push(measurement.estimate);
    }

    let rendered = if args.json {
        serde_json::to_string_pretty(&serde_json::json!({
            "estimates": estimates,
            "warnings": warnings,
        }))?
    } else {
        render_text(args.target, config, slo, &estimates, &warnings)
    };
    Ok(EstimateOutcome { estimates, warnings, rendered })
}

fn render_text(
    target: &str,
    config: DeploymentConfig,
    slo: Slo,
    estimates: &[CapacityEstimate],
    warnings: &[String],
) -> String {
    let mut text = format!(
        "{target} @ {} MiB, concurrency {}, SLO p{:.0} <= {} ms\n",
        config.memory_mib,
        config.concurrency,
        slo.percentile * 100.0,
        slo.max_ms
    );
    for estimate in estimates {
        let method = estimate.method.to_string();
        let _ = write!(text, "  {method:<12} {:>10.1} rps", estimate.fc_rps);
        if let Some(confidence) = estimate.confidence {
            let _ = write!(text, "   confidence {confidence:.3}");
        }
        text.push('\n');
    }
    for warning in warnings {
        let _ = writeln!(text, "warning: {warning}");
    }
    text
}
