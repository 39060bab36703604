//! Test-plan parsing, validation and configuration-grid expansion.

use thiserror::Error;

use crate::graph::{validate_graph, GraphDiagnostic};
use crate::types::{DeploymentConfig, TestPlan};

#[derive(Debug, Error)]
pub enum PlanError {
    /// Malformed YAML; the inner error reports line and column.
    #[error("yaml syntax error: {0}")]
    Syntax(#[from] serde_yaml::Error),
    /// A structurally sound plan that violates an invariant.
    #[error("invalid plan: {0}")]
    Invalid(String),
    /// The application graph is not a single-entry DAG.
    #[error("invalid application graph: {}", format_diagnostics(.0))]
    Graph(Vec<GraphDiagnostic>),
}

fn format_diagnostics(diags: &[GraphDiagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parses a YAML test plan, applies documented defaults and validates every
/// invariant. See the repository README for the schema.
pub fn parse_test_plan(yaml_text: &str) -> Result<TestPlan, PlanError> {
    let plan: TestPlan = serde_yaml::from_str(yaml_text)?;
    validate_plan(&plan)?;
    Ok(plan)
}

/// Serializes a plan back to YAML with all defaults materialized, so that
/// `parse(serialize(parse(text)))` equals `parse(text)`.
pub fn serialize_test_plan(plan: &TestPlan) -> String {
    serde_yaml::to_string(plan).expect("test plans always serialize")
}

fn validate_plan(plan: &TestPlan) -> Result<(), PlanError> {
    let invalid = |msg: String| Err(PlanError::Invalid(msg));

    if plan.memory_mib.is_empty() {
        return invalid("memory_mib: grid must not be empty".into());
    }
    if plan.concurrency.is_empty() {
        return invalid("concurrency: grid must not be empty".into());
    }
    for &m in &plan.memory_mib {
        if m < DeploymentConfig::MIN_MEMORY_MIB {
            return invalid(format!(
                "memory_mib: {m} is below the minimum of {} MiB",
                DeploymentConfig::MIN_MEMORY_MIB
            ));
        }
    }
    if has_duplicates(&plan.memory_mib) {
        return invalid("memory_mib: grid entries must be unique".into());
    }
    for &c in &plan.concurrency {
        if c < 1 {
            return invalid("concurrency: values must be >= 1".into());
        }
    }
    if has_duplicates(&plan.concurrency) {
        return invalid("concurrency: grid entries must be unique".into());
    }
    if plan.vus.min > plan.vus.max {
        return invalid(format!(
            "vus: min ({}) must not exceed max ({})",
            plan.vus.min, plan.vus.max
        ));
    }
    if !(plan.slo.percentile > 0.0 && plan.slo.percentile <= 1.0) {
        return invalid(format!(
            "slo.percentile: {} is outside (0, 1]",
            plan.slo.percentile
        ));
    }
    if !(plan.slo.max_ms > 0.0) {
        return invalid("slo.max_ms: must be > 0".into());
    }
    if plan.sampling_interval_s == 0 {
        return invalid("sampling_interval_s: must be > 0".into());
    }
    if plan.duration_s < 2 * plan.sampling_interval_s {
        return invalid(format!(
            "duration_s: {} is shorter than two sampling intervals ({} s)",
            plan.duration_s,
            2 * plan.sampling_interval_s
        ));
    }
    if plan.timeout_ms == 0 {
        return invalid("timeout_ms: must be > 0".into());
    }

    for f in &plan.app.functions {
        if f.name.is_empty() {
            return invalid("app.functions: function names must not be empty".into());
        }
        if !(f.base_duration_ms > 0.0) {
            return invalid(format!("app.functions.{}: base_duration_ms must be > 0", f.name));
        }
        if f.saturation_memory_mib < DeploymentConfig::MIN_MEMORY_MIB {
            return invalid(format!(
                "app.functions.{}: saturation_memory_mib must be >= {}",
                f.name,
                DeploymentConfig::MIN_MEMORY_MIB
            ));
        }
        if f.noise_sigma < 0.0 {
            return invalid(format!("app.functions.{}: noise_sigma must be >= 0", f.name));
        }
        if f.cold_start_ms < 0.0 {
            return invalid(format!("app.functions.{}: cold_start_ms must be >= 0", f.name));
        }
        if !(f.idle_timeout_s > 0.0) {
            return invalid(format!("app.functions.{}: idle_timeout_s must be > 0", f.name));
        }
        if !(f.memory_utilization > 0.0 && f.memory_utilization <= 1.0) {
            return invalid(format!(
                "app.functions.{}: memory_utilization must be in (0, 1]",
                f.name
            ));
        }
    }

    let diagnostics = validate_graph(&plan.app);
    if !diagnostics.is_empty() {
        return Err(PlanError::Graph(diagnostics));
    }
    Ok(())
}

fn has_duplicates(values: &[u32]) -> bool {
    let mut seen = values.to_vec();
    seen.sort_unstable();
    seen.windows(2).any(|w| w[0] == w[1])
}

/// Expands the plan's memory and concurrency grids into the Cartesian
/// product of deployment configurations, memory-major ascending and then
/// concurrency ascending.
pub fn expand_grid(plan: &TestPlan) -> Vec<DeploymentConfig> {
    let mut memory = plan.memory_mib.clone();
    memory.sort_unstable();
    let mut concurrency = plan.concurrency.clone();
    concurrency.sort_unstable();

    let mut configs = Vec::with_capacity(memory.len() * concurrency.len());
    for &m in &memory {
        for &c in &concurrency {
            configs.push(DeploymentConfig::new(m, c).with_timeout(plan.timeout_ms));
        }
    }
    configs
}
