//! Core domain types shared by the simulator, load generator, metrics
//! collection and modeling layers.
//!
//! All types here are plain immutable data: construct, validate, share.

use serde::{Deserialize, Serialize};

/// Service-level objective: a percentile bound on execution duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slo {
    /// Percentile as a fraction in `(0, 1]`. Defaults to 0.95.
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    /// Upper bound on the execution duration at that percentile, in ms.
    pub max_ms: f64,
}

fn default_percentile() -> f64 {
    Slo::DEFAULT_PERCENTILE
}

impl Slo {
    pub const DEFAULT_PERCENTILE: f64 = 0.95;

    pub fn p95(max_ms: f64) -> Self {
        Slo { percentile: Self::DEFAULT_PERCENTILE, max_ms }
    }
}

/// One deployment configuration of a function: the two knobs a FaaS
/// platform exposes plus the request timeout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeploymentConfig {
    /// Allocated memory in MiB. Any value >= 128 is accepted so estimates
    /// can be queried off-grid.
    pub memory_mib: u32,
    /// Maximum number of concurrent instances the platform may create.
    pub concurrency: u32,
    /// Request timeout in ms; requests exceeding it are aborted.
    pub timeout_ms: u64,
}

impl DeploymentConfig {
    pub const MIN_MEMORY_MIB: u32 = 128;
    pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;

    pub fn new(memory_mib: u32, concurrency: u32) -> Self {
        DeploymentConfig { memory_mib, concurrency, timeout_ms: Self::DEFAULT_TIMEOUT_MS }
    }

    pub fn with_timeout(mut self, timeout_ms: u64) -> Self {
        self.timeout_ms = timeout_ms;
        self
    }
}

/// Synthetic workload profile of one function. The simulator derives the
/// service-time distribution and instance lifecycle from these parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionProfile {
    pub name: String,
    /// Mean service time in ms once memory reaches the saturation point.
    pub base_duration_ms: f64,
    /// Memory in MiB beyond which more memory no longer speeds the function
    /// up.
    #[serde(default = "defaults::saturation_memory_mib")]
    pub saturation_memory_mib: u32,
    /// Penalty in ms for the first invocation on a fresh instance.
    #[serde(default = "defaults::cold_start_ms")]
    pub cold_start_ms: f64,
    /// Sigma of the multiplicative lognormal jitter on service times.
    /// Zero yields the deterministic oracle mode.
    #[serde(default = "defaults::noise_sigma")]
    pub noise_sigma: f64,
    /// Idle instances older than this are reaped, in seconds.
    #[serde(default = "defaults::idle_timeout_s")]
    pub idle_timeout_s: f64,
    /// Size of the synthesized response body in bytes.
    #[serde(default = "defaults::response_size")]
    pub response_size: usize,
    /// Fraction of allocated memory the function typically touches; drives
    /// the synthesized memory_usage metric.
    #[serde(default = "defaults::memory_utilization")]
    pub memory_utilization: f64,
}

pub(crate) mod defaults {
    pub fn saturation_memory_mib() -> u32 {
        2048
    }
    pub fn cold_start_ms() -> f64 {
        250.0
    }
    pub fn noise_sigma() -> f64 {
        0.05
    }
    pub fn idle_timeout_s() -> f64 {
        300.0
    }
    pub fn response_size() -> usize {
        256
    }
    pub fn memory_utilization() -> f64 {
        0.6
    }
    pub fn sampling_interval_s() -> u64 {
        60
    }
    pub fn timeout_ms() -> u64 {
        super::DeploymentConfig::DEFAULT_TIMEOUT_MS
    }
}

impl FunctionProfile {
    /// A profile with all optional knobs at their defaults.
    pub fn new(name: impl Into<String>, base_duration_ms: f64) -> Self {
        FunctionProfile {
            name: name.into(),
            base_duration_ms,
            saturation_memory_mib: defaults::saturation_memory_mib(),
            cold_start_ms: defaults::cold_start_ms(),
            noise_sigma: defaults::noise_sigma(),
            idle_timeout_s: defaults::idle_timeout_s(),
            response_size: defaults::response_size(),
            memory_utilization: defaults::memory_utilization(),
        }
    }

    pub fn with_cold_start(mut self, ms: f64) -> Self {
        self.cold_start_ms = ms;
        self
    }

    pub fn with_noise_sigma(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_saturation_memory(mut self, mib: u32) -> Self {
        self.saturation_memory_mib = mib;
        self
    }

    pub fn with_idle_timeout_s(mut self, s: f64) -> Self {
        self.idle_timeout_s = s;
        self
    }
}

/// Whether a caller waits for the callee inline or fans out and joins later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CallMode {
    Sync,
    Async,
}

/// One directed call between two functions of the application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: String,
    pub callee: String,
    pub mode: CallMode,
    /// Ordinal of this call within the caller's handler.
    pub position: u32,
}

/// The call DAG of a serverless application: one entry function, directed
/// edges to downstream functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationGraph {
    pub functions: Vec<FunctionProfile>,
    #[serde(default)]
    pub edges: Vec<CallEdge>,
}

impl ApplicationGraph {
    pub fn function(&self, name: &str) -> Option<&FunctionProfile> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Direct callees of `name`, ordered by edge position.
    pub fn callees(&self, name: &str) -> Vec<&CallEdge> {
        let mut edges: Vec<&CallEdge> =
            self.edges.iter().filter(|e| e.caller == name).collect();
        edges.sort_by_key(|e| e.position);
        edges
    }

    /// The unique function without incoming edges, if the graph is valid.
    pub fn entry(&self) -> Option<&FunctionProfile> {
        let mut roots = self
            .functions
            .iter()
            .filter(|f| !self.edges.iter().any(|e| e.callee == f.name));
        match (roots.next(), roots.next()) {
            (Some(root), None) => Some(root),
            _ => None,
        }
    }
}

/// Closed range of virtual-user counts driven during load generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VuRange {
    pub min: u32,
    pub max: u32,
}

/// A parsed and validated experiment plan.
///
/// Field names mirror the YAML schema documented in the repository README;
/// serializing a plan and parsing it back yields the same plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    /// Memory grid in MiB.
    pub memory_mib: Vec<u32>,
    /// Function-concurrency grid.
    pub concurrency: Vec<u32>,
    /// Duration of one load test in seconds.
    pub duration_s: u64,
    pub vus: VuRange,
    pub slo: Slo,
    /// Seed for every random choice made anywhere in the pipeline.
    pub seed: u64,
    /// Metrics sampling interval in seconds.
    #[serde(default = "defaults::sampling_interval_s")]
    pub sampling_interval_s: u64,
    /// Request timeout applied to every grid configuration, in ms.
    #[serde(default = "defaults::timeout_ms")]
    pub timeout_ms: u64,
    pub app: ApplicationGraph,
}

impl TestPlan {
    pub fn sampling_interval_ms(&self) -> f64 {
        self.sampling_interval_s as f64 * 1000.0
    }

    pub fn duration_ms(&self) -> f64 {
        self.duration_s as f64 * 1000.0
    }
}
