//! Shared domain model for the fncap toolkit: service-level objectives,
//! deployment configurations, synthetic workload profiles, application call
//! graphs and YAML test plans, plus the configuration-grid expansion that
//! every experiment iterates over.

pub mod demo;
pub mod graph;
pub mod num;
pub mod plan;
pub mod stats;
pub mod types;

pub use graph::{validate_graph, GraphDiagnostic};
pub use num::Real;
pub use plan::{expand_grid, parse_test_plan, serialize_test_plan, PlanError};
pub use types::{
    ApplicationGraph, CallEdge, CallMode, DeploymentConfig, FunctionProfile, Slo, TestPlan,
    VuRange,
};

/// Scalar type used by the concrete pipeline. The numeric code is generic
/// over [`Real`]; everything user-facing runs on `f64`.
pub type Scalar = f64;
