//! Regression models that map resource configuration and load telemetry to
//! request throughput.
//!
//! Five families share one training protocol: outlier fencing on
//! interquartile range, a seeded shuffle into train and test splits,
//! feature standardization fit on the training rows only, k-fold
//! cross-validated hyperparameter search, and a final refit on the full
//! training split. The families are ordinary least squares (`lr`),
//! polynomial expansion least squares (`plr`), ridge (`rr`), a random
//! forest (`rfr`), and a small fully connected network (`dnn`).
//!
//! Everything is generic over the scalar type through
//! [`fncap_core::num::Real`]; the `Dataset` and `TrainedModel` aliases pin
//! f64 for ordinary use.

pub mod artifact;
pub mod cv;
pub mod dataset;
pub mod dnn;
pub mod error;
pub mod forest;
pub mod linalg;
pub mod linear;
pub mod model;
pub mod poly;

pub use artifact::{decode_model, encode_model, load_model, save_model, ARTIFACT_VERSION};
pub use cv::{
    default_grid, evaluate_on_test, fit_family, grid_search, kfold_cv, r2_score,
    train_with_grid_search, CvReport, FamilyConfig, FoldReport, GridOutcome, DEFAULT_K,
};
pub use dataset::{
    dataset_from_samples, preprocess, DatasetOf, ExecStatistic, Normalization, Split,
    FEATURE_NAMES, IQR_FACTOR, MIN_PREPROCESS_ROWS, TEST_FRACTION,
};
pub use dnn::{fit_dnn, DnnConfig, DnnInit, Mlp};
pub use error::ModelError;
pub use forest::{fit_random_forest, ForestConfig, Tree};
pub use linear::{fit_linear, fit_ridge, fit_ridge_at, DEFAULT_LAMBDAS, FALLBACK_LAMBDA};
pub use model::{Family, ModelParams, TrainedModelOf};
pub use poly::{fit_polynomial, COLUMN_CAP};

/// The scalar used everywhere outside generic code.
pub type Dataset = DatasetOf<f64>;
pub type TrainedModel = TrainedModelOf<f64>;
