//! The supervised dataset: five monitoring features predicting invocations.

use fncap_core::num::{real, real_usize, Real};
use fncap_core::stats::quantile_linear;
use fncap_metrics::MetricsSample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;

/// Feature order everywhere: in datasets, trained weights, and artifacts.
pub const FEATURE_NAMES: [&str; 5] = [
    "concurrent_instances",
    "execution_duration",
    "allocated_memory",
    "memory_usage",
    "function_concurrency",
];

/// Which per-window execution statistic feeds the execution_duration
/// feature. Mean is the default; p95 is the SLO-facing alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecStatistic {
    #[default]
    Mean,
    P95,
}

/// Rows of features `x` with target `y` (invocations per window). Width is
/// not hardwired so the fitting layer also serves expanded or synthetic
/// designs; pipeline datasets always have the five [`FEATURE_NAMES`]
/// columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetOf<R> {
    pub x: Vec<Vec<R>>,
    pub y: Vec<R>,
}

impl<R: Real> DatasetOf<R> {
    pub fn new(x: Vec<Vec<R>>, y: Vec<R>) -> Result<Self, ModelError> {
        if let Some(first) = x.first() {
            let width = first.len();
            if let Some(bad) = x.iter().find(|row| row.len() != width) {
                return Err(ModelError::RaggedRows(width, bad.len()));
            }
        }
        if x.len() != y.len() {
            return Err(ModelError::LengthMismatch(x.len(), y.len()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<R> {
        self.x.iter().map(|row| row[j]).collect()
    }
}

/// Build the five-feature dataset from metrics windows. Windows that saw no
/// successful invocations carry no execution duration and are dropped: a
/// row with a hole would poison every model downstream.
pub fn dataset_from_samples<R: Real>(
    samples: &[MetricsSample],
    exec: ExecStatistic,
) -> DatasetOf<R> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for s in samples {
        let duration = match exec {
            ExecStatistic::Mean => s.exec_mean_ms,
            ExecStatistic::P95 => s.exec_p95_ms,
        };
        let Some(duration) = duration else { continue };
        x.push(vec![
            real(f64::from(s.concurrent_instances)),
            real(duration),
            real(f64::from(s.allocated_memory_mib)),
            real(s.memory_usage_mib),
            real(f64::from(s.function_concurrency)),
        ]);
        y.push(real(s.invocations as f64));
    }
    DatasetOf { x, y }
}

/// Train/test partition produced by [`preprocess`].
#[derive(Debug, Clone)]
pub struct Split<R> {
    pub train: DatasetOf<R>,
    pub test: DatasetOf<R>,
}

pub const MIN_PREPROCESS_ROWS: usize = 30;
pub const TEST_FRACTION: f64 = 0.33;
pub const IQR_FACTOR: f64 = 1.5;

/// Outlier removal, seeded shuffle, and train/test split.
///
/// A row is an outlier if any feature or the target falls outside the
/// 1.5 x IQR fences of its column (fences computed once on the full data).
/// The shuffle and the 33% test cut are deterministic in `seed`.
pub fn preprocess<R: Real>(data: &DatasetOf<R>, seed: u64) -> Result<Split<R>, ModelError> {
    if data.len() < MIN_PREPROCESS_ROWS {
        return Err(ModelError::TooFewSamples { needed: MIN_PREPROCESS_ROWS, got: data.len() });
    }

    let mut fences: Vec<(R, R)> = Vec::with_capacity(data.width() + 1);
    for j in 0..data.width() {
        fences.push(iqr_fences(&data.column(j)));
    }
    let target_fence = iqr_fences(&data.y);

    let kept: Vec<usize> = (0..data.len())
        .filter(|&i| {
            let row_ok = data.x[i]
                .iter()
                .zip(&fences)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi);
            row_ok && data.y[i] >= target_fence.0 && data.y[i] <= target_fence.1
        })
        .collect();

    let mut order = kept;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_test = ((order.len() as f64) * TEST_FRACTION).round() as usize;
    let n_test = n_test.clamp(1, order.len() - 1);
    let (test_idx, train_idx) = order.split_at(n_test);

    Ok(Split { train: data.select(train_idx), test: data.select(test_idx) })
}

fn iqr_fences<R: Real>(column: &[R]) -> (R, R) {
    let q1 = quantile_linear(column, real(0.25)).expect("non-empty column");
    let q3 = quantile_linear(column, real(0.75)).expect("non-empty column");
    let spread = (q3 - q1) * real(IQR_FACTOR);
    (q1 - spread, q3 + spread)
}

/// Per-feature standardization statistics, always computed on training data
/// only and stored with the model so prediction sees the same scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization<R> {
    pub means: Vec<R>,
    pub stds: Vec<R>,
}

impl<R: Real> Normalization<R> {
    pub fn fit(data: &DatasetOf<R>) -> Self {
        let n = real_usize::<R>(data.len().max(1));
        let width = data.width();
        let mut means = vec![R::zero(); width];
        for row in &data.x {
            for (m, &v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![R::zero(); width];
        for row in &data.x {
            for ((s, &v), &m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            // A constant column scales by 1 rather than dividing by zero.
            if *s == R::zero() {
                *s = R::one();
            }
        }
        Self { means, stds }
    }

    pub fn apply_row(&self, row: &[R]) -> Vec<R> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, data: &DatasetOf<R>) -> DatasetOf<R> {
        DatasetOf {
            x: data.x.iter().map(|row| self.apply_row(row)).collect(),
            y: data.y.clone(),
        }
    }
}
