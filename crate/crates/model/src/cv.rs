//! K-fold cross-validation, R^2 scoring, and hyperparameter grid search.

use fncap_core::num::{real, real_usize, Real};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::DatasetOf;
use crate::dnn::{fit_dnn, DnnConfig};
use crate::error::ModelError;
use crate::forest::{fit_random_forest, ForestConfig};
use crate::linear::{fit_linear, fit_ridge_at, DEFAULT_LAMBDAS};
use crate::model::{Family, TrainedModelOf};
use crate::poly::fit_polynomial;

pub const DEFAULT_K: usize = 6;

/// Coefficient of determination. Errors instead of returning a sentinel
/// when the target carries no variance, since any score would be a lie.
pub fn r2_score<R: Real>(y: &[R], predicted: &[R]) -> Result<R, ModelError> {
    if y.len() != predicted.len() {
        return Err(ModelError::LengthMismatch(y.len(), predicted.len()));
    }
    if y.len() < 2 {
        return Err(ModelError::TooFewSamples { needed: 2, got: y.len() });
    }
    let n = real_usize::<R>(y.len());
    let mean = y.iter().fold(R::zero(), |a, &v| a + v) / n;
    let ss_tot = y.iter().fold(R::zero(), |a, &v| a + (v - mean) * (v - mean));
    if ss_tot == R::zero() {
        return Err(ModelError::ZeroVariance);
    }
    let ss_res = y
        .iter()
        .zip(predicted)
        .fold(R::zero(), |a, (&v, &p)| a + (v - p) * (v - p));
    Ok(R::one() - ss_res / ss_tot)
}

/// One point in a hyperparameter grid. Non-generic on purpose: grids are
/// data, independent of the scalar the model trains in.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyConfig {
    Linear,
    Polynomial { degree: u32 },
    Ridge { lambda: f64 },
    Forest(ForestConfig),
    Dnn(DnnConfig),
}

impl FamilyConfig {
    pub fn family(&self) -> Family {
        match self {
            FamilyConfig::Linear => Family::Linear,
            FamilyConfig::Polynomial { .. } => Family::Polynomial,
            FamilyConfig::Ridge { .. } => Family::Ridge,
            FamilyConfig::Forest(_) => Family::Forest,
            FamilyConfig::Dnn(_) => Family::Dnn,
        }
    }
}

/// Fit one model at one grid point.
pub fn fit_family<R: Real>(
    train: &DatasetOf<R>,
    config: &FamilyConfig,
    seed: u64,
) -> Result<TrainedModelOf<R>, ModelError> {
    match config {
        FamilyConfig::Linear => fit_linear(train),
        FamilyConfig::Polynomial { degree } => fit_polynomial(train, *degree),
        FamilyConfig::Ridge { lambda } => fit_ridge_at(train, real(*lambda)),
        FamilyConfig::Forest(cfg) => fit_random_forest(train, cfg, seed),
        FamilyConfig::Dnn(cfg) => fit_dnn(train, cfg, seed),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport<R> {
    pub fold: usize,
    /// Row indices (into the dataset passed to [`kfold_cv`]) the fold model
    /// was fit on.
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub r2: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport<R> {
    pub folds: Vec<FoldReport<R>>,
    pub mean_r2: R,
}

/// K-fold cross-validation. Rows are shuffled once with the seed, then cut
/// into k folds; when n is not divisible by k the first `n % k` folds take
/// one extra row, so sizes never differ by more than one.
pub fn kfold_cv<R: Real>(
    data: &DatasetOf<R>,
    config: &FamilyConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport<R>, ModelError> {
    let k = k.max(2);
    if data.len() < k {
        return Err(ModelError::TooFewForFolds { k, got: data.len() });
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let base = data.len() / k;
    let extra = data.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let val_indices: Vec<usize> = order[cursor..cursor + size].to_vec();
        cursor += size;
        let train_indices: Vec<usize> =
            order[..cursor - size].iter().chain(&order[cursor..]).copied().collect();

        let model = fit_family(&data.select(&train_indices), config, seed)?;
        let val = data.select(&val_indices);
        let predicted = model.predict_all(&val.x);
        let r2 = r2_score(&val.y, &predicted)?;
        folds.push(FoldReport { fold, train_indices, val_indices, r2 });
    }
    let mean_r2 =
        folds.iter().fold(R::zero(), |a, f| a + f.r2) / real_usize(folds.len());
    Ok(CvReport { folds, mean_r2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome<R> {
    /// Index into the grid of the winning configuration.
    pub best: usize,
    /// One entry per grid point; `None` marks points that were infeasible
    /// at the fold sizes (e.g. a polynomial with more terms than a fold has
    /// rows). The winner always has a report.
    pub reports: Vec<Option<CvReport<R>>>,
}

/// Cross-validate every grid point and pick the best mean R^2. Ties go to
/// the earlier entry, so grids should be ordered simplest first. Points
/// whose preconditions fail on the folds are skipped; the search only
/// errors when every point is infeasible.
pub fn grid_search<R: Real>(
    data: &DatasetOf<R>,
    grid: &[FamilyConfig],
    k: usize,
    seed: u64,
) -> Result<GridOutcome<R>, ModelError> {
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    let mut reports = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, R)> = None;
    let mut first_error = None;
    for (idx, config) in grid.iter().enumerate() {
        match kfold_cv(data, config, k, seed) {
            Ok(report) => {
                if best.as_ref().is_none_or(|(_, score)| report.mean_r2 > *score) {
                    best = Some((idx, report.mean_r2));
                }
                reports.push(Some(report));
            }
            Err(e) => {
                first_error.get_or_insert(e);
                reports.push(None);
            }
        }
    }
    match best {
        Some((idx, _)) => Ok(GridOutcome { best: idx, reports }),
        None => Err(first_error.expect("non-empty grids report at least one error")),
    }
}

/// The stock grid per family: polynomial degrees 1..3, the ridge penalty
/// ladder, and single default points for the families whose tuning is
/// baked into their config structs.
pub fn default_grid(family: Family) -> Vec<FamilyConfig> {
    match family {
        Family::Linear => vec![FamilyConfig::Linear],
        Family::Polynomial => {
            (1..=3).map(|degree| FamilyConfig::Polynomial { degree }).collect()
        }
        Family::Ridge => {
            DEFAULT_LAMBDAS.iter().map(|&lambda| FamilyConfig::Ridge { lambda }).collect()
        }
        Family::Forest => vec![FamilyConfig::Forest(ForestConfig::default())],
        Family::Dnn => vec![FamilyConfig::Dnn(DnnConfig::default())],
    }
}

/// Grid-search the family's default grid, then refit the winner on all of
/// `train`. The returned model carries the winning fold scores.
pub fn train_with_grid_search<R: Real>(
    family: Family,
    train: &DatasetOf<R>,
    k: usize,
    seed: u64,
) -> Result<TrainedModelOf<R>, ModelError> {
    let grid = default_grid(family);
    let outcome = grid_search(train, &grid, k, seed)?;
    let mut model = fit_family(train, &grid[outcome.best], seed)?;
    let winner = outcome.reports[outcome.best]
        .as_ref()
        .expect("grid winner has a report");
    model.fold_scores = winner.folds.iter().map(|f| f.r2).collect();
    model.seed = seed;
    Ok(model)
}

/// Score the model on held-out rows and record the result on the model.
pub fn evaluate_on_test<R: Real>(
    model: &mut TrainedModelOf<R>,
    test: &DatasetOf<R>,
) -> Result<R, ModelError> {
    let predicted = model.predict_all(&test.x);
    let r2 = r2_score(&test.y, &predicted)?;
    model.test_r2 = Some(r2);
    Ok(r2)
}
