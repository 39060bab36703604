//! Ordinary least squares and ridge regression.
//!
//! The two fits deliberately use different solvers: OLS goes through
//! Gaussian elimination on the normal equations, ridge through Cholesky on
//! the penalized system. Agreement between them at lambda = 0 is one of the
//! standing cross-checks of the numeric layer.

use fncap_core::num::{real, Real};

use crate::cv::kfold_cv;
use crate::dataset::{DatasetOf, Normalization};
use crate::error::ModelError;
use crate::linalg::{normal_equations, solve_cholesky, solve_gaussian, Mat};
use crate::model::{Family, ModelParams, TrainedModelOf};

/// Penalty used when an OLS design turns out rank-deficient; just enough to
/// make the system solvable, far too small to bias coefficients visibly.
pub const FALLBACK_LAMBDA: f64 = 1e-8;

/// Default penalty grid for [`fit_ridge`], ascending so equal CV scores
/// resolve to the smallest penalty.
pub const DEFAULT_LAMBDAS: [f64; 6] = [0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0];

fn design_with_intercept<R: Real>(z: &DatasetOf<R>) -> Mat<R> {
    Mat::from_rows(
        z.x.iter()
            .map(|row| {
                let mut with_one = Vec::with_capacity(row.len() + 1);
                with_one.push(R::one());
                with_one.extend_from_slice(row);
                with_one
            })
            .collect(),
    )
}

/// Least-squares fit with intercept. Falls back to a whisper of ridge when
/// the design is rank-deficient, and says so in the parameters.
pub fn fit_linear<R: Real>(train: &DatasetOf<R>) -> Result<TrainedModelOf<R>, ModelError> {
    let needed = train.width() + 1;
    if train.len() < needed {
        return Err(ModelError::TooFewSamples { needed, got: train.len() });
    }
    let norm = Normalization::fit(train);
    let design = design_with_intercept(&norm.apply(train));
    let (xtx, xty) = normal_equations(&design, &train.y);

    let (weights, rank_deficient) = match solve_gaussian(&xtx, &xty) {
        Some(w) => (w, false),
        None => {
            let ridged = add_penalty(&xtx, real(FALLBACK_LAMBDA));
            let w = solve_cholesky(&ridged, &xty)
                .expect("penalized normal equations are positive definite");
            (w, true)
        }
    };

    Ok(TrainedModelOf {
        family: Family::Linear,
        params: ModelParams::Linear { weights, rank_deficient },
        norm,
        fold_scores: Vec::new(),
        test_r2: None,
        seed: 0,
    })
}

/// Ridge fit at one fixed penalty. The intercept is never penalized.
pub fn fit_ridge_at<R: Real>(
    train: &DatasetOf<R>,
    lambda: R,
) -> Result<TrainedModelOf<R>, ModelError> {
    let needed = train.width() + 1;
    if train.len() < needed {
        return Err(ModelError::TooFewSamples { needed, got: train.len() });
    }
    let norm = Normalization::fit(train);
    let design = design_with_intercept(&norm.apply(train));
    let (xtx, xty) = normal_equations(&design, &train.y);

    let ridged = add_penalty(&xtx, lambda);
    let weights = match solve_cholesky(&ridged, &xty) {
        Some(w) => w,
        // lambda = 0 on a singular design: nudge it solvable, same rule as
        // the OLS fallback.
        None => solve_cholesky(&add_penalty(&xtx, real(FALLBACK_LAMBDA)), &xty)
            .expect("penalized normal equations are positive definite"),
    };

    Ok(TrainedModelOf {
        family: Family::Ridge,
        params: ModelParams::Ridge { lambda, weights },
        norm,
        fold_scores: Vec::new(),
        test_r2: None,
        seed: 0,
    })
}

/// Ridge with the penalty chosen by k-fold cross-validation over `lambdas`.
/// Equal scores go to the earlier (smaller) entry.
pub fn fit_ridge<R: Real>(
    train: &DatasetOf<R>,
    lambdas: &[f64],
    k: usize,
    seed: u64,
) -> Result<TrainedModelOf<R>, ModelError> {
    if lambdas.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    let mut best: Option<(usize, R, Vec<R>)> = None;
    for (idx, &lambda) in lambdas.iter().enumerate() {
        let report = kfold_cv(train, &crate::cv::FamilyConfig::Ridge { lambda }, k, seed)?;
        let fold_scores: Vec<R> = report.folds.iter().map(|f| f.r2).collect();
        if best.as_ref().is_none_or(|(_, score, _)| report.mean_r2 > *score) {
            best = Some((idx, report.mean_r2, fold_scores));
        }
    }
    let (idx, _, fold_scores) = best.expect("non-empty grid");
    let mut model = fit_ridge_at(train, real(lambdas[idx]))?;
    model.fold_scores = fold_scores;
    model.seed = seed;
    Ok(model)
}

/// `X^T X` plus `lambda` on the diagonal, skipping the intercept entry.
fn add_penalty<R: Real>(xtx: &Mat<R>, lambda: R) -> Mat<R> {
    let mut out = xtx.clone();
    for j in 1..out.cols() {
        let v = out.get(j, j) + lambda;
        out.set(j, j, v);
    }
    out
}
