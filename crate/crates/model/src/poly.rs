//! Polynomial regression: monomial expansion (with interactions) followed
//! by a least-squares fit on the expanded design.

use fncap_core::num::Real;

use crate::dataset::{DatasetOf, Normalization};
use crate::error::ModelError;
use crate::linalg::{normal_equations, solve_cholesky, solve_gaussian, Mat};
use crate::linear::FALLBACK_LAMBDA;
use crate::model::{Family, ModelParams, TrainedModelOf};

/// Hard ceiling on expanded columns; past this the normal equations stop
/// being a sane way to fit and the caller should rethink the degree.
pub const COLUMN_CAP: usize = 200;

/// Number of monomials of total degree <= `degree` over `features`
/// variables, intercept included: C(features + degree, degree).
pub fn expansion_size(features: usize, degree: u32) -> usize {
    let d = degree as usize;
    // Binomial coefficient with early division keeps intermediates small.
    let mut result: usize = 1;
    for i in 1..=d {
        result = result * (features + i) / i;
    }
    result
}

/// Exponent vectors of every monomial with total degree <= `degree`, in a
/// deterministic graded order starting from the constant term.
pub fn monomial_exponents(features: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut terms = vec![vec![0u32; features]];
    let mut frontier: Vec<Vec<u32>> = vec![vec![0u32; features]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for exps in &frontier {
            // Only raise features at or after the last raised one, so each
            // multiset appears exactly once.
            let first = exps.iter().rposition(|&e| e > 0).unwrap_or(0);
            for j in first..features {
                let mut bumped = exps.clone();
                bumped[j] += 1;
                next.push(bumped);
            }
        }
        terms.extend(next.iter().cloned());
        frontier = next;
    }
    terms
}

/// Evaluate one monomial at a point.
pub fn expand_term<R: Real>(z: &[R], exponents: &[u32]) -> R {
    z.iter()
        .zip(exponents)
        .fold(R::one(), |acc, (&v, &e)| acc * v.powi(e as i32))
}

/// Fit a polynomial of the given total degree, interactions included.
pub fn fit_polynomial<R: Real>(
    train: &DatasetOf<R>,
    degree: u32,
) -> Result<TrainedModelOf<R>, ModelError> {
    let degree = degree.max(1);
    let terms = expansion_size(train.width(), degree);
    if terms > COLUMN_CAP {
        return Err(ModelError::ExpansionTooLarge {
            degree,
            features: train.width(),
            terms,
            cap: COLUMN_CAP,
        });
    }
    if train.len() < terms {
        return Err(ModelError::TooFewSamples { needed: terms, got: train.len() });
    }

    let norm = Normalization::fit(train);
    let z = norm.apply(train);
    let exponents = monomial_exponents(train.width(), degree);
    let design = Mat::from_rows(
        z.x.iter().map(|row| exponents.iter().map(|e| expand_term(row, e)).collect()).collect(),
    );
    let (xtx, xty) = normal_equations(&design, &train.y);

    let (weights, rank_deficient) = match solve_gaussian(&xtx, &xty) {
        Some(w) => (w, false),
        None => {
            let mut ridged = xtx.clone();
            for j in 1..ridged.cols() {
                let v = ridged.get(j, j) + R::from_f64_lossy(FALLBACK_LAMBDA);
                ridged.set(j, j, v);
            }
            let w = solve_cholesky(&ridged, &xty)
                .expect("penalized normal equations are positive definite");
            (w, true)
        }
    };

    Ok(TrainedModelOf {
        family: Family::Polynomial,
        params: ModelParams::Polynomial { degree, exponents, weights, rank_deficient },
        norm,
        fold_scores: Vec::new(),
        test_r2: None,
        seed: 0,
    })
}
