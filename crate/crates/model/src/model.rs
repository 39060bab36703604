//! Trained model representation shared by every family.

use std::fmt;

use fncap_core::num::Real;

use crate::dataset::Normalization;
use crate::dnn::Mlp;
use crate::forest::{ForestConfig, Tree};
use crate::poly::expand_term;

/// The five regression families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Linear,
    Polynomial,
    Ridge,
    Forest,
    Dnn,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Linear, Family::Polynomial, Family::Ridge, Family::Forest, Family::Dnn];

    /// Short identifier used in file names, reports, and artifacts.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Linear => "lr",
            Family::Polynomial => "plr",
            Family::Ridge => "rr",
            Family::Forest => "rfr",
            Family::Dnn => "dnn",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.tag() == tag)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Family-specific fitted parameters. All weight vectors live in the
/// normalized feature space of the model's [`Normalization`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams<R> {
    /// `weights[0]` is the intercept. `rank_deficient` marks fits that fell
    /// back to a tiny ridge penalty because the design was singular.
    Linear { weights: Vec<R>, rank_deficient: bool },
    /// One weight per monomial; `exponents[t][j]` is the power of feature
    /// `j` in term `t`. The all-zero term is the intercept.
    Polynomial { degree: u32, exponents: Vec<Vec<u32>>, weights: Vec<R>, rank_deficient: bool },
    Ridge { lambda: R, weights: Vec<R> },
    Forest { config: ForestConfig, trees: Vec<Tree<R>> },
    /// `curve` is the per-epoch training MAE, kept for diagnostics.
    Dnn { net: Mlp<R>, y_mean: R, y_std: R, curve: Vec<R> },
}

/// A fitted model plus everything prediction and reporting need.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModelOf<R> {
    pub family: Family,
    pub params: ModelParams<R>,
    /// Computed on training rows only; applied to every input at predict
    /// time.
    pub norm: Normalization<R>,
    /// Validation R^2 per cross-validation fold (empty when the model was
    /// fit without CV).
    pub fold_scores: Vec<R>,
    pub test_r2: Option<R>,
    pub seed: u64,
}

impl<R: Real> TrainedModelOf<R> {
    pub fn predict(&self, features: &[R]) -> R {
        let z = self.norm.apply_row(features);
        match &self.params {
            ModelParams::Linear { weights, .. } | ModelParams::Ridge { weights, .. } => {
                linear_predict(weights, &z)
            }
            ModelParams::Polynomial { exponents, weights, .. } => exponents
                .iter()
                .zip(weights)
                .fold(R::zero(), |acc, (e, &w)| acc + w * expand_term(&z, e)),
            ModelParams::Forest { trees, .. } => {
                let sum = trees.iter().fold(R::zero(), |acc, t| acc + t.predict(&z));
                sum / R::from_usize(trees.len()).expect("tree count fits in R")
            }
            ModelParams::Dnn { net, y_mean, y_std, .. } => net.forward(&z) * *y_std + *y_mean,
        }
    }

    pub fn predict_all(&self, rows: &[Vec<R>]) -> Vec<R> {
        rows.iter().map(|row| self.predict(row)).collect()
    }

    /// Weights mapped back to raw (unnormalized) feature units:
    /// `(intercept, slopes)`. Only meaningful for models that are linear in
    /// the raw features.
    pub fn raw_linear_coefficients(&self) -> Option<(R, Vec<R>)> {
        let weights = match &self.params {
            ModelParams::Linear { weights, .. } | ModelParams::Ridge { weights, .. } => weights,
            ModelParams::Polynomial { degree: 1, weights, .. } => weights,
            _ => return None,
        };
        let mut intercept = weights[0];
        let mut slopes = Vec::with_capacity(weights.len() - 1);
        for ((&w, &m), &s) in
            weights[1..].iter().zip(&self.norm.means).zip(&self.norm.stds)
        {
            let slope = w / s;
            intercept -= slope * m;
            slopes.push(slope);
        }
        Some((intercept, slopes))
    }
}

fn linear_predict<R: Real>(weights: &[R], z: &[R]) -> R {
    weights[0] + weights[1..].iter().zip(z).fold(R::zero(), |acc, (&w, &v)| acc + w * v)
}
