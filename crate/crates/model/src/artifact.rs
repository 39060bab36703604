//! Versioned on-disk model format.
//!
//! Everything is JSON. Scalar weights ride as plain JSON numbers, which
//! serde_json prints with shortest-roundtrip precision, so an f64 model
//! survives save/load bit for bit. Network weights would make that JSON
//! enormous, so the MLP parameter vector is packed as little-endian f64
//! bytes in base64 instead.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use fncap_core::num::Real;
use serde::{Deserialize, Serialize};

use crate::dataset::Normalization;
use crate::dnn::{DenseLayer, Mlp};
use crate::error::ModelError;
use crate::forest::{ForestConfig, Tree, TreeNode};
use crate::model::{Family, ModelParams, TrainedModelOf};

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ArtifactV1 {
    version: u32,
    family: String,
    seed: u64,
    means: Vec<f64>,
    stds: Vec<f64>,
    fold_scores: Vec<f64>,
    test_r2: Option<f64>,
    params: ParamsArt,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ParamsArt {
    Linear {
        weights: Vec<f64>,
        rank_deficient: bool,
    },
    Polynomial {
        degree: u32,
        exponents: Vec<Vec<u32>>,
        weights: Vec<f64>,
        rank_deficient: bool,
    },
    Ridge {
        lambda: f64,
        weights: Vec<f64>,
    },
    Forest {
        config: ForestConfigArt,
        trees: Vec<TreeArt>,
    },
    Dnn {
        /// Layer widths, input first, output last.
        sizes: Vec<usize>,
        /// Flat parameter vector (weights then biases, layer by layer) as
        /// little-endian f64 bytes.
        weights_b64: String,
        y_mean: f64,
        y_std: f64,
        curve: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct ForestConfigArt {
    trees: usize,
    max_depth: usize,
    min_split: usize,
    features_per_split: Option<usize>,
    bootstrap: bool,
}

#[derive(Serialize, Deserialize)]
struct TreeArt {
    nodes: Vec<NodeArt>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
enum NodeArt {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

fn to_f64s<R: Real>(values: &[R]) -> Vec<f64> {
    values.iter().map(|v| v.as_f64()).collect()
}

fn from_f64s<R: Real>(values: &[f64]) -> Vec<R> {
    values.iter().map(|&v| R::from_f64_lossy(v)).collect()
}

pub fn encode_model<R: Real>(model: &TrainedModelOf<R>) -> Result<String, ModelError> {
    let params = match &model.params {
        ModelParams::Linear { weights, rank_deficient } => ParamsArt::Linear {
            weights: to_f64s(weights),
            rank_deficient: *rank_deficient,
        },
        ModelParams::Polynomial { degree, exponents, weights, rank_deficient } => {
            ParamsArt::Polynomial {
                degree: *degree,
                exponents: exponents.clone(),
                weights: to_f64s(weights),
                rank_deficient: *rank_deficient,
            }
        }
        ModelParams::Ridge { lambda, weights } => {
            ParamsArt::Ridge { lambda: lambda.as_f64(), weights: to_f64s(weights) }
        }
        ModelParams::Forest { config, trees } => ParamsArt::Forest {
            config: ForestConfigArt {
                trees: config.trees,
                max_depth: config.max_depth,
                min_split: config.min_split,
                features_per_split: config.features_per_split,
                bootstrap: config.bootstrap,
            },
            trees: trees
                .iter()
                .map(|tree| TreeArt {
                    nodes: tree
                        .nodes
                        .iter()
                        .map(|node| match node {
                            TreeNode::Leaf { value } => NodeArt::Leaf { value: value.as_f64() },
                            TreeNode::Split { feature, threshold, left, right } => {
                                NodeArt::Split {
                                    feature: *feature,
                                    threshold: threshold.as_f64(),
                                    left: *left,
                                    right: *right,
                                }
                            }
                        })
                        .collect(),
                })
                .collect(),
        },
        ModelParams::Dnn { net, y_mean, y_std, curve } => {
            let mut sizes = vec![net.layers[0].inputs];
            sizes.extend(net.layers.iter().map(|l| l.outputs));
            let mut bytes = Vec::with_capacity(net.num_params() * 8);
            for p in 0..net.num_params() {
                bytes.extend_from_slice(&net.get_param(p).as_f64().to_le_bytes());
            }
            ParamsArt::Dnn {
                sizes,
                weights_b64: BASE64.encode(bytes),
                y_mean: y_mean.as_f64(),
                y_std: y_std.as_f64(),
                curve: to_f64s(curve),
            }
        }
    };

    let artifact = ArtifactV1 {
        version: ARTIFACT_VERSION,
        family: model.family.tag().to_string(),
        seed: model.seed,
        means: to_f64s(&model.norm.means),
        stds: to_f64s(&model.norm.stds),
        fold_scores: to_f64s(&model.fold_scores),
        test_r2: model.test_r2.map(|v| v.as_f64()),
        params,
    };
    Ok(serde_json::to_string_pretty(&artifact)?)
}

pub fn decode_model<R: Real>(json: &str) -> Result<TrainedModelOf<R>, ModelError> {
    // Check the version before asking serde for the full shape, so a future
    // format fails with "unsupported version" rather than a parse error.
    #[derive(Deserialize)]
    struct VersionOnly {
        version: u32,
    }
    let v: VersionOnly = serde_json::from_str(json)?;
    if v.version != ARTIFACT_VERSION {
        return Err(ModelError::UnsupportedVersion(v.version));
    }

    let artifact: ArtifactV1 = serde_json::from_str(json)?;
    let family = Family::from_tag(&artifact.family)
        .ok_or_else(|| ModelError::MalformedArtifact(format!("unknown family {:?}", artifact.family)))?;

    let params = match artifact.params {
        ParamsArt::Linear { weights, rank_deficient } => {
            ModelParams::Linear { weights: from_f64s(&weights), rank_deficient }
        }
        ParamsArt::Polynomial { degree, exponents, weights, rank_deficient } => {
            if exponents.len() != weights.len() {
                return Err(ModelError::MalformedArtifact(format!(
                    "{} exponent rows but {} weights",
                    exponents.len(),
                    weights.len()
                )));
            }
            ModelParams::Polynomial {
                degree,
                exponents,
                weights: from_f64s(&weights),
                rank_deficient,
            }
        }
        ParamsArt::Ridge { lambda, weights } => ModelParams::Ridge {
            lambda: R::from_f64_lossy(lambda),
            weights: from_f64s(&weights),
        },
        ParamsArt::Forest { config, trees } => ModelParams::Forest {
            config: ForestConfig {
                trees: config.trees,
                max_depth: config.max_depth,
                min_split: config.min_split,
                features_per_split: config.features_per_split,
                bootstrap: config.bootstrap,
            },
            trees: trees
                .into_iter()
                .map(|tree| {
                    let nodes = tree
                        .nodes
                        .into_iter()
                        .map(|node| match node {
                            NodeArt::Leaf { value } => {
                                TreeNode::Leaf { value: R::from_f64_lossy(value) }
                            }
                            NodeArt::Split { feature, threshold, left, right } => TreeNode::Split {
                                feature,
                                threshold: R::from_f64_lossy(threshold),
                                left,
                                right,
                            },
                        })
                        .collect();
                    Tree { nodes }
                })
                .collect(),
        },
        ParamsArt::Dnn { sizes, weights_b64, y_mean, y_std, curve } => {
            if sizes.len() < 2 {
                return Err(ModelError::MalformedArtifact("network needs two sizes".into()));
            }
            let layers: Vec<DenseLayer<R>> = sizes
                .windows(2)
                .map(|pair| DenseLayer {
                    inputs: pair[0],
                    outputs: pair[1],
                    w: vec![R::zero(); pair[0] * pair[1]],
                    b: vec![R::zero(); pair[1]],
                })
                .collect();
            let mut net = Mlp { layers };
            let bytes = BASE64
                .decode(weights_b64.as_bytes())
                .map_err(|e| ModelError::MalformedArtifact(format!("weight base64: {e}")))?;
            if bytes.len() != net.num_params() * 8 {
                return Err(ModelError::MalformedArtifact(format!(
                    "{} weight bytes for a {}-parameter network",
                    bytes.len(),
                    net.num_params()
                )));
            }
            for (p, chunk) in bytes.chunks_exact(8).enumerate() {
                let raw = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                net.set_param(p, R::from_f64_lossy(raw));
            }
            ModelParams::Dnn {
                net,
                y_mean: R::from_f64_lossy(y_mean),
                y_std: R::from_f64_lossy(y_std),
                curve: from_f64s(&curve),
            }
        }
    };

    Ok(TrainedModelOf {
        family,
        params,
        norm: Normalization {
            means: from_f64s(&artifact.means),
            stds: from_f64s(&artifact.stds),
        },
        fold_scores: from_f64s(&artifact.fold_scores),
        test_r2: artifact.test_r2.map(R::from_f64_lossy),
        seed: artifact.seed,
    })
}

pub fn save_model<R: Real>(
    model: &TrainedModelOf<R>,
    path: impl AsRef<Path>,
) -> Result<(), ModelError> {
    fs::write(path, encode_model(model)?)?;
    Ok(())
}

pub fn load_model<R: Real>(path: impl AsRef<Path>) -> Result<TrainedModelOf<R>, ModelError> {
    decode_model(&fs::read_to_string(path)?)
}
