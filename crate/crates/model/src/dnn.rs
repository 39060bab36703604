//! A small fully connected network for regression: ReLU hidden layers, a
//! linear scalar output, MAE loss, Adam updates, and early stopping on a
//! held-out validation slice.

use fncap_core::num::{real, real_usize, Real};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{DatasetOf, Normalization};
use crate::error::ModelError;
use crate::model::{Family, ModelParams, TrainedModelOf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnnInit {
    /// Gaussian weights scaled by `sqrt(2 / fan_in)`, zero biases.
    He,
    /// Everything zero. Hidden units stay dead under ReLU, so the net can
    /// only learn its output bias; useful as a controlled baseline.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnConfig {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a validation improvement.
    pub patience: usize,
    pub validation_fraction: f64,
    pub init: DnnInit,
}

impl Default for DnnConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 12,
            hidden_width: 64,
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 500,
            patience: 25,
            validation_fraction: 0.15,
            init: DnnInit::He,
        }
    }
}

pub const MIN_DNN_ROWS: usize = 4;

/// One dense layer; `w` is `outputs x inputs` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<R> {
    pub inputs: usize,
    pub outputs: usize,
    pub w: Vec<R>,
    pub b: Vec<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<R> {
    pub layers: Vec<DenseLayer<R>>,
}

impl<R: Real> Mlp<R> {
    /// `sizes` runs input first, output last, e.g. `[5, 64, 64, 1]`.
    pub fn new(sizes: &[usize], init: DnnInit, rng: &mut ChaCha8Rng) -> Mlp<R> {
        assert!(sizes.len() >= 2, "need at least an input and an output size");
        let layers = sizes
            .windows(2)
            .map(|pair| {
                let (inputs, outputs) = (pair[0], pair[1]);
                let w = match init {
                    DnnInit::Zero => vec![R::zero(); inputs * outputs],
                    DnnInit::He => {
                        let scale = (2.0 / inputs as f64).sqrt();
                        (0..inputs * outputs)
                            .map(|_| real::<R>(rng.sample::<f64, _>(StandardNormal) * scale))
                            .collect()
                    }
                };
                DenseLayer { inputs, outputs, w, b: vec![R::zero(); outputs] }
            })
            .collect();
        Mlp { layers }
    }

    pub fn forward(&self, x: &[R]) -> R {
        let acts = self.forward_trace(x);
        acts[self.layers.len()][0]
    }

    /// All post-activation vectors, `acts[0]` being the input itself.
    fn forward_trace(&self, x: &[R]) -> Vec<Vec<R>> {
        debug_assert_eq!(x.len(), self.layers[0].inputs);
        let mut acts: Vec<Vec<R>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let prev = &acts[l];
            let hidden = l + 1 < self.layers.len();
            let out = (0..layer.outputs)
                .map(|o| {
                    let z = layer.b[o]
                        + prev
                            .iter()
                            .enumerate()
                            .fold(R::zero(), |acc, (i, &a)| acc + layer.w[o * layer.inputs + i] * a);
                    if hidden && z < R::zero() { R::zero() } else { z }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter order: layer 0 weights, layer 0 biases, layer 1
    /// weights, ... Used by the optimizer and by finite-difference checks.
    pub fn get_param(&self, mut index: usize) -> R {
        for layer in &self.layers {
            if index < layer.w.len() {
                return layer.w[index];
            }
            index -= layer.w.len();
            if index < layer.b.len() {
                return layer.b[index];
            }
            index -= layer.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut index: usize, value: R) {
        for layer in &mut self.layers {
            if index < layer.w.len() {
                layer.w[index] = value;
                return;
            }
            index -= layer.w.len();
            if index < layer.b.len() {
                layer.b[index] = value;
                return;
            }
            index -= layer.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Mean absolute error of the net over the batch.
    pub fn batch_loss(&self, xs: &[Vec<R>], ys: &[R]) -> R {
        let sum = xs
            .iter()
            .zip(ys)
            .fold(R::zero(), |acc, (x, &y)| acc + (self.forward(x) - y).abs());
        sum / real_usize(xs.len().max(1))
    }

    /// MAE over the batch plus its gradient in flat parameter order.
    pub fn batch_gradients(&self, xs: &[Vec<R>], ys: &[R]) -> (R, Vec<R>) {
        let mut grads = vec![R::zero(); self.num_params()];
        let mut loss = R::zero();
        let batch = real_usize::<R>(xs.len().max(1));

        for (x, &y) in xs.iter().zip(ys) {
            let acts = self.forward_trace(x);
            let out = acts[self.layers.len()][0];
            let err = out - y;
            loss += err.abs();
            // d|e|/de, with the subgradient at zero taken as zero.
            let g = if err > R::zero() {
                R::one() / batch
            } else if err < R::zero() {
                -R::one() / batch
            } else {
                R::zero()
            };

            // Backpropagate: delta holds dL/dz for the current layer.
            let mut delta = vec![g];
            let mut offset = self.num_params();
            for (l, layer) in self.layers.iter().enumerate().rev() {
                offset -= layer.w.len() + layer.b.len();
                let input = &acts[l];
                for (o, &d) in delta.iter().enumerate() {
                    grads[offset + layer.w.len() + o] += d;
                    for (i, &a) in input.iter().enumerate() {
                        grads[offset + o * layer.inputs + i] += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                // Pull the delta through the weights, then through the ReLU
                // of the previous layer (its output is positive iff its
                // pre-activation was).
                delta = (0..layer.inputs)
                    .map(|i| {
                        if input[i] > R::zero() {
                            delta
                                .iter()
                                .enumerate()
                                .fold(R::zero(), |acc, (o, &d)| {
                                    acc + d * layer.w[o * layer.inputs + i]
                                })
                        } else {
                            R::zero()
                        }
                    })
                    .collect();
            }
        }
        (loss / batch, grads)
    }
}

pub fn fit_dnn<R: Real>(
    train: &DatasetOf<R>,
    config: &DnnConfig,
    seed: u64,
) -> Result<TrainedModelOf<R>, ModelError> {
    if train.len() < MIN_DNN_ROWS {
        return Err(ModelError::TooFewSamples { needed: MIN_DNN_ROWS, got: train.len() });
    }
    let norm = Normalization::fit(train);
    let zx = norm.apply(train);

    // The target is standardized too so the loss scale (and hence the Adam
    // step size) does not depend on the unit of the label.
    let n = real_usize::<R>(train.y.len());
    let y_mean = train.y.iter().fold(R::zero(), |a, &v| a + v) / n;
    let var =
        train.y.iter().fold(R::zero(), |a, &v| a + (v - y_mean) * (v - y_mean)) / n;
    let y_std = if var > R::zero() { var.sqrt() } else { R::one() };
    let zy: Vec<R> = train.y.iter().map(|&v| (v - y_mean) / y_std).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..zx.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((zx.len() as f64 * config.validation_fraction).round() as usize)
        .clamp(1, zx.len() - 1);
    let (val_idx, fit_idx) = order.split_at(n_val);
    let gather = |idx: &[usize]| -> (Vec<Vec<R>>, Vec<R>) {
        (idx.iter().map(|&i| zx.x[i].clone()).collect(), idx.iter().map(|&i| zy[i]).collect())
    };
    let (val_x, val_y) = gather(val_idx);
    let mut fit_order: Vec<usize> = fit_idx.to_vec();

    let mut sizes = vec![train.width()];
    sizes.extend(std::iter::repeat_n(config.hidden_width.max(1), config.hidden_layers));
    sizes.push(1);
    let mut net: Mlp<R> = Mlp::new(&sizes, config.init, &mut rng);

    // Adam state.
    let lr = real::<R>(config.learning_rate);
    let (beta1, beta2, eps) = (real::<R>(0.9), real::<R>(0.999), real::<R>(1e-8));
    let mut m = vec![R::zero(); net.num_params()];
    let mut v = vec![R::zero(); net.num_params()];
    let (mut b1t, mut b2t) = (R::one(), R::one());

    let mut curve: Vec<R> = Vec::new();
    let mut best = net.clone();
    let mut best_val = R::infinity();
    let mut stale = 0usize;

    for epoch in 0..config.max_epochs {
        fit_order.shuffle(&mut rng);
        for chunk in fit_order.chunks(config.batch_size.max(1)) {
            let (bx, by) = gather(chunk);
            let (loss, grads) = net.batch_gradients(&bx, &by);
            if !loss.is_finite() {
                return Err(ModelError::Diverged { epoch, loss: loss.as_f64() });
            }
            b1t = b1t * beta1;
            b2t = b2t * beta2;
            for (p, &g) in grads.iter().enumerate() {
                m[p] = beta1 * m[p] + (R::one() - beta1) * g;
                v[p] = beta2 * v[p] + (R::one() - beta2) * g * g;
                let m_hat = m[p] / (R::one() - b1t);
                let v_hat = v[p] / (R::one() - b2t);
                let value = net.get_param(p) - lr * m_hat / (v_hat.sqrt() + eps);
                net.set_param(p, value);
            }
        }

        let (fx, fy) = gather(&fit_order);
        let train_mae = net.batch_loss(&fx, &fy);
        let val_mae = net.batch_loss(&val_x, &val_y);
        if !train_mae.is_finite() || !val_mae.is_finite() {
            return Err(ModelError::Diverged { epoch, loss: train_mae.as_f64() });
        }
        curve.push(train_mae);

        if val_mae < best_val {
            best_val = val_mae;
            best = net.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale > config.patience {
                break;
            }
        }
    }

    Ok(TrainedModelOf {
        family: Family::Dnn,
        params: ModelParams::Dnn { net: best, y_mean, y_std, curve },
        norm,
        fold_scores: Vec::new(),
        test_r2: None,
        seed,
    })
}
