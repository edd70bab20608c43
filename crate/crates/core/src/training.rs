//! Trains one LMU slice by backpropagation through time.
//!
//! The forward pass records per-step traces; [`backprop_window`] walks them
//! backwards to produce exact analytic gradients of the squared error with
//! respect to every trainable tensor (the discretized delay matrices stay
//! frozen). [`train_slice`] wraps this in a mini-batch loop with optional
//! gradient clipping, plain or adaptive-moment updates, and early stopping on
//! validation loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Mat};
use crate::lmu::{
    forward_window, forward_window_traced, Activation, DelayNetwork, LmuParams, LmuState,
};

/// Update rule used by [`train_slice`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    /// Plain gradient descent.
    Sgd,
    /// Adaptive-moment gradient descent.
    Adam,
}

/// Training hyperparameters. All values are plumbing defaults, fully
/// configurable from the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Number of consecutive epochs without validation improvement tolerated
    /// before stopping.
    pub early_stop_patience: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    /// Clip gradients at this infinity norm; `None` disables clipping.
    pub grad_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            max_epochs: 30,
            batch_size: 32,
            early_stop_patience: 10,
            seed: 42,
            optimizer: OptimizerKind::Adam,
            grad_clip: Some(1.0),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "learning_rate",
                reason: format!("must be positive, got {}", self.learning_rate),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter {
                name: "batch_size",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidParameter {
                name: "max_epochs",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One trained slice: the parameters from the best validation epoch together
/// with the frozen delay network and the training loss curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSlice {
    pub params: LmuParams,
    pub dn: DelayNetwork,
    /// Mean squared error per epoch over the training windows.
    pub train_loss_curve: Vec<f64>,
    /// Zero-based index into `train_loss_curve` of the epoch whose parameters
    /// were kept (lowest validation MSE).
    pub best_epoch: usize,
}

impl TrainedSlice {
    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        forward_window(&self.dn, &self.params, window).map(|(pred, _)| pred)
    }
}

/// Mean of squared differences between two equal-length sequences.
pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch {
            what: "loss_mse sequences",
            expected: target.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("loss_mse"));
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Gradients of the squared error with the same shapes as the trainable
/// fields of [`LmuParams`]. The frozen `a_bar`/`b_bar` have no entries here.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub e_x: Vec<f64>,
    pub e_h: Vec<f64>,
    pub e_m: Vec<f64>,
    pub w_x: Mat,
    pub w_h: Mat,
    pub w_m: Mat,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl Gradients {
    fn zeros(params: &LmuParams) -> Self {
        Gradients {
            e_x: vec![0.0; params.input_size],
            e_h: vec![0.0; params.n],
            e_m: vec![0.0; params.d],
            w_x: Mat::zeros(params.n, params.input_size),
            w_h: Mat::zeros(params.n, params.n),
            w_m: Mat::zeros(params.n, params.d),
            output_weights: vec![0.0; params.n],
            output_bias: 0.0,
        }
    }

    /// Flattens in the same order as [`flatten_params`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.e_x);
        out.extend_from_slice(&self.e_h);
        out.extend_from_slice(&self.e_m);
        out.extend_from_slice(self.w_x.data());
        out.extend_from_slice(self.w_h.data());
        out.extend_from_slice(self.w_m.data());
        out.extend_from_slice(&self.output_weights);
        out.push(self.output_bias);
        out
    }
}

/// Flat view of the trainable parameters, fixed order:
/// `e_x, e_h, e_m, w_x, w_h, w_m, output_weights, output_bias`.
pub fn flatten_params(params: &LmuParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.param_count());
    out.extend_from_slice(&params.e_x);
    out.extend_from_slice(&params.e_h);
    out.extend_from_slice(&params.e_m);
    out.extend_from_slice(params.w_x.data());
    out.extend_from_slice(params.w_h.data());
    out.extend_from_slice(params.w_m.data());
    out.extend_from_slice(&params.output_weights);
    out.push(params.output_bias);
    out
}

/// Writes a flat vector produced by [`flatten_params`] back into the struct.
pub fn unflatten_params(params: &mut LmuParams, flat: &[f64]) {
    debug_assert_eq!(flat.len(), params.param_count());
    let mut at = 0;
    let mut take = |dst: &mut [f64]| {
        dst.copy_from_slice(&flat[at..at + dst.len()]);
        at += dst.len();
    };
    take(&mut params.e_x);
    take(&mut params.e_h);
    take(&mut params.e_m);
    take(params.w_x.data_mut());
    take(params.w_h.data_mut());
    take(params.w_m.data_mut());
    take(&mut params.output_weights);
    params.output_bias = flat[at];
}

/// Exact analytic gradients of `(prediction - target)^2` for one window via
/// backpropagation through time over the recorded traces.
pub fn backprop_window(
    dn: &DelayNetwork,
    params: &LmuParams,
    window: &[f64],
    target: f64,
    state: &LmuState,
) -> Result<Gradients> {
    if !state.is_recording() || state.steps() != window.len() || window.is_empty() {
        return Err(Error::MissingTraces);
    }
    if params.input_size != 1 {
        return Err(Error::DimensionMismatch {
            what: "input_size (scalar windows)",
            expected: 1,
            got: params.input_size,
        });
    }
    if state.h_trace.last().map(|h| h.len()) != Some(params.n)
        || state.m_trace.last().map(|m| m.len()) != Some(params.d)
    {
        return Err(Error::DimensionMismatch {
            what: "trace shapes",
            expected: params.n,
            got: state.h_trace.last().map(|h| h.len()).unwrap_or(0),
        });
    }

    let len = window.len();
    let n = params.n;
    let d = params.d;
    let act = params.hidden_activation;
    let zeros_h = vec![0.0; n];
    let zeros_m = vec![0.0; d];

    let h_last = &state.h_trace[len - 1];
    let pred = dot(&params.output_weights, h_last) + params.output_bias;
    let dl_dpred = 2.0 * (pred - target);

    let mut grads = Gradients::zeros(params);
    grads.output_bias = dl_dpred;
    for (g, &h) in grads.output_weights.iter_mut().zip(h_last) {
        *g = dl_dpred * h;
    }

    // dL/dh_t and dL/dm_t flowing backwards through the unrolled recurrence.
    let mut dh: Vec<f64> = params.output_weights.iter().map(|w| dl_dpred * w).collect();
    let mut dm = vec![0.0; d];
    let mut dz = vec![0.0; n];

    for t in (0..len).rev() {
        let h_t = &state.h_trace[t];
        let m_t = &state.m_trace[t];
        let h_prev = if t == 0 { &zeros_h } else { &state.h_trace[t - 1] };
        let m_prev = if t == 0 { &zeros_m } else { &state.m_trace[t - 1] };
        let x_t = window[t];

        // h_t = f(z_t), z_t = W_x x_t + W_h h_{t-1} + W_m m_t
        for ((z, &dhi), &hi) in dz.iter_mut().zip(&dh).zip(h_t) {
            *z = dhi * act.derivative_from_output(hi);
        }
        grads.w_x.add_outer(x_t, &dz, &[1.0]);
        grads.w_h.add_outer(1.0, &dz, h_prev);
        grads.w_m.add_outer(1.0, &dz, m_t);

        // m_t feeds z_t directly and m_{t+1} through A_bar (already in dm).
        params.w_m.matvec_transpose_add(&dz, &mut dm);

        // u_t enters m_t through B_bar.
        let du = dot(&dn.b_bar, &dm);
        grads.e_x[0] += du * x_t;
        axpy(du, h_prev, &mut grads.e_h);
        axpy(du, m_prev, &mut grads.e_m);

        // Propagate to step t-1.
        let mut dh_prev = vec![0.0; n];
        params.w_h.matvec_transpose_add(&dz, &mut dh_prev);
        axpy(du, &params.e_h, &mut dh_prev);

        let mut dm_prev = vec![0.0; d];
        dn.a_bar.matvec_transpose_add(&dm, &mut dm_prev);
        axpy(du, &params.e_m, &mut dm_prev);

        dh = dh_prev;
        dm = dm_prev;
    }

    Ok(grads)
}

/// Per-batch update state shared by both optimizers.
struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(kind: OptimizerKind, len: usize) -> Self {
        Optimizer {
            kind,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, &g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let bc1 = 1.0 - Self::BETA1.powi(self.t as i32);
                let bc2 = 1.0 - Self::BETA2.powi(self.t as i32);
                for i in 0..params.len() {
                    let g = grad[i];
                    self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
                    self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
                    let m_hat = self.m[i] / bc1;
                    let v_hat = self.v[i] / bc2;
                    params[i] -= lr * m_hat / (v_hat.sqrt() + Self::EPS);
                }
            }
        }
    }
}

/// Scales `grad` so its infinity norm does not exceed `clip`.
fn clip_inf_norm(grad: &mut [f64], clip: f64) {
    let max = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    if max > clip {
        let scale = clip / max;
        for g in grad.iter_mut() {
            *g *= scale;
        }
    }
}

/// Model family trainable by [`fit`]: anything exposing flat parameters, a
/// scalar forecast, and a per-window squared-error gradient.
pub(crate) trait FitModel: Clone {
    fn flat(&self) -> Vec<f64>;
    fn set_flat(&mut self, flat: &[f64]);
    fn predict(&self, window: &[f64]) -> Result<f64>;
    fn loss_grad(&self, window: &[f64], target: f64) -> Result<(f64, Vec<f64>)>;
}

#[derive(Clone)]
pub(crate) struct LmuFit {
    pub dn: DelayNetwork,
    pub params: LmuParams,
}

impl FitModel for LmuFit {
    fn flat(&self) -> Vec<f64> {
        flatten_params(&self.params)
    }

    fn set_flat(&mut self, flat: &[f64]) {
        unflatten_params(&mut self.params, flat);
    }

    fn predict(&self, window: &[f64]) -> Result<f64> {
        forward_window(&self.dn, &self.params, window).map(|(pred, _)| pred)
    }

    fn loss_grad(&self, window: &[f64], target: f64) -> Result<(f64, Vec<f64>)> {
        let (pred, state) = forward_window_traced(&self.dn, &self.params, window)?;
        let grads = backprop_window(&self.dn, &self.params, window, target, &state)?;
        Ok(((pred - target) * (pred - target), grads.to_flat()))
    }
}

pub(crate) struct FitOutcome<M> {
    pub model: M,
    pub train_loss_curve: Vec<f64>,
    pub best_epoch: usize,
}

/// Mini-batch training loop: seeded shuffling, mean-of-batch gradients,
/// optional clipping, early stopping on validation MSE. Returns the model
/// from the best validation epoch. Deterministic given the config seed.
pub(crate) fn fit<M: FitModel>(
    mut model: M,
    train: &[(Vec<f64>, f64)],
    val: &[(Vec<f64>, f64)],
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FitOutcome<M>> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if val.is_empty() {
        return Err(Error::EmptyInput("validation set"));
    }
    let window_len = train[0].0.len();
    for (w, _) in train.iter().chain(val.iter()) {
        if w.len() != window_len {
            return Err(Error::DimensionMismatch {
                what: "window length",
                expected: window_len,
                got: w.len(),
            });
        }
    }

    let mut flat = model.flat();
    let mut optimizer = Optimizer::new(config.optimizer, flat.len());
    let mut indices: Vec<usize> = (0..train.len()).collect();
    let mut curve = Vec::with_capacity(config.max_epochs);
    let mut best_val = f64::INFINITY;
    let mut best_model = model.clone();
    let mut best_epoch = 0;
    let mut stall = 0usize;
    let mut grad_acc = vec![0.0; flat.len()];

    for epoch in 0..config.max_epochs {
        indices.shuffle(rng);
        let mut loss_sum = 0.0;
        for chunk in indices.chunks(config.batch_size) {
            grad_acc.iter_mut().for_each(|g| *g = 0.0);
            for &i in chunk {
                let (loss, grad) = model.loss_grad(&train[i].0, train[i].1)?;
                loss_sum += loss;
                axpy(1.0, &grad, &mut grad_acc);
            }
            let inv = 1.0 / chunk.len() as f64;
            grad_acc.iter_mut().for_each(|g| *g *= inv);
            if let Some(clip) = config.grad_clip {
                clip_inf_norm(&mut grad_acc, clip);
            }
            optimizer.step(&mut flat, &grad_acc, config.learning_rate);
            model.set_flat(&flat);
        }
        let train_loss = loss_sum / train.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        curve.push(train_loss);

        let mut val_sum = 0.0;
        for (w, target) in val {
            let pred = model.predict(w)?;
            val_sum += (pred - target) * (pred - target);
        }
        let val_loss = val_sum / val.len() as f64;
        if !val_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }

        if val_loss < best_val {
            best_val = val_loss;
            best_model = model.clone();
            best_epoch = epoch;
            stall = 0;
        } else {
            stall += 1;
            if stall > config.early_stop_patience {
                break;
            }
        }
    }

    Ok(FitOutcome {
        model: best_model,
        train_loss_curve: curve,
        best_epoch,
    })
}

/// Trains one LMU slice on `(window, target)` pairs. Parameters are
/// initialized from the config seed; the returned slice carries the weights
/// of the epoch with the lowest validation MSE.
pub fn train_slice(
    train: &[(Vec<f64>, f64)],
    val: &[(Vec<f64>, f64)],
    dn: &DelayNetwork,
    hidden: usize,
    activation: Activation,
    config: &TrainConfig,
) -> Result<TrainedSlice> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = LmuParams::init(1, hidden, dn.d, activation, &mut rng)?;
    let model = LmuFit {
        dn: dn.clone(),
        params,
    };
    let outcome = fit(model, train, val, config, &mut rng)?;
    Ok(TrainedSlice {
        params: outcome.model.params,
        dn: outcome.model.dn,
        train_loss_curve: outcome.train_loss_curve,
        best_epoch: outcome.best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmu::build_delay_network;

    #[test]
    fn mse_examples() {
        assert_eq!(loss_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss_mse(&[1.0, 5.0], &[2.0, 4.0]).unwrap(), 1.0);
        assert!(matches!(loss_mse(&[], &[]), Err(Error::EmptyInput(_))));
        assert!(loss_mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn zero_model() -> (DelayNetwork, LmuParams) {
        let dn = build_delay_network(3.0, 1.0, 2).unwrap();
        let params = LmuParams::new(
            1,
            2,
            2,
            vec![0.0],
            vec![0.0; 2],
            vec![0.0; 2],
            Mat::zeros(2, 1),
            Mat::zeros(2, 2),
            Mat::zeros(2, 2),
            Activation::Tanh,
            vec![0.0; 2],
            0.0,
        )
        .unwrap();
        (dn, params)
    }

    #[test]
    fn zero_model_zero_target_gives_zero_gradients() {
        let (dn, params) = zero_model();
        let window = [0.0, 0.0, 0.0];
        let (_, state) = forward_window_traced(&dn, &params, &window).unwrap();
        let grads = backprop_window(&dn, &params, &window, 0.0, &state).unwrap();
        assert!(grads.to_flat().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backprop_requires_traces() {
        let (dn, params) = zero_model();
        let window = [0.0, 0.0, 0.0];
        let (_, state) = forward_window(&dn, &params, &window).unwrap();
        assert_eq!(
            backprop_window(&dn, &params, &window, 0.0, &state),
            Err(Error::MissingTraces)
        );
    }

    fn random_tiny_model(seed: u64) -> (DelayNetwork, LmuParams, Vec<f64>, f64) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dn = build_delay_network(3.0, 1.0, 2).unwrap();
        let mut params = LmuParams::init(1, 2, 2, Activation::Tanh, &mut rng).unwrap();
        // Randomize every trainable so no gradient path is trivially zero.
        let flat: Vec<f64> = (0..params.param_count())
            .map(|_| rng.gen_range(-0.5..0.5))
            .collect();
        unflatten_params(&mut params, &flat);
        let window: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target = rng.gen_range(-1.0..1.0);
        (dn, params, window, target)
    }

    fn central_difference(
        dn: &DelayNetwork,
        params: &LmuParams,
        window: &[f64],
        target: f64,
        idx: usize,
        step: f64,
    ) -> f64 {
        let loss_at = |flat: &[f64]| {
            let mut p = params.clone();
            unflatten_params(&mut p, flat);
            let (pred, _) = forward_window(dn, &p, window).unwrap();
            (pred - target) * (pred - target)
        };
        let mut flat = flatten_params(params);
        flat[idx] += step;
        let plus = loss_at(&flat);
        flat[idx] -= 2.0 * step;
        let minus = loss_at(&flat);
        (plus - minus) / (2.0 * step)
    }

    #[test]
    fn gradients_match_central_differences_on_random_tiny_models() {
        for seed in 0..50 {
            let (dn, params, window, target) = random_tiny_model(seed);
            let (_, state) = forward_window_traced(&dn, &params, &window).unwrap();
            let analytic = backprop_window(&dn, &params, &window, target, &state)
                .unwrap()
                .to_flat();
            for idx in 0..analytic.len() {
                let numeric = central_difference(&dn, &params, &window, target, idx, 1e-5);
                let denom = analytic[idx].abs().max(numeric.abs()).max(1e-6);
                let rel = (analytic[idx] - numeric).abs() / denom;
                assert!(
                    rel <= 1e-4,
                    "seed {seed} idx {idx}: analytic {} vs numeric {} (rel {rel:.2e})",
                    analytic[idx],
                    numeric
                );
            }
        }
    }

    #[test]
    fn single_sgd_step_does_not_increase_batch_loss() {
        for seed in [3u64, 11, 29] {
            let (dn, params, _, _) = random_tiny_model(seed);
            let batch: Vec<(Vec<f64>, f64)> = (0..8)
                .map(|i| {
                    let w: Vec<f64> = (0..3).map(|t| ((i * 3 + t) as f64 * 0.37).sin()).collect();
                    let target = ((i as f64) * 0.11).cos();
                    (w, target)
                })
                .collect();
            let model = LmuFit {
                dn: dn.clone(),
                params,
            };
            let batch_loss = |m: &LmuFit| -> f64 {
                batch
                    .iter()
                    .map(|(w, t)| {
                        let p = m.predict(w).unwrap();
                        (p - t) * (p - t)
                    })
                    .sum::<f64>()
                    / batch.len() as f64
            };
            for lr in [1e-4, 1e-5, 1e-6] {
                let before = batch_loss(&model);
                let mut grad = vec![0.0; model.flat().len()];
                for (w, t) in &batch {
                    let (_, g) = model.loss_grad(w, *t).unwrap();
                    axpy(1.0 / batch.len() as f64, &g, &mut grad);
                }
                let mut stepped = model.clone();
                let mut flat = stepped.flat();
                for (p, g) in flat.iter_mut().zip(&grad) {
                    *p -= lr * g;
                }
                stepped.set_flat(&flat);
                let after = batch_loss(&stepped);
                assert!(
                    after <= before + 1e-12,
                    "seed {seed} lr {lr}: loss rose {before} -> {after}"
                );
            }
        }
    }

    fn constant_dataset(value: f64, count: usize) -> Vec<(Vec<f64>, f64)> {
        (0..count).map(|_| (vec![value; 4], value)).collect()
    }

    #[test]
    fn zero_dataset_converges_quickly() {
        let dn = build_delay_network(4.0, 1.0, 4).unwrap();
        let config = TrainConfig {
            max_epochs: 5,
            ..TrainConfig::default()
        };
        let slice = train_slice(
            &constant_dataset(0.0, 64),
            &constant_dataset(0.0, 16),
            &dn,
            4,
            Activation::Tanh,
            &config,
        )
        .unwrap();
        let last = *slice.train_loss_curve.last().unwrap();
        assert!(last < 1e-4, "loss {last} after 5 epochs");
        assert!(slice.best_epoch < slice.train_loss_curve.len());
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let dn = build_delay_network(5.0, 1.0, 5).unwrap();
        let data: Vec<(Vec<f64>, f64)> = (0..80)
            .map(|i| {
                let w: Vec<f64> = (0..5).map(|t| ((i + t) as f64 * 0.21).sin()).collect();
                (w, ((i + 5) as f64 * 0.21).sin())
            })
            .collect();
        let (train, val) = data.split_at(60);
        let config = TrainConfig {
            max_epochs: 4,
            ..TrainConfig::default()
        };
        let a = train_slice(train, val, &dn, 6, Activation::Tanh, &config).unwrap();
        let b = train_slice(train, val, &dn, 6, Activation::Tanh, &config).unwrap();
        assert_eq!(a.train_loss_curve, b.train_loss_curve);
        assert_eq!(a.params, b.params);
        assert_eq!(a.best_epoch, b.best_epoch);
    }

    #[test]
    fn ar1_training_beats_constant_mean_predictor() {
        use rand::Rng;
        // Seeded AR(1): x_{t+1} = 0.8 x_t + e. The best constant predictor has
        // MSE equal to the process variance; the slice should do better.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut x = 0.0_f64;
        let series: Vec<f64> = (0..1200)
            .map(|_| {
                x = 0.8 * x + 0.2 * rng.gen_range(-1.0..1.0);
                x
            })
            .collect();
        let lookback = 5;
        let pairs: Vec<(Vec<f64>, f64)> = (0..series.len() - lookback)
            .map(|i| (series[i..i + lookback].to_vec(), series[i + lookback]))
            .collect();
        let (train, rest) = pairs.split_at(900);
        let (val, _) = rest.split_at(200);
        let dn = build_delay_network(5.0, 1.0, 5).unwrap();
        let config = TrainConfig {
            max_epochs: 20,
            early_stop_patience: 5,
            ..TrainConfig::default()
        };
        let slice = train_slice(train, val, &dn, 8, Activation::Tanh, &config).unwrap();

        let val_targets: Vec<f64> = val.iter().map(|(_, t)| *t).collect();
        let mean = val_targets.iter().sum::<f64>() / val_targets.len() as f64;
        let const_mse =
            val_targets.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / val_targets.len() as f64;
        let preds: Vec<f64> = val.iter().map(|(w, _)| slice.predict(w).unwrap()).collect();
        let model_mse = loss_mse(&preds, &val_targets).unwrap();
        assert!(
            model_mse < const_mse,
            "model {model_mse} not below constant-mean {const_mse}"
        );
    }

    #[test]
    fn empty_dataset_rejected() {
        let dn = build_delay_network(4.0, 1.0, 4).unwrap();
        let err = train_slice(
            &[],
            &constant_dataset(0.0, 4),
            &dn,
            4,
            Activation::Tanh,
            &TrainConfig::default(),
        );
        assert!(matches!(err, Err(Error::EmptyInput(_))));
    }
}
