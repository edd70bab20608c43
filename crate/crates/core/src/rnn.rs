//! Minimal simple-RNN forecaster, kept as a reference plug-in so ensemble
//! ablations can swap the slice predictor.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Mat};
use crate::lmu::Activation;
use crate::training::{fit, FitModel, TrainConfig};

/// Trainable parameters of the simple recurrent cell
/// `h_t = f(w_x * x_t + W_h h_{t-1} + b)` with a scalar affine head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    pub n: usize,
    pub w_x: Vec<f64>,
    pub w_h: Mat,
    pub bias: Vec<f64>,
    pub hidden_activation: Activation,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl RnnParams {
    pub fn init<R: Rng>(n: usize, hidden_activation: Activation, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "hidden size must be at least 1".into(),
            });
        }
        let mut uniform = |fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            rng.gen_range(-bound..bound)
        };
        Ok(RnnParams {
            n,
            w_x: (0..n).map(|_| uniform(1)).collect(),
            w_h: Mat::from_fn(n, n, |_, _| uniform(n)),
            bias: vec![0.0; n],
            hidden_activation,
            output_weights: (0..n).map(|_| uniform(n)).collect(),
            output_bias: 0.0,
        })
    }

    fn param_count(&self) -> usize {
        self.n + self.n * self.n + self.n + self.n + 1
    }
}

/// A trained simple-RNN slice, mirroring the LMU `TrainedSlice`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRnn {
    pub params: RnnParams,
    pub train_loss_curve: Vec<f64>,
    pub best_epoch: usize,
}

impl TrainedRnn {
    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        forward_rnn(&self.params, window).map(|(pred, _)| pred)
    }
}

/// Runs a window through the cell from a zero state; returns the forecast
/// and the per-step hidden states.
pub fn forward_rnn(params: &RnnParams, window: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
    if window.is_empty() {
        return Err(Error::EmptyInput("window"));
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("window"));
    }
    let n = params.n;
    let mut h = vec![0.0; n];
    let mut trace = Vec::with_capacity(window.len());
    let mut acc = vec![0.0; n];
    for &x in window {
        params.w_h.matvec(&h, &mut acc);
        let mut next = vec![0.0; n];
        for i in 0..n {
            next[i] = params
                .hidden_activation
                .apply(params.w_x[i] * x + acc[i] + params.bias[i]);
        }
        h = next;
        trace.push(h.clone());
    }
    let pred = dot(&params.output_weights, &h) + params.output_bias;
    Ok((pred, trace))
}

#[derive(Clone)]
struct RnnFit {
    params: RnnParams,
}

impl FitModel for RnnFit {
    fn flat(&self) -> Vec<f64> {
        let p = &self.params;
        let mut out = Vec::with_capacity(p.param_count());
        out.extend_from_slice(&p.w_x);
        out.extend_from_slice(p.w_h.data());
        out.extend_from_slice(&p.bias);
        out.extend_from_slice(&p.output_weights);
        out.push(p.output_bias);
        out
    }

    fn set_flat(&mut self, flat: &[f64]) {
        let p = &mut self.params;
        debug_assert_eq!(flat.len(), p.param_count());
        let mut at = 0;
        let mut take = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[at..at + dst.len()]);
            at += dst.len();
        };
        take(&mut p.w_x);
        take(p.w_h.data_mut());
        take(&mut p.bias);
        take(&mut p.output_weights);
        p.output_bias = flat[at];
    }

    fn predict(&self, window: &[f64]) -> Result<f64> {
        forward_rnn(&self.params, window).map(|(pred, _)| pred)
    }

    fn loss_grad(&self, window: &[f64], target: f64) -> Result<(f64, Vec<f64>)> {
        let p = &self.params;
        let (pred, trace) = forward_rnn(p, window)?;
        let n = p.n;
        let act = p.hidden_activation;
        let dl_dpred = 2.0 * (pred - target);

        let mut g_wx = vec![0.0; n];
        let mut g_wh = Mat::zeros(n, n);
        let mut g_b = vec![0.0; n];
        let h_last = &trace[window.len() - 1];
        let g_out: Vec<f64> = h_last.iter().map(|&h| dl_dpred * h).collect();
        let g_out_bias = dl_dpred;

        let zeros = vec![0.0; n];
        let mut dh: Vec<f64> = p.output_weights.iter().map(|w| dl_dpred * w).collect();
        let mut dz = vec![0.0; n];
        for t in (0..window.len()).rev() {
            let h_t = &trace[t];
            let h_prev = if t == 0 { &zeros } else { &trace[t - 1] };
            for ((z, &dhi), &hi) in dz.iter_mut().zip(&dh).zip(h_t) {
                *z = dhi * act.derivative_from_output(hi);
            }
            axpy(window[t], &dz, &mut g_wx);
            g_wh.add_outer(1.0, &dz, h_prev);
            axpy(1.0, &dz, &mut g_b);
            let mut dh_prev = vec![0.0; n];
            p.w_h.matvec_transpose_add(&dz, &mut dh_prev);
            dh = dh_prev;
        }

        let mut flat = Vec::with_capacity(p.param_count());
        flat.extend_from_slice(&g_wx);
        flat.extend_from_slice(g_wh.data());
        flat.extend_from_slice(&g_b);
        flat.extend_from_slice(&g_out);
        flat.push(g_out_bias);
        Ok(((pred - target) * (pred - target), flat))
    }
}

/// Trains a simple-RNN slice with the same loop and stopping rules as the
/// LMU slices.
pub fn train_rnn_slice(
    train: &[(Vec<f64>, f64)],
    val: &[(Vec<f64>, f64)],
    hidden: usize,
    activation: Activation,
    config: &TrainConfig,
) -> Result<TrainedRnn> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = RnnParams::init(hidden, activation, &mut rng)?;
    let outcome = fit(RnnFit { params }, train, val, config, &mut rng)?;
    Ok(TrainedRnn {
        params: outcome.model.params,
        train_loss_curve: outcome.train_loss_curve,
        best_epoch: outcome.best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let params = RnnParams::init(3, Activation::Tanh, &mut rng).unwrap();
            let model = RnnFit { params };
            let window: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let target: f64 = rng.gen_range(-1.0..1.0);
            let (_, analytic) = model.loss_grad(&window, target).unwrap();
            let flat = model.flat();
            for idx in 0..flat.len() {
                let mut plus = model.clone();
                let mut v = flat.clone();
                v[idx] += 1e-5;
                plus.set_flat(&v);
                let mut minus = model.clone();
                v[idx] -= 2e-5;
                minus.set_flat(&v);
                let lp = {
                    let p = plus.predict(&window).unwrap();
                    (p - target) * (p - target)
                };
                let lm = {
                    let p = minus.predict(&window).unwrap();
                    (p - target) * (p - target)
                };
                let numeric = (lp - lm) / 2e-5;
                let denom = analytic[idx].abs().max(numeric.abs()).max(1e-6);
                assert!(
                    (analytic[idx] - numeric).abs() / denom <= 1e-4,
                    "idx {idx}: {} vs {}",
                    analytic[idx],
                    numeric
                );
            }
        }
    }

    #[test]
    fn trains_on_constant_series() {
        let data: Vec<(Vec<f64>, f64)> = (0..64).map(|_| (vec![0.5; 4], 0.5)).collect();
        let config = TrainConfig {
            max_epochs: 150,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let slice = train_rnn_slice(&data[..48], &data[48..], 4, Activation::Tanh, &config).unwrap();
        let pred = slice.predict(&[0.5; 4]).unwrap();
        assert!((pred - 0.5).abs() < 0.05, "pred {pred}");
    }
}
