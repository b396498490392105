//! Batch normalization over a batch of channel/time tensors.
//!
//! Channel statistics pool the batch and time dimensions. Training mode
//! normalizes with batch statistics and refreshes the running estimates;
//! inference mode normalizes with the running estimates alone.

use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

/// Per-channel scale/shift plus running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct BnState {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub eps: f64,
}

impl BnState {
    pub fn new(channels: usize) -> Self {
        BnState {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }
}

/// Everything the backward pass needs from a training-mode forward.
#[derive(Clone, Debug)]
pub struct BnCache {
    /// Normalized activations before gamma/beta.
    pub normalized: Vec<Tensor2>,
    /// 1 / sqrt(var + eps) per channel.
    pub inv_std: Vec<f64>,
    /// Pooled population per channel (batch * time).
    pub population: usize,
}

fn check_batch(batch: &[Tensor2], channels: usize) -> Result<()> {
    for t in batch {
        if t.rows() != channels {
            return Err(Error::shape(
                format!("{channels} channels"),
                format!("{} channels", t.rows()),
            ));
        }
    }
    Ok(())
}

/// Training-mode forward: normalize with batch statistics, update running
/// statistics, and return the cache for the backward pass.
pub fn batchnorm_train_fwd(
    batch: &[Tensor2],
    state: &mut BnState,
) -> Result<(Vec<Tensor2>, BnCache)> {
    let channels = state.channels();
    check_batch(batch, channels)?;
    let cols = batch.first().map_or(0, Tensor2::cols);
    let population = batch.len() * cols;
    if population < 2 {
        return Err(Error::DegenerateBatch(population));
    }

    let inv_n = 1.0 / population as f64;
    let mut mean = vec![0.0; channels];
    let mut var = vec![0.0; channels];
    for t in batch {
        for c in 0..channels {
            for &v in t.row(c) {
                mean[c] += v;
            }
        }
    }
    for m in mean.iter_mut() {
        *m *= inv_n;
    }
    for t in batch {
        for c in 0..channels {
            for &v in t.row(c) {
                let d = v - mean[c];
                var[c] += d * d;
            }
        }
    }
    for v in var.iter_mut() {
        *v *= inv_n;
    }

    let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + state.eps).sqrt()).collect();

    let mut normalized = Vec::with_capacity(batch.len());
    let mut output = Vec::with_capacity(batch.len());
    for t in batch {
        let mut norm = Tensor2::zeros(channels, t.cols());
        let mut out = Tensor2::zeros(channels, t.cols());
        for c in 0..channels {
            let x = t.row(c);
            let n = norm.row_mut(c);
            for i in 0..x.len() {
                n[i] = (x[i] - mean[c]) * inv_std[c];
            }
            let o = out.row_mut(c);
            for i in 0..x.len() {
                o[i] = state.gamma[c] * n[i] + state.beta[c];
            }
        }
        normalized.push(norm);
        output.push(out);
    }

    let m = state.momentum;
    for c in 0..channels {
        state.running_mean[c] = (1.0 - m) * state.running_mean[c] + m * mean[c];
        state.running_var[c] = (1.0 - m) * state.running_var[c] + m * var[c];
    }

    Ok((
        output,
        BnCache {
            normalized,
            inv_std,
            population,
        },
    ))
}

/// Inference-mode forward using the running statistics.
pub fn batchnorm_infer_fwd(batch: &[Tensor2], state: &BnState) -> Result<Vec<Tensor2>> {
    let channels = state.channels();
    check_batch(batch, channels)?;
    let inv_std: Vec<f64> = state
        .running_var
        .iter()
        .map(|&v| 1.0 / (v + state.eps).sqrt())
        .collect();
    let mut output = Vec::with_capacity(batch.len());
    for t in batch {
        let mut out = Tensor2::zeros(channels, t.cols());
        for c in 0..channels {
            let x = t.row(c);
            let o = out.row_mut(c);
            for i in 0..x.len() {
                o[i] = state.gamma[c] * (x[i] - state.running_mean[c]) * inv_std[c]
                    + state.beta[c];
            }
        }
        output.push(out);
    }
    Ok(output)
}

/// Backward pass for training-mode batch normalization.
///
/// Returns per-sample input gradients plus gamma and beta gradients.
pub fn batchnorm_bwd(
    cache: &BnCache,
    state: &BnState,
    grad_out: &[Tensor2],
) -> Result<(Vec<Tensor2>, Vec<f64>, Vec<f64>)> {
    let channels = state.channels();
    check_batch(grad_out, channels)?;
    if grad_out.len() != cache.normalized.len() {
        return Err(Error::shape(
            format!("batch of {}", cache.normalized.len()),
            format!("batch of {}", grad_out.len()),
        ));
    }

    let inv_n = 1.0 / cache.population as f64;
    let mut grad_gamma = vec![0.0; channels];
    let mut grad_beta = vec![0.0; channels];
    // Channel sums of g and g * xhat, needed by the mean/var terms.
    let mut sum_g = vec![0.0; channels];
    let mut sum_gx = vec![0.0; channels];
    for (g, n) in grad_out.iter().zip(&cache.normalized) {
        for c in 0..channels {
            let gr = g.row(c);
            let nr = n.row(c);
            for i in 0..gr.len() {
                grad_beta[c] += gr[i];
                grad_gamma[c] += gr[i] * nr[i];
            }
        }
    }
    for c in 0..channels {
        sum_g[c] = grad_beta[c];
        sum_gx[c] = grad_gamma[c];
    }

    let mut grad_in = Vec::with_capacity(grad_out.len());
    for (g, n) in grad_out.iter().zip(&cache.normalized) {
        let mut gi = Tensor2::zeros(channels, g.cols());
        for c in 0..channels {
            let scale = state.gamma[c] * cache.inv_std[c];
            let gr = g.row(c);
            let nr = n.row(c);
            let out = gi.row_mut(c);
            for i in 0..gr.len() {
                out[i] =
                    scale * (gr[i] - inv_n * sum_g[c] - nr[i] * inv_n * sum_gx[c]);
            }
        }
        grad_in.push(gi);
    }

    Ok((grad_in, grad_gamma, grad_beta))
}
