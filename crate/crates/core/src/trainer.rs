//! Mini-batch training with validation-based early stopping.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{expand_batch, ModelConfig, ModelParams};
use crate::ndcore::{adam_step, mse_loss, AdamState, Tensor2};
use crate::pipeline::WindowSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 1024,
            lr: 0.01,
            max_epochs: 100,
            patience: 10,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.lr <= 0.0 {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if self.patience < 1 {
            return Err(Error::InvalidConfig("patience must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned (minimum validation loss).
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn best_val_loss(&self) -> f64 {
        self.epochs[self.best_epoch - 1].val_loss
    }

    /// CSV with columns `epoch,train_loss,val_loss`. Wall times stay
    /// in memory so emitted artifacts are reproducible byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
        }
        out
    }
}

/// Batch index ranges over `n` windows. A trailing batch of one window
/// is merged into the previous batch so batch statistics always pool at
/// least two samples.
fn batch_ranges(n: usize, batch_size: usize) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + batch_size).min(n);
        ranges.push((start, end));
        start = end;
    }
    if ranges.len() > 1 {
        if let Some(&(last_start, last_end)) = ranges.last() {
            if last_end - last_start == 1 {
                ranges.pop();
                ranges.last_mut().unwrap().1 = last_end;
            }
        }
    }
    ranges
}

fn infer_loss(params: &ModelParams, features: &[Tensor2], targets: &[f64]) -> Result<f64> {
    const CHUNK: usize = 4096;
    let mut predictions = Vec::with_capacity(targets.len());
    let mut start = 0;
    while start < features.len() {
        let end = (start + CHUNK).min(features.len());
        predictions.extend(params.forward_infer(&features[start..end])?);
        start = end;
    }
    Ok(mse_loss(&predictions, targets)?.0)
}

/// Trains a fresh model on the given windows, returning the parameters
/// from the best validation epoch together with the loss history.
pub fn train(
    model_config: &ModelConfig,
    train_cfg: &TrainConfig,
    train_windows: &WindowSet,
    val_windows: &WindowSet,
) -> Result<(ModelParams, TrainHistory)> {
    train_cfg.validate()?;
    if train_windows.is_empty() {
        return Err(Error::EmptyInput("training windows"));
    }
    if val_windows.is_empty() {
        return Err(Error::EmptyInput("validation windows"));
    }

    let train_features = expand_batch(&model_config.feature, &train_windows.inputs)?;
    let val_features = expand_batch(&model_config.feature, &val_windows.inputs)?;

    let mut params = ModelParams::init(model_config)?;
    let mut adam = AdamState::new(&params.flat());
    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed);

    let n = train_windows.len();
    let mut order: Vec<usize> = (0..n).collect();
    let ranges = batch_ranges(n, train_cfg.batch_size);

    let mut history = Vec::with_capacity(train_cfg.max_epochs);
    let mut best: Option<(ModelParams, usize, f64)> = None;
    let mut stale_epochs = 0usize;

    for epoch in 1..=train_cfg.max_epochs {
        let started = Instant::now();
        if train_cfg.shuffle {
            order.shuffle(&mut rng);
        }

        let mut loss_sum = 0.0;
        for &(start, end) in &ranges {
            let batch: Vec<Tensor2> = order[start..end]
                .iter()
                .map(|&i| train_features[i].clone())
                .collect();
            let targets: Vec<f64> = order[start..end]
                .iter()
                .map(|&i| train_windows.targets[i])
                .collect();

            let (predictions, cache) = params.forward_train(&batch)?;
            let (loss, grad_pred) = mse_loss(&predictions, &targets)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss(epoch));
            }
            loss_sum += loss * (end - start) as f64;

            let grads = params.backward(&cache, &grad_pred)?;
            adam_step(&mut params.flat_mut(), &grads.flat(), &mut adam, train_cfg.lr)?;
        }
        let train_loss = loss_sum / n as f64;

        let val_loss = infer_loss(&params, &val_features, &val_windows.targets)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss(epoch));
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            wall_time: started.elapsed(),
        });

        let improved = best.as_ref().is_none_or(|(_, _, b)| val_loss < *b);
        if improved {
            best = Some((params.clone(), epoch, val_loss));
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= train_cfg.patience {
                break;
            }
        }
    }

    let (best_params, best_epoch, _) = best.expect("at least one epoch ran");
    Ok((
        best_params,
        TrainHistory {
            epochs: history,
            best_epoch,
        },
    ))
}

/// Mean and standard deviation of a metric across runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Aggregate of named metrics over repeated runs with different seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiRunSummary {
    /// `(metric name, aggregate)` in a stable order.
    pub metrics: Vec<(String, MeanStd)>,
    pub seeds: Vec<u64>,
}

impl MultiRunSummary {
    pub fn get(&self, name: &str) -> Option<MeanStd> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| *m)
    }
}

/// Runs `run_one` once per seed and aggregates every metric it reports.
/// Each run returns `(name, value)` pairs; all runs must report the same
/// names in the same order.
pub fn multi_run(
    seeds: &[u64],
    mut run_one: impl FnMut(u64) -> Result<Vec<(String, f64)>>,
) -> Result<MultiRunSummary> {
    if seeds.is_empty() {
        return Err(Error::EmptyInput("seed list"));
    }
    let mut per_metric: Vec<(String, Vec<f64>)> = Vec::new();
    for &seed in seeds {
        let report = run_one(seed)?;
        if per_metric.is_empty() {
            per_metric = report
                .into_iter()
                .map(|(name, value)| (name, vec![value]))
                .collect();
        } else {
            if report.len() != per_metric.len() {
                return Err(Error::LengthMismatch {
                    expected: per_metric.len(),
                    got: report.len(),
                });
            }
            for ((name, values), (got_name, value)) in per_metric.iter_mut().zip(report) {
                if *name != got_name {
                    return Err(Error::InvalidConfig(format!(
                        "runs reported mismatched metrics: {name} vs {got_name}"
                    )));
                }
                values.push(value);
            }
        }
    }
    Ok(MultiRunSummary {
        metrics: per_metric
            .into_iter()
            .map(|(name, values)| (name, MeanStd::from_samples(&values)))
            .collect(),
        seeds: seeds.to_vec(),
    })
}
