//! Shared helpers for the integration suites: finite-difference
//! gradient checking, brute-force metric oracles, and a small
//! least-squares solver. Everything here is an independent check path
//! and never calls back into the implementation it verifies, except to
//! evaluate forward passes as black-box loss functions.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsad_core::basis::FeatureConfig;
use tsad_core::metrics::AdjustStrategy;
use tsad_core::model::{expand_batch, ModelConfig, ModelParams};
use tsad_core::ndcore::{mse_loss, Tensor2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn rand_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor2 {
    Tensor2::from_vec(rows, cols, rand_vec(rng, rows * cols, -2.0, 2.0)).unwrap()
}

/// Relative error with an absolute floor for near-zero gradients.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

/// Central finite differences of a scalar function over a flat slice.
pub fn central_diff(mut f: impl FnMut(&[f64]) -> f64, point: &[f64], h: f64) -> Vec<f64> {
    let mut perturbed = point.to_vec();
    let mut grads = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        perturbed[i] = point[i] + h;
        let plus = f(&perturbed);
        perturbed[i] = point[i] - h;
        let minus = f(&perturbed);
        perturbed[i] = point[i];
        grads.push((plus - minus) / (2.0 * h));
    }
    grads
}

/// Training-mode loss of a parameter vector laid out in the canonical
/// flat order. Clones the model so batch-norm running statistics never
/// leak between evaluations.
fn loss_at(
    base: &ModelParams,
    flat_values: &[f64],
    features: &[Tensor2],
    targets: &[f64],
) -> f64 {
    let mut params = base.clone();
    let mut offset = 0;
    for tensor in params.flat_mut() {
        tensor.copy_from_slice(&flat_values[offset..offset + tensor.len()]);
        offset += tensor.len();
    }
    let (preds, _) = params.forward_train(features).unwrap();
    mse_loss(&preds, targets).unwrap().0
}

/// Full-model gradient check on one configuration: analytic backward
/// against central finite differences (h = 1e-4) through the whole
/// training-mode forward. Returns the worst relative error.
pub fn full_model_gradcheck(config: &ModelConfig, batch: usize, data_seed: u64) -> f64 {
    let mut data_rng = rng(data_seed);
    let t_len = config.feature.window_len;
    let windows = rand_tensor(&mut data_rng, batch, t_len);
    let targets = rand_vec(&mut data_rng, batch, -1.5, 1.5);
    let features = expand_batch(&config.feature, &windows).unwrap();

    let params = ModelParams::init(config).unwrap();
    let mut forward_params = params.clone();
    let (preds, cache) = forward_params.forward_train(&features).unwrap();
    let (_, grad_pred) = mse_loss(&preds, &targets).unwrap();
    let grads = forward_params.backward(&cache, &grad_pred).unwrap();
    let analytic: Vec<f64> = grads.flat().concat();

    let flat: Vec<f64> = params.flat().concat();
    let numeric = central_diff(
        |values| loss_at(&params, values, &features, &targets),
        &flat,
        1e-4,
    );

    analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| rel_err(a, n))
        .fold(0.0, f64::max)
}

/// Random tiny model configurations for gradient sweeps.
pub fn random_tiny_config(rng: &mut ChaCha8Rng) -> ModelConfig {
    let n_terms = rng.random_range(1..=2usize);
    let window_len = rng.random_range(4..=16usize);
    let mut feature = FeatureConfig::new(n_terms, window_len);
    // Random feature subset, keeping at least one group.
    loop {
        feature.include_raw = rng.random_bool(0.7);
        feature.include_value = rng.random_bool(0.7);
        feature.include_position = rng.random_bool(0.7);
        if feature.include_raw || feature.include_value || feature.include_position {
            break;
        }
    }
    ModelConfig {
        feature,
        n_blocks: rng.random_range(1..=2usize),
        seed: rng.random(),
    }
}

// ---------------------------------------------------------------------
// Brute-force metric oracle. Everything below recomputes adjustments and
// confusion counts from first principles, one threshold at a time.
// ---------------------------------------------------------------------

fn naive_segments(labels: &[u8]) -> Vec<(usize, usize)> {
    let mut segs = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        if labels[i] == 1 {
            let start = i;
            while i < labels.len() && labels[i] == 1 {
                i += 1;
            }
            segs.push((start, i));
        } else {
            i += 1;
        }
    }
    segs
}

fn naive_adjusted_counts(
    preds: &[u8],
    labels: &[u8],
    strategy: AdjustStrategy,
) -> (usize, usize, usize) {
    let segs = naive_segments(labels);
    match strategy {
        AdjustStrategy::EventWise => {
            let mut tp = 0;
            let mut fn_ = 0;
            for &(s, e) in &segs {
                if preds[s..e].contains(&1) {
                    tp += 1;
                } else {
                    fn_ += 1;
                }
            }
            let mut fp = 0;
            let mut prev_outside_pred = false;
            for i in 0..preds.len() {
                let outside_pred = labels[i] == 0 && preds[i] == 1;
                if outside_pred && !prev_outside_pred {
                    fp += 1;
                }
                prev_outside_pred = outside_pred;
            }
            (tp, fp, fn_)
        }
        AdjustStrategy::PointAdjust | AdjustStrategy::KDelay(_) => {
            let mut adjusted = preds.to_vec();
            for &(s, e) in &segs {
                let detected = match strategy {
                    AdjustStrategy::PointAdjust => preds[s..e].contains(&1),
                    AdjustStrategy::KDelay(k) => {
                        (s..e).any(|i| preds[i] == 1 && i - s <= k)
                    }
                    AdjustStrategy::EventWise => unreachable!(),
                };
                for p in &mut adjusted[s..e] {
                    *p = u8::from(detected);
                }
            }
            let mut tp = 0;
            let mut fp = 0;
            let mut fn_ = 0;
            for i in 0..adjusted.len() {
                match (adjusted[i], labels[i]) {
                    (1, 1) => tp += 1,
                    (1, 0) => fp += 1,
                    (0, 1) => fn_ += 1,
                    _ => {}
                }
            }
            (tp, fp, fn_)
        }
    }
}

fn naive_prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

/// Distinct thresholds in descending order.
fn descending_thresholds(scores: &[f64]) -> Vec<f64> {
    let mut thresholds = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    thresholds
}

/// Brute-force best F1: literally materialize predictions per threshold.
/// Ties resolve to the largest threshold.
pub fn oracle_best_f1(
    scores: &[f64],
    labels: &[u8],
    strategy: AdjustStrategy,
) -> (f64, f64, f64, f64) {
    let mut best = (0.0f64, f64::INFINITY, 0.0, 0.0);
    for tau in descending_thresholds(scores) {
        let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= tau)).collect();
        let (tp, fp, fn_) = naive_adjusted_counts(&preds, labels, strategy);
        let (p, r, f1) = naive_prf(tp, fp, fn_);
        if f1 > best.0 {
            best = (f1, tau, p, r);
        }
    }
    best
}

/// Brute-force AUPRC: step rule over recall at each distinct threshold.
pub fn oracle_auprc(scores: &[f64], labels: &[u8], strategy: AdjustStrategy) -> f64 {
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for tau in descending_thresholds(scores) {
        let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= tau)).collect();
        let (tp, fp, fn_) = naive_adjusted_counts(&preds, labels, strategy);
        let (p, r, _) = naive_prf(tp, fp, fn_);
        area += (r - prev_recall) * p;
        prev_recall = r;
    }
    area
}

/// Point-wise F1 without any adjustment, for dominance checks.
pub fn raw_f1(preds: &[u8], labels: &[u8]) -> f64 {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (&p, &l) in preds.iter().zip(labels) {
        match (p, l) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    naive_prf(tp, fp, fn_).2
}

// ---------------------------------------------------------------------
// Dense least squares by normal equations, for closed-form oracles.
// ---------------------------------------------------------------------

/// Solves `min ||X b - y||` where `X` is `n x m` row-major. Gaussian
/// elimination with partial pivoting on the normal equations; fine for
/// the small, well-conditioned systems the oracles build.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = x[0].len();
    assert_eq!(n, y.len());
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for (row, &target) in x.iter().zip(y) {
        for i in 0..m {
            aty[i] += row[i] * target;
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Tiny ridge keeps degenerate designs solvable.
    for (i, row) in ata.iter_mut().enumerate() {
        row[i] += 1e-12;
    }

    let mut a = ata;
    let mut b = aty;
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for i in col + 1..m {
            let factor = a[i][col] / diag;
            for j in col..m {
                a[i][j] -= factor * a[col][j];
            }
            b[i] -= factor * b[col];
        }
    }
    let mut solution = vec![0.0; m];
    for col in (0..m).rev() {
        let mut acc = b[col];
        for j in col + 1..m {
            acc -= a[col][j] * solution[j];
        }
        solution[col] = acc / a[col][col];
    }
    solution
}

/// Mean squared residual of a least-squares fit.
pub fn least_squares_mse(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let beta = least_squares(x, y);
    let mut sum = 0.0;
    for (row, &target) in x.iter().zip(y) {
        let fitted: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
        sum += (fitted - target).powi(2);
    }
    sum / y.len() as f64
}
