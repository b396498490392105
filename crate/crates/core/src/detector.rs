//! Scoring: turn a trained model and a labeled series into per-point
//! anomaly scores.
//!
//! The anomaly score at a covered index is the absolute difference
//! between the model's one-step prediction and the observation. When the
//! model was trained on differenced data, scores are computed in the
//! differenced domain and assigned to original indices following the same
//! alignment the pipeline uses for labels (differenced position `t`
//! belongs to original position `t + 1`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{expand_batch, ModelParams};
use crate::pipeline::{apply_zscore, first_difference, make_windows, Series};

/// Inference chunk size; bounds the memory of expanded feature batches.
const SCORE_CHUNK: usize = 2048;

/// Normalization context fitted on training data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preprocess {
    /// Mean/std applied to the raw series.
    pub mean: f64,
    pub std: f64,
    /// Mean/std of the differenced series when differencing is enabled.
    pub diff: Option<(f64, f64)>,
}

impl Preprocess {
    pub fn identity() -> Self {
        Preprocess {
            mean: 0.0,
            std: 1.0,
            diff: None,
        }
    }
}

/// Per-point nonnegative anomaly scores aligned to a labeled series.
/// Indices before `covered_from` carry score 0 and are excluded from
/// metric computation.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTrace {
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
    pub covered_from: usize,
}

impl ScoreTrace {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn covered_scores(&self) -> &[f64] {
        &self.scores[self.covered_from..]
    }

    pub fn covered_labels(&self) -> &[u8] {
        &self.labels[self.covered_from..]
    }

    /// Restricts the trace to `[from, len)`, keeping absolute alignment.
    pub fn tail(&self, from: usize) -> ScoreTrace {
        let from = from.min(self.len());
        let covered = self.covered_from.max(from) - from;
        ScoreTrace {
            scores: self.scores[from..].to_vec(),
            labels: self.labels[from..].to_vec(),
            covered_from: covered,
        }
    }

    /// CSV with columns `index,score,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,score,label\n");
        for i in 0..self.len() {
            out.push_str(&format!("{i},{},{}\n", self.scores[i], self.labels[i]));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Binary predictions: 1 where a covered score reaches `tau`.
pub fn threshold(trace: &ScoreTrace, tau: f64) -> Vec<u8> {
    trace
        .scores
        .iter()
        .enumerate()
        .map(|(i, &s)| u8::from(i >= trace.covered_from && s >= tau))
        .collect()
}

fn predictions_for(params: &ModelParams, series: &Series) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let t_len = params.config.feature.window_len;
    let windows = make_windows(series, t_len)?;
    let mut predictions = Vec::with_capacity(windows.len());
    let mut start = 0;
    while start < windows.len() {
        let end = (start + SCORE_CHUNK).min(windows.len());
        let chunk = windows.slice(start..end);
        let features = expand_batch(&params.config.feature, &chunk.inputs)?;
        predictions.extend(params.forward_infer(&features)?);
        start = end;
    }
    Ok((predictions, windows.targets, t_len))
}

/// Scores a raw labeled series with a trained model.
///
/// The series is normalized (and differenced, when the preprocess says
/// so) exactly as during training; scores land on original indices.
pub fn score_series(
    params: &ModelParams,
    series: &Series,
    prep: &Preprocess,
) -> Result<ScoreTrace> {
    let normalized = Series {
        values: apply_zscore(&series.values, prep.mean, prep.std),
        labels: series.labels.clone(),
        name: series.name.clone(),
    };

    let mut scores = vec![0.0; series.len()];
    let covered_from;
    match prep.diff {
        Some((diff_mean, diff_std)) => {
            let diffed = first_difference(&normalized)?;
            let model_domain = Series {
                values: apply_zscore(&diffed.values, diff_mean, diff_std),
                labels: diffed.labels,
                name: diffed.name,
            };
            let (predictions, targets, t_len) = predictions_for(params, &model_domain)?;
            // Differenced position t maps to original position t + 1.
            for (w, (pred, target)) in predictions.iter().zip(&targets).enumerate() {
                scores[t_len + w + 1] = (pred - target).abs();
            }
            covered_from = t_len + 1;
        }
        None => {
            let (predictions, targets, t_len) = predictions_for(params, &normalized)?;
            for (w, (pred, target)) in predictions.iter().zip(&targets).enumerate() {
                scores[t_len + w] = (pred - target).abs();
            }
            covered_from = t_len;
        }
    }

    Ok(ScoreTrace {
        scores,
        labels: series.labels.clone(),
        covered_from,
    })
}
