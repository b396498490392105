//! End-to-end wiring: preprocess a labeled series, train a model on its
//! training region, score it, and evaluate the test region.
//!
//! Normalization statistics (for both the raw and the differenced
//! domain) are fitted on the training region only and applied everywhere,
//! so later regions never leak into preprocessing. Splits are contiguous
//! in time and windows are assigned to a region by their target index.

use crate::basis::FeatureConfig;
use crate::detector::{score_series, Preprocess, ScoreTrace};
use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::model::{ModelConfig, ModelParams};
use crate::pipeline::{
    apply_zscore, first_difference, make_windows, stats, Series, SplitSpec, WindowSet,
};
use crate::trainer::{self, MultiRunSummary, TrainConfig, TrainHistory};

/// Everything a reproducible run needs besides the data and the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSettings {
    pub feature: FeatureConfig,
    pub n_blocks: usize,
    pub train: TrainConfig,
    pub split: SplitSpec,
    /// First-difference the series (and renormalize) before modeling.
    pub difference: bool,
    /// Detection deadline for the delay-F1 metric.
    pub delay_k: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            feature: FeatureConfig::new(2, 96),
            n_blocks: 1,
            train: TrainConfig::default(),
            split: SplitSpec {
                train_frac: 0.4,
                val_frac: 0.1,
                test_frac: 0.5,
            },
            difference: true,
            delay_k: 5,
        }
    }
}

impl ExperimentSettings {
    pub fn validate(&self) -> Result<()> {
        self.feature.validate()?;
        self.train.validate()?;
        self.split.validate()?;
        if self.n_blocks < 1 {
            return Err(Error::InvalidConfig("n_blocks must be >= 1".into()));
        }
        if self.delay_k < 1 {
            return Err(Error::InvalidConfig("delay_k must be >= 1".into()));
        }
        Ok(())
    }

    pub fn model_config(&self, seed: u64) -> ModelConfig {
        ModelConfig {
            feature: self.feature.clone(),
            n_blocks: self.n_blocks,
            seed,
        }
    }
}

/// Preprocessed windows and the context to reproduce the preprocessing.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub train_windows: WindowSet,
    pub val_windows: WindowSet,
    pub prep: Preprocess,
    /// Original-index start of the test region.
    pub test_start: usize,
}

/// Fits normalization on the training region, optionally differences,
/// and builds windows for the train and validation regions.
pub fn prepare(series: &Series, settings: &ExperimentSettings) -> Result<Prepared> {
    settings.validate()?;
    let (train_end, val_end) = settings.split.boundaries(series.len())?;
    let (mean, std) = stats(&series.values[..train_end]);
    let normalized = Series {
        values: apply_zscore(&series.values, mean, std),
        labels: series.labels.clone(),
        name: series.name.clone(),
    };

    // The model-domain series plus a map from model index to original
    // target index: differencing shifts everything forward by one.
    let (model_series, prep, index_offset) = if settings.difference {
        let diffed = first_difference(&normalized)?;
        // Differenced position t targets original position t+1: training
        // region ends at differenced position train_end - 1.
        let diff_train_len = train_end.saturating_sub(1).max(1);
        let (diff_mean, diff_std) = stats(&diffed.values[..diff_train_len]);
        let rescaled = Series {
            values: apply_zscore(&diffed.values, diff_mean, diff_std),
            labels: diffed.labels,
            name: diffed.name,
        };
        (
            rescaled,
            Preprocess {
                mean,
                std,
                diff: Some((diff_mean, diff_std)),
            },
            1,
        )
    } else {
        (
            normalized,
            Preprocess {
                mean,
                std,
                diff: None,
            },
            0,
        )
    };

    let windows = make_windows(&model_series, settings.feature.window_len)?;
    // Window w targets original index origin_index[w] + offset.
    let first_val = windows
        .origin_index
        .iter()
        .position(|&o| o + index_offset >= train_end)
        .unwrap_or(windows.len());
    let first_test = windows
        .origin_index
        .iter()
        .position(|&o| o + index_offset >= val_end)
        .unwrap_or(windows.len());

    let train_windows = windows.slice(0..first_val);
    let val_windows = windows.slice(first_val..first_test);
    if train_windows.is_empty() {
        return Err(Error::SeriesTooShort {
            needed: settings.feature.window_len + 2,
            got: train_end,
        });
    }
    if val_windows.is_empty() {
        return Err(Error::BadSplit(
            "validation region contains no windows".into(),
        ));
    }

    Ok(Prepared {
        train_windows,
        val_windows,
        prep,
        test_start: val_end,
    })
}

/// A trained model with its preprocessing context and history.
#[derive(Clone, Debug)]
pub struct TrainedRun {
    pub params: ModelParams,
    pub history: TrainHistory,
    pub prep: Preprocess,
    pub test_start: usize,
}

/// Prepares the series and trains one model with the given seed (used
/// for both initialization and batch shuffling).
pub fn train_once(
    series: &Series,
    settings: &ExperimentSettings,
    seed: u64,
) -> Result<TrainedRun> {
    let prepared = prepare(series, settings)?;
    let model_config = settings.model_config(seed);
    let train_cfg = TrainConfig {
        seed,
        ..settings.train
    };
    let (params, history) = trainer::train(
        &model_config,
        &train_cfg,
        &prepared.train_windows,
        &prepared.val_windows,
    )?;
    Ok(TrainedRun {
        params,
        history,
        prep: prepared.prep,
        test_start: prepared.test_start,
    })
}

/// Scores the full series and evaluates the test region.
pub fn evaluate(
    params: &ModelParams,
    series: &Series,
    prep: &Preprocess,
    test_start: usize,
    delay_k: usize,
) -> Result<(ScoreTrace, EvalReport)> {
    let trace = score_series(params, series, prep)?;
    let report = EvalReport::compute(&trace.tail(test_start), delay_k)?;
    Ok((trace, report))
}

/// One complete train-and-evaluate run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub run: TrainedRun,
    pub trace: ScoreTrace,
    pub report: EvalReport,
}

pub fn run_once(
    series: &Series,
    settings: &ExperimentSettings,
    seed: u64,
) -> Result<RunOutcome> {
    let run = train_once(series, settings, seed)?;
    let (trace, report) = evaluate(
        &run.params,
        series,
        &run.prep,
        run.test_start,
        settings.delay_k,
    )?;
    Ok(RunOutcome { run, trace, report })
}

/// Repeats [`run_once`] across seeds and aggregates the four headline
/// metrics as mean and standard deviation.
pub fn multi_run(
    series: &Series,
    settings: &ExperimentSettings,
    seeds: &[u64],
) -> Result<MultiRunSummary> {
    trainer::multi_run(seeds, |seed| {
        let outcome = run_once(series, settings, seed)?;
        let r = &outcome.report;
        Ok(vec![
            ("best_f1".into(), r.best_f1.f1),
            ("event_f1".into(), r.event_f1.f1),
            ("delay_f1".into(), r.delay_f1.f1),
            ("auprc".into(), r.auprc),
        ])
    })
}
