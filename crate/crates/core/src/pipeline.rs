//! Data ingestion and preparation: CSV loading with repair, normalization,
//! first-order differencing, sliding windows, contiguous splits, synthetic
//! series generation, and channel-independent reshaping for multivariate
//! inputs.

use std::ops::Range;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

/// A univariate series with binary anomaly labels (all zero when the
/// source had none).
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
    pub name: String,
}

impl Series {
    pub fn new(values: Vec<f64>, labels: Option<Vec<u8>>, name: impl Into<String>) -> Result<Self> {
        let labels = labels.unwrap_or_else(|| vec![0; values.len()]);
        if labels.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: labels.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Series {
            values,
            labels,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series over `range`.
    pub fn slice(&self, range: Range<usize>) -> Series {
        Series {
            values: self.values[range.clone()].to_vec(),
            labels: self.labels[range].to_vec(),
            name: self.name.clone(),
        }
    }
}

/// Loads a series from a headed CSV file.
///
/// Empty or NaN entries in the value column are repaired by linear
/// interpolation (edges copy the nearest valid sample). Labels, when a
/// column is named, must be 0 or 1; otherwise all labels default to 0.
pub fn load_csv(path: &Path, value_column: &str, label_column: Option<&str>) -> Result<Series> {
    let display = path.display().to_string();
    let io_err = |source| Error::Io {
        path: display.clone(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(io),
            other => Error::Parse {
                path: display.clone(),
                line: 0,
                msg: format!("{other:?}"),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: display.clone(),
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let value_idx = headers
        .iter()
        .position(|h| h == value_column)
        .ok_or_else(|| Error::Parse {
            path: display.clone(),
            line: 1,
            msg: format!("missing column `{value_column}`"),
        })?;
    let label_idx = match label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Parse {
                path: display.clone(),
                line: 1,
                msg: format!("missing column `{name}`"),
            }
        })?),
        None => None,
    };

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            line,
            msg: e.to_string(),
        })?;
        let raw = record.get(value_idx).unwrap_or("").trim();
        let value = if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
            f64::NAN
        } else {
            raw.parse::<f64>().map_err(|_| Error::Parse {
                path: display.clone(),
                line,
                msg: format!("non-numeric value `{raw}`"),
            })?
        };
        values.push(value);

        if let Some(idx) = label_idx {
            let raw = record.get(idx).unwrap_or("").trim();
            let label = match raw {
                "0" | "0.0" => 0,
                "1" | "1.0" => 1,
                other => {
                    return Err(Error::BadLabel {
                        path: display.clone(),
                        line,
                        value: other.to_string(),
                    })
                }
            };
            labels.push(label);
        } else {
            labels.push(0);
        }
    }

    interpolate_missing(&mut values).map_err(|_| Error::Parse {
        path: display.clone(),
        line: 0,
        msg: "value column has no usable samples".into(),
    })?;

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    Series::new(values, Some(labels), name)
}

/// Writes `index,value,label` rows mirroring the ingestion format.
pub fn save_csv(series: &Series, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io {
            path: display.clone(),
            source: io,
        },
        other => Error::Parse {
            path: display.clone(),
            line: 0,
            msg: format!("{other:?}"),
        },
    })?;
    writer
        .write_record(["value", "label"])
        .and_then(|_| {
            for (v, l) in series.values.iter().zip(&series.labels) {
                writer.write_record([format!("{v}"), format!("{l}")])?;
            }
            writer.flush()?;
            Ok(())
        })
        .map_err(|e| Error::Parse {
            path: display,
            line: 0,
            msg: e.to_string(),
        })
}

fn interpolate_missing(values: &mut [f64]) -> Result<()> {
    if values.iter().all(|v| v.is_nan()) {
        return Err(Error::EmptyInput("value column"));
    }
    let n = values.len();
    let mut i = 0;
    while i < n {
        if !values[i].is_nan() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && values[i].is_nan() {
            i += 1;
        }
        let before = start.checked_sub(1).map(|j| values[j]);
        let after = if i < n { Some(values[i]) } else { None };
        match (before, after) {
            (Some(a), Some(b)) => {
                let gap = (i - start + 1) as f64;
                for (k, v) in values[start..i].iter_mut().enumerate() {
                    *v = a + (b - a) * (k + 1) as f64 / gap;
                }
            }
            (Some(a), None) => values[start..i].iter_mut().for_each(|v| *v = a),
            (None, Some(b)) => values[start..i].iter_mut().for_each(|v| *v = b),
            (None, None) => unreachable!("all-NaN handled above"),
        }
    }
    Ok(())
}

/// Mean and population standard deviation of a slice.
pub fn stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Standardize with the given statistics; a zero std maps everything to 0.
pub fn apply_zscore(values: &[f64], mean: f64, std: f64) -> Vec<f64> {
    if std <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / std).collect()
}

pub fn undo_zscore(values: &[f64], mean: f64, std: f64) -> Vec<f64> {
    values.iter().map(|v| v * std + mean).collect()
}

/// Standardize a series by its own statistics.
pub fn zscore(series: &Series) -> Result<(Series, f64, f64)> {
    if series.is_empty() {
        return Err(Error::EmptyInput("series"));
    }
    let (mean, std) = stats(&series.values);
    let values = apply_zscore(&series.values, mean, std);
    Ok((
        Series {
            values,
            labels: series.labels.clone(),
            name: series.name.clone(),
        },
        mean,
        std,
    ))
}

/// First-order differencing: `out[t] = in[t+1] - in[t]`.
///
/// The label at differenced position `t` is the label of `in[t+1]`, so a
/// disturbance is labeled at the first differenced point it perturbs.
pub fn first_difference(series: &Series) -> Result<Series> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let values = series.values.windows(2).map(|w| w[1] - w[0]).collect();
    let labels = series.labels[1..].to_vec();
    Ok(Series {
        values,
        labels,
        name: series.name.clone(),
    })
}

/// Differencing followed by re-standardization of the differenced values.
pub fn difference_zscored(series: &Series) -> Result<(Series, f64, f64)> {
    let diffed = first_difference(series)?;
    zscore(&diffed)
}

/// Sliding windows plus aligned next-point targets.
#[derive(Clone, Debug)]
pub struct WindowSet {
    /// One row per window, `num_windows x T`.
    pub inputs: Tensor2,
    pub targets: Vec<f64>,
    pub target_labels: Vec<u8>,
    /// Series index of each window's target.
    pub origin_index: Vec<usize>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn window(&self, i: usize) -> &[f64] {
        self.inputs.row(i)
    }

    /// Subset by window index range.
    pub fn slice(&self, range: Range<usize>) -> WindowSet {
        let t_len = self.inputs.cols();
        let mut data = Vec::with_capacity(range.len() * t_len);
        for i in range.clone() {
            data.extend_from_slice(self.inputs.row(i));
        }
        WindowSet {
            inputs: Tensor2::from_vec(range.len(), t_len, data).expect("subset shape"),
            targets: self.targets[range.clone()].to_vec(),
            target_labels: self.target_labels[range.clone()].to_vec(),
            origin_index: self.origin_index[range].to_vec(),
        }
    }
}

/// Builds one window per target index in `[T, len)`; window `w` covers
/// `[w, w+T)` and predicts the point at `w+T`.
pub fn make_windows(series: &Series, window_len: usize) -> Result<WindowSet> {
    if series.len() <= window_len {
        return Err(Error::SeriesTooShort {
            needed: window_len + 1,
            got: series.len(),
        });
    }
    let n = series.len() - window_len;
    let mut data = Vec::with_capacity(n * window_len);
    let mut targets = Vec::with_capacity(n);
    let mut target_labels = Vec::with_capacity(n);
    let mut origin_index = Vec::with_capacity(n);
    for origin in window_len..series.len() {
        data.extend_from_slice(&series.values[origin - window_len..origin]);
        targets.push(series.values[origin]);
        target_labels.push(series.labels[origin]);
        origin_index.push(origin);
    }
    Ok(WindowSet {
        inputs: Tensor2::from_vec(n, window_len, data)?,
        targets,
        target_labels,
        origin_index,
    })
}

/// Contiguous train/validation/test fractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64) -> Result<Self> {
        let spec = SplitSpec {
            train_frac,
            val_frac,
            test_frac,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|f| *f < 0.0) {
            return Err(Error::BadSplit("fractions must be nonnegative".into()));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadSplit(format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Boundary indices `(train_end, val_end)` for a series of length `n`.
    pub fn boundaries(&self, n: usize) -> Result<(usize, usize)> {
        self.validate()?;
        let train_end = (n as f64 * self.train_frac).round() as usize;
        let val_end = (n as f64 * (self.train_frac + self.val_frac)).round() as usize;
        let lens = [train_end, val_end - train_end, n - val_end];
        for (len, frac) in lens.iter().zip([self.train_frac, self.val_frac, self.test_frac]) {
            if *len == 0 && frac > 0.0 {
                return Err(Error::BadSplit(format!(
                    "series of length {n} leaves an empty partition for fraction {frac}"
                )));
            }
        }
        Ok((train_end, val_end))
    }
}

/// Order-preserving contiguous partition of a series.
pub fn split(series: &Series, spec: &SplitSpec) -> Result<(Series, Series, Series)> {
    let (train_end, val_end) = spec.boundaries(series.len())?;
    Ok((
        series.slice(0..train_end),
        series.slice(train_end..val_end),
        series.slice(val_end..series.len()),
    ))
}

/// Recipe for a synthetic labeled series: a noisy sinusoid with short
/// additive peak/drop events.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub length: usize,
    pub base_period: usize,
    pub noise_std: f64,
    pub anomaly_ratio: f64,
    pub peak_magnitude: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.base_period < 4 {
            return Err(Error::InvalidConfig(format!(
                "base_period must be at least 4, got {}",
                self.base_period
            )));
        }
        if self.length < 10 * self.base_period {
            return Err(Error::InvalidConfig(format!(
                "length must be at least 10 * base_period ({}), got {}",
                10 * self.base_period,
                self.length
            )));
        }
        if !(0.0..1.0).contains(&self.anomaly_ratio) {
            return Err(Error::InvalidConfig(format!(
                "anomaly_ratio must be in [0, 1), got {}",
                self.anomaly_ratio
            )));
        }
        Ok(())
    }
}

/// Noisy sinusoid without anomalies.
pub fn synthesize_base(spec: &SynthSpec) -> Result<Series> {
    spec.validate()?;
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let noise = if spec.noise_std > 0.0 {
        Some(Normal::new(0.0, spec.noise_std).map_err(|e| {
            Error::InvalidConfig(format!("noise_std {}: {e}", spec.noise_std))
        })?)
    } else {
        None
    };
    let omega = 2.0 * std::f64::consts::PI / spec.base_period as f64;
    let values = (0..spec.length)
        .map(|t| {
            let base = (omega * t as f64).sin();
            base + noise.map_or(0.0, |n| n.sample(&mut rng))
        })
        .collect();
    Series::new(values, None, format!("synth-{}", spec.seed))
}

/// Injects non-overlapping 1-3 point additive events of `+/-magnitude`
/// into `range`, labeling exactly `round(ratio * range_len)` points.
/// Returns the number of labeled points.
pub fn inject_anomalies(
    series: &mut Series,
    range: Range<usize>,
    ratio: f64,
    magnitude: f64,
    seed: u64,
) -> Result<usize> {
    inject_anomalies_with_len(series, range, ratio, magnitude, 3, seed)
}

/// [`inject_anomalies`] with an explicit maximum event length;
/// `max_event_len = 1` injects single-point spikes only.
pub fn inject_anomalies_with_len(
    series: &mut Series,
    range: Range<usize>,
    ratio: f64,
    magnitude: f64,
    max_event_len: usize,
    seed: u64,
) -> Result<usize> {
    if max_event_len < 1 {
        return Err(Error::InvalidConfig("max_event_len must be >= 1".into()));
    }
    if range.end > series.len() || range.start >= range.end {
        return Err(Error::BadSplit(format!(
            "injection range {range:?} outside series of length {}",
            series.len()
        )));
    }
    let span = range.len();
    let budget = (ratio * span as f64).round() as usize;
    if budget == 0 {
        return Ok(0);
    }
    // Events need a clean point on each side to stay separate segments.
    if budget * 2 >= span {
        return Err(Error::InfeasibleRatio {
            ratio,
            length: span,
        });
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let mut occupied = vec![false; series.len()];
    let mut remaining = budget;
    let mut attempts = 0usize;
    let max_attempts = 1000 * budget.max(1);
    while remaining > 0 {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InfeasibleRatio {
                ratio,
                length: span,
            });
        }
        let event_len = rng.random_range(1..=max_event_len).min(remaining);
        if range.start + event_len > range.end {
            continue;
        }
        let start = rng.random_range(range.start..=range.end - event_len);
        let guard_lo = start.saturating_sub(1);
        let guard_hi = (start + event_len + 1).min(series.len());
        if occupied[guard_lo..guard_hi].iter().any(|&o| o) {
            continue;
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        for i in start..start + event_len {
            series.values[i] += sign * magnitude;
            series.labels[i] = 1;
            occupied[i] = true;
        }
        remaining -= event_len;
    }
    Ok(budget)
}

/// Full synthetic series: noisy sinusoid with anomalies injected across
/// the whole length at `anomaly_ratio`.
pub fn synthesize(spec: &SynthSpec) -> Result<Series> {
    let mut series = synthesize_base(spec)?;
    if spec.anomaly_ratio > 0.0 {
        // Separate stream from the base noise so the clean samples are
        // identical for any ratio under the same seed.
        inject_anomalies(
            &mut series,
            0..spec.length,
            spec.anomaly_ratio,
            spec.peak_magnitude,
            spec.seed ^ 0x9e37_79b9_7f4a_7c15,
        )?;
    }
    Ok(series)
}

/// A `(batch, window_len, n_features)` block in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Cube {
    pub batch: usize,
    pub window_len: usize,
    pub n_features: usize,
    data: Vec<f64>,
}

impl Cube {
    pub fn from_vec(batch: usize, window_len: usize, n_features: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != batch * window_len * n_features {
            return Err(Error::shape(
                format!("{batch}x{window_len}x{n_features}"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Cube {
            batch,
            window_len,
            n_features,
            data,
        })
    }

    #[inline]
    pub fn get(&self, b: usize, t: usize, f: usize) -> f64 {
        self.data[(b * self.window_len + t) * self.n_features + f]
    }
}

/// Reshapes `(batch, T, features)` into `(batch * features) x T`, rows
/// ordered sample-major then feature. Each feature channel becomes an
/// independent univariate instance.
pub fn channels_to_instances(cube: &Cube) -> Tensor2 {
    let rows = cube.batch * cube.n_features;
    let mut out = Tensor2::zeros(rows, cube.window_len);
    for b in 0..cube.batch {
        for f in 0..cube.n_features {
            let row = out.row_mut(b * cube.n_features + f);
            for (t, slot) in row.iter_mut().enumerate() {
                *slot = cube.get(b, t, f);
            }
        }
    }
    out
}

/// Inverse of [`channels_to_instances`].
pub fn instances_to_channels(instances: &Tensor2, n_features: usize) -> Result<Cube> {
    if n_features == 0 || instances.rows() % n_features != 0 {
        return Err(Error::shape(
            format!("row count divisible by {n_features}"),
            format!("{} rows", instances.rows()),
        ));
    }
    let batch = instances.rows() / n_features;
    let window_len = instances.cols();
    let mut data = vec![0.0; batch * window_len * n_features];
    for b in 0..batch {
        for f in 0..n_features {
            let row = instances.row(b * n_features + f);
            for t in 0..window_len {
                data[(b * window_len + t) * n_features + f] = row[t];
            }
        }
    }
    Cube::from_vec(batch, window_len, n_features, data)
}
