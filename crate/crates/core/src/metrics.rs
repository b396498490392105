//! Segment-aware evaluation of anomaly score traces.
//!
//! Three adjustment strategies are supported when sweeping thresholds:
//!
//! * **point adjust** — a labeled segment with at least one predicted
//!   point is counted as fully predicted;
//! * **event wise** — every labeled segment collapses to a single event,
//!   and each maximal run of false positives outside segments counts as
//!   one false-positive event;
//! * **k-delay** — like point adjust, but a segment only counts when the
//!   first hit arrives within `k` points of the segment onset; late-only
//!   detections are discarded entirely.
//!
//! `best_f1` and `auprc` sweep every distinct score value. The sweep is
//! incremental (points activate in descending score order), which keeps
//! evaluation of long traces linear after the sort.

use crate::detector::ScoreTrace;
use crate::error::{Error, Result};

/// Half-open index range `[start, end)` of consecutive positive labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

/// Threshold-sweep adjustment strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjustStrategy {
    PointAdjust,
    EventWise,
    /// Detection must occur within `k` points of the segment onset
    /// (delay `i - start <= k`).
    KDelay(usize),
}

/// Best threshold of one metric with its operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricResult {
    pub f1: f64,
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// The full evaluation bundle for one score trace.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub best_f1: MetricResult,
    pub event_f1: MetricResult,
    pub delay_f1: MetricResult,
    pub delay_k: usize,
    pub auprc: f64,
}

/// Maximal runs of 1-labels, sorted and disjoint.
pub fn extract_segments(labels: &[u8]) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut start = None;
    for (i, &l) in labels.iter().enumerate() {
        match (l, start) {
            (1, None) => start = Some(i),
            (0, Some(s)) => {
                segments.push(Segment { start: s, end: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        segments.push(Segment {
            start: s,
            end: labels.len(),
        });
    }
    segments
}

fn check_same_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Fills every labeled segment that contains at least one predicted
/// point; predictions outside segments are untouched.
pub fn point_adjust(preds: &[u8], labels: &[u8]) -> Result<Vec<u8>> {
    check_same_len(preds.len(), labels.len())?;
    let mut adjusted = preds.to_vec();
    for seg in extract_segments(labels) {
        if preds[seg.start..seg.end].iter().any(|&p| p == 1) {
            adjusted[seg.start..seg.end].fill(1);
        }
    }
    Ok(adjusted)
}

/// Point adjustment with a detection deadline: a segment is kept (and
/// filled) only if some predicted point lies at delay `<= k` from its
/// start; otherwise all its predictions are cleared.
pub fn k_delay_adjust(preds: &[u8], labels: &[u8], k: usize) -> Result<Vec<u8>> {
    check_same_len(preds.len(), labels.len())?;
    if k < 1 {
        return Err(Error::InvalidConfig(
            "delay threshold k must be >= 1".into(),
        ));
    }
    let mut adjusted = preds.to_vec();
    for seg in extract_segments(labels) {
        let deadline = (seg.start + k + 1).min(seg.end);
        let detected = preds[seg.start..deadline].iter().any(|&p| p == 1);
        adjusted[seg.start..seg.end].fill(u8::from(detected));
    }
    Ok(adjusted)
}

/// Collapses the trace to event level: one entry per labeled segment
/// (predicted iff any point inside was predicted) and one false-positive
/// event per maximal predicted run outside all segments. Returns
/// `(event_preds, event_labels)`; true negatives are not represented.
pub fn event_collapse(preds: &[u8], labels: &[u8]) -> Result<(Vec<u8>, Vec<u8>)> {
    check_same_len(preds.len(), labels.len())?;
    let mut event_preds = Vec::new();
    let mut event_labels = Vec::new();
    for seg in extract_segments(labels) {
        let hit = preds[seg.start..seg.end].iter().any(|&p| p == 1);
        event_preds.push(u8::from(hit));
        event_labels.push(1);
    }
    let mut in_run = false;
    for i in 0..preds.len() {
        let outside_pred = labels[i] == 0 && preds[i] == 1;
        if outside_pred && !in_run {
            event_preds.push(1);
            event_labels.push(0);
        }
        in_run = outside_pred;
    }
    Ok((event_preds, event_labels))
}

/// Precision/recall/F1 from confusion counts, with empty denominators
/// mapping to zero.
pub fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// One operating point of a threshold sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

struct SweepState<'a> {
    labels: &'a [u8],
    strategy: AdjustStrategy,
    segments: Vec<Segment>,
    /// Segment index per position, `usize::MAX` outside.
    seg_of: Vec<usize>,
    detected: Vec<bool>,
    active_outside: Vec<bool>,
    total_pos: usize,
    tp_points: usize,
    fp_points: usize,
    tp_events: usize,
    fp_events: usize,
}

impl<'a> SweepState<'a> {
    fn new(labels: &'a [u8], strategy: AdjustStrategy) -> Self {
        let segments = extract_segments(labels);
        let mut seg_of = vec![usize::MAX; labels.len()];
        for (k, seg) in segments.iter().enumerate() {
            seg_of[seg.start..seg.end].fill(k);
        }
        let total_pos = segments.iter().map(Segment::len).sum();
        SweepState {
            labels,
            strategy,
            detected: vec![false; segments.len()],
            active_outside: vec![false; labels.len()],
            segments,
            seg_of,
            total_pos,
            tp_points: 0,
            fp_points: 0,
            tp_events: 0,
            fp_events: 0,
        }
    }

    fn activate(&mut self, idx: usize) {
        let seg_idx = self.seg_of[idx];
        if seg_idx != usize::MAX {
            if self.detected[seg_idx] {
                return;
            }
            let seg = self.segments[seg_idx];
            let triggers = match self.strategy {
                AdjustStrategy::KDelay(k) => idx - seg.start <= k,
                _ => true,
            };
            if triggers {
                self.detected[seg_idx] = true;
                self.tp_points += seg.len();
                self.tp_events += 1;
            }
        } else {
            self.fp_points += 1;
            self.active_outside[idx] = true;
            let left = idx > 0 && self.labels[idx - 1] == 0 && self.active_outside[idx - 1];
            let right = idx + 1 < self.labels.len()
                && self.labels[idx + 1] == 0
                && self.active_outside[idx + 1];
            // Joining zero, one, or two existing runs.
            match (left, right) {
                (false, false) => self.fp_events += 1,
                (true, true) => self.fp_events -= 1,
                _ => {}
            }
        }
    }

    fn operating_point(&self, threshold: f64) -> SweepPoint {
        let (tp, fp, fn_) = match self.strategy {
            AdjustStrategy::EventWise => (
                self.tp_events,
                self.fp_events,
                self.segments.len() - self.tp_events,
            ),
            _ => (
                self.tp_points,
                self.fp_points,
                self.total_pos - self.tp_points,
            ),
        };
        let (precision, recall, f1) = prf(tp, fp, fn_);
        SweepPoint {
            threshold,
            precision,
            recall,
            f1,
        }
    }
}

/// Operating points at every distinct score value, in descending
/// threshold order.
pub fn sweep(scores: &[f64], labels: &[u8], strategy: AdjustStrategy) -> Result<Vec<SweepPoint>> {
    check_same_len(scores.len(), labels.len())?;
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if labels.iter().all(|&l| l == 0) {
        return Err(Error::NoPositiveLabels);
    }
    if let AdjustStrategy::KDelay(k) = strategy {
        if k < 1 {
            return Err(Error::InvalidConfig(
                "delay threshold k must be >= 1".into(),
            ));
        }
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });

    let mut state = SweepState::new(labels, strategy);
    let mut points = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            state.activate(order[i]);
            i += 1;
        }
        points.push(state.operating_point(threshold));
    }
    Ok(points)
}

/// Maximum-F1 operating point; ties resolve to the largest threshold.
pub fn best_f1(scores: &[f64], labels: &[u8], strategy: AdjustStrategy) -> Result<MetricResult> {
    let points = sweep(scores, labels, strategy)?;
    let mut best = MetricResult {
        f1: 0.0,
        threshold: f64::INFINITY,
        precision: 0.0,
        recall: 0.0,
    };
    for p in points {
        if p.f1 > best.f1 {
            best = MetricResult {
                f1: p.f1,
                threshold: p.threshold,
                precision: p.precision,
                recall: p.recall,
            };
        }
    }
    Ok(best)
}

/// Area under the precision-recall curve by the right-continuous step
/// rule over recall, with the strategy's adjustment applied per
/// threshold.
pub fn auprc(scores: &[f64], labels: &[u8], strategy: AdjustStrategy) -> Result<f64> {
    let points = sweep(scores, labels, strategy)?;
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for p in &points {
        area += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    Ok(area)
}

impl EvalReport {
    /// Evaluates the covered portion of a score trace: best F1 under
    /// point adjustment, event-wise F1, k-delay F1, and AUPRC (under
    /// point adjustment, consistent with best F1).
    pub fn compute(trace: &ScoreTrace, delay_k: usize) -> Result<Self> {
        let scores = trace.covered_scores();
        let labels = trace.covered_labels();
        Ok(EvalReport {
            best_f1: best_f1(scores, labels, AdjustStrategy::PointAdjust)?,
            event_f1: best_f1(scores, labels, AdjustStrategy::EventWise)?,
            delay_f1: best_f1(scores, labels, AdjustStrategy::KDelay(delay_k))?,
            delay_k,
            auprc: auprc(scores, labels, AdjustStrategy::PointAdjust)?,
        })
    }

    /// Metric names paired with their value and, where one exists, the
    /// best operating point.
    pub fn rows(&self) -> Vec<(String, f64, Option<MetricResult>)> {
        vec![
            ("best_f1".into(), self.best_f1.f1, Some(self.best_f1)),
            ("event_f1".into(), self.event_f1.f1, Some(self.event_f1)),
            (
                format!("delay_f1_k{}", self.delay_k),
                self.delay_f1.f1,
                Some(self.delay_f1),
            ),
            ("auprc".into(), self.auprc, None),
        ]
    }

    /// One `key: value` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, value, detail) in self.rows() {
            out.push_str(&format!("{name}: {value}\n"));
            if let Some(d) = detail {
                out.push_str(&format!("{name}_threshold: {}\n", d.threshold));
                out.push_str(&format!("{name}_precision: {}\n", d.precision));
                out.push_str(&format!("{name}_recall: {}\n", d.recall));
            }
        }
        out
    }

    /// CSV with a header row: `metric,value,threshold,precision,recall`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value,threshold,precision,recall\n");
        for (name, value, detail) in self.rows() {
            match detail {
                Some(d) => out.push_str(&format!(
                    "{name},{value},{},{},{}\n",
                    d.threshold, d.precision, d.recall
                )),
                None => out.push_str(&format!("{name},{value},,,\n")),
            }
        }
        out
    }
}
