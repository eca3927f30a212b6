//! Threshold-free evaluation of anomaly scores against labels, and the
//! windowed protocol: shuffle, fix the anomaly prevalence, cut equal
//! windows, score each window as an independent unsupervised unit, and
//! average the per-window AUCs.

use alloc::format;
use alloc::vec::Vec;

use crate::dataset::{minmax_normalize, slice_windows, subsample_prevalence, Dataset};
use crate::error::{Error, Result};
use crate::family::build_family;
use crate::geometry::NormParam;
use crate::scoring::{knn_baseline_score, score_family, ScoringConfig};

/// One ROC operating point: predict anomalous iff `score > threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocPoint {
    /// `-inf` for the final `(1, 1)` point.
    pub threshold: f64,
    pub fpf: f64,
    pub tpf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    Ok(())
}

/// AUC as the normalized Mann-Whitney statistic: the probability that a
/// random anomalous score exceeds a random normal one, ties counting ½.
/// Computed from mid-rank sums in `O(n log n)`; doubled ranks keep every
/// intermediate an exact integer.
pub fn mann_whitney_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1..=end share the mid-rank (start + 1 + end) / 2
        let twice_mid = (start + 1 + end) as u128;
        let tied_pos = order[start..end].iter().filter(|&&k| labels[k]).count() as u128;
        twice_rank_sum += twice_mid * tied_pos;
        start = end;
    }
    let pos = pos as u128;
    let twice_u = twice_rank_sum - pos * (pos + 1);
    Ok(twice_u as f64 / (2 * pos * neg as u128) as f64)
}

/// Operating points for every distinct score used as threshold (descending),
/// starting at `(0, 0)` and ending with `(1, 1)`.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut start = 0;
    while start < order.len() {
        let threshold = scores[order[start]];
        // everything strictly above `threshold` has been counted
        points.push(RocPoint {
            threshold,
            fpf: fp as f64 / neg as f64,
            tpf: tp as f64 / pos as f64,
        });
        while start < order.len() && scores[order[start]] == threshold {
            if labels[order[start]] {
                tp += 1;
            } else {
                fp += 1;
            }
            start += 1;
        }
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpf: 1.0,
        tpf: 1.0,
    });
    Ok(points)
}

/// Trapezoidal area under a ROC point sequence.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpf - w[0].fpf) * (w[0].tpf + w[1].tpf) / 2.0)
        .sum()
}

/// Confusion counts for the rule `score > threshold`.
pub fn confusion_at_threshold(scores: &[f64], labels: &[bool], threshold: f64) -> Confusion {
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// The scorer applied to each window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Detector {
    Ncdf {
        p: NormParam,
        scoring: ScoringConfig,
    },
    /// Distance to the `k`-th nearest neighbor.
    Knn { k: usize },
}

impl Default for Detector {
    fn default() -> Self {
        Detector::Ncdf {
            p: NormParam::default(),
            scoring: ScoringConfig::default(),
        }
    }
}

impl Detector {
    /// Scores one window (raw features; normalized here, per window).
    pub fn score_window(&self, window: &Dataset) -> Result<Vec<f64>> {
        let normalized = minmax_normalize(window);
        match self {
            Detector::Ncdf { p, scoring } => {
                let family = build_family(&normalized, *p)?;
                Ok(score_family(&family, scoring)?.scores)
            }
            Detector::Knn { k } => knn_baseline_score(&normalized, *k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalConfig {
    /// Window size.
    pub ws: usize,
    /// Target anomaly prevalence `π`.
    pub prevalence: f64,
    pub seed: u64,
    pub detector: Detector,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowResult {
    pub index: usize,
    pub anomalous: usize,
    pub normal: usize,
    /// `None` when the window holds a single class.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkippedWindow {
    pub index: usize,
    pub reason: alloc::string::String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub config: EvalConfig,
    /// Rows after prevalence subsampling.
    pub rows: usize,
    /// Trailing rows that did not fill a window.
    pub dropped_rows: usize,
    pub windows: Vec<WindowResult>,
    /// AUCs of the evaluated (two-class) windows, in window order.
    pub per_window_auc: Vec<f64>,
    pub mean_auc: f64,
    pub skipped_windows: Vec<SkippedWindow>,
    /// ROC of all evaluated windows' scores pooled together.
    pub roc: Vec<RocPoint>,
    pub pooled_auc: f64,
}

/// Windows prepared for evaluation: shuffled, prevalence-adjusted and cut.
#[derive(Debug, Clone)]
pub struct PreparedWindows {
    pub rows: usize,
    pub dropped_rows: usize,
    pub windows: Vec<Dataset>,
}

/// Shuffle → prevalence subsampling → windowing.
pub fn prepare_windows(data: &Dataset, config: &EvalConfig) -> Result<PreparedWindows> {
    if data.labels().is_none() {
        return Err(Error::MissingLabels);
    }
    if config.ws < 2 {
        return Err(Error::InvalidParameter {
            name: "ws",
            reason: format!("window size must be at least 2, got {}", config.ws),
        });
    }
    if let Detector::Knn { k } = config.detector {
        if k == 0 || k >= config.ws {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("need 1 <= k < ws = {}, got {k}", config.ws),
            });
        }
    }
    let shuffled = data.shuffled(config.seed);
    let stream = subsample_prevalence(&shuffled, config.prevalence, config.seed.wrapping_add(1))?;
    if config.ws > stream.len() {
        return Err(Error::WindowTooLarge {
            ws: config.ws,
            n: stream.len(),
        });
    }
    let windows = slice_windows(&stream, config.ws)?;
    Ok(PreparedWindows {
        rows: stream.len(),
        dropped_rows: stream.len() - windows.len() * config.ws,
        windows,
    })
}

/// Outcome of one window: its scores (empty when skipped) and result row.
#[derive(Debug, Clone)]
pub struct WindowOutcome {
    pub result: WindowResult,
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

pub fn evaluate_window(
    index: usize,
    window: &Dataset,
    detector: &Detector,
) -> Result<WindowOutcome> {
    let labels = window.labels().ok_or(Error::MissingLabels)?.to_vec();
    let (anomalous, normal) = class_counts(&labels);
    let mut result = WindowResult {
        index,
        anomalous,
        normal,
        auc: None,
    };
    if anomalous == 0 || normal == 0 {
        return Ok(WindowOutcome {
            result,
            scores: Vec::new(),
            labels,
        });
    }
    let scores = detector.score_window(window)?;
    result.auc = Some(mann_whitney_auc(&scores, &labels)?);
    Ok(WindowOutcome {
        result,
        scores,
        labels,
    })
}

/// Combines window outcomes (in window order) into a report.
pub fn assemble_report(
    config: EvalConfig,
    prepared: &PreparedWindows,
    outcomes: Vec<WindowOutcome>,
) -> Result<EvalReport> {
    let mut per_window_auc = Vec::new();
    let mut skipped_windows = Vec::new();
    let mut pooled_scores = Vec::new();
    let mut pooled_labels = Vec::new();
    let mut windows = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome.result.auc {
            Some(auc) => {
                per_window_auc.push(auc);
                pooled_scores.extend_from_slice(&outcome.scores);
                pooled_labels.extend_from_slice(&outcome.labels);
            }
            None => skipped_windows.push(SkippedWindow {
                index: outcome.result.index,
                reason: if outcome.result.anomalous == 0 {
                    "no anomalous rows".into()
                } else {
                    "no normal rows".into()
                },
            }),
        }
        windows.push(outcome.result);
    }
    if per_window_auc.is_empty() {
        return Err(Error::NoEvaluableWindow {
            windows: windows.len(),
            skipped: skipped_windows.len(),
        });
    }
    let mean_auc = per_window_auc.iter().sum::<f64>() / per_window_auc.len() as f64;
    Ok(EvalReport {
        config,
        rows: prepared.rows,
        dropped_rows: prepared.dropped_rows,
        windows,
        per_window_auc,
        mean_auc,
        skipped_windows,
        roc: roc_curve(&pooled_scores, &pooled_labels)?,
        pooled_auc: mann_whitney_auc(&pooled_scores, &pooled_labels)?,
    })
}

/// Runs the full windowed protocol sequentially.
pub fn windowed_eval(data: &Dataset, config: &EvalConfig) -> Result<EvalReport> {
    let prepared = prepare_windows(data, config)?;
    let outcomes = prepared
        .windows
        .iter()
        .enumerate()
        .map(|(i, w)| evaluate_window(i, w, &config.detector))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(*config, &prepared, outcomes)
}
