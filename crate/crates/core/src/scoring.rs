//! Anomaly scores from the horizontal structure of the family.
//!
//! Each `β`-level cuts the family at `n` intercepts. An observation whose
//! intercept sits apart from the others at some level is anomalous. Two
//! per-level scores are provided, both in `[0, 1]`:
//!
//! * **gaps**: the `k`-th smallest `|v_j − v_i|` over `j ≠ i`, with
//!   `k = max(1, ⌈r·n⌉)`;
//! * **hist**: intercepts are binned into `b = max(1, round(f·n))` bins of
//!   width `(max − min)/b`, the grid shifted so `v_i` sits at the center of
//!   its bin; the score is the total count of bins strictly more populated
//!   than `v_i`'s bin, over `n`.
//!
//! An observation's final score is the maximum over all levels.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::family::{InterceptMatrix, NcdfFamily};
use crate::math::{abs, ceil_product, floor, round_product, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    /// Fraction of gaps.
    #[default]
    Gaps,
    /// Histogram.
    Hist,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gaps => "gaps",
            Method::Hist => "hist",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaps" | "fraction-of-gaps" => Ok(Method::Gaps),
            "hist" | "histogram" => Ok(Method::Hist),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("unknown scoring method `{other}` (expected gaps or hist)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoringConfig {
    pub method: Method,
    /// Number of `β`-levels `l`; level `j` is `β_j = j/l`.
    pub levels: usize,
    /// Gap fraction `r` in `(0, 1)`.
    pub r: f64,
    /// Bins per observation, `b/n`, in `(0, 1]`.
    pub bin_fraction: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            method: Method::Gaps,
            levels: 100,
            r: 0.01,
            bin_fraction: 0.05,
        }
    }
}

impl ScoringConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidParameter {
                name: "levels",
                reason: "need at least one level".to_string(),
            });
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("gap fraction must lie in (0, 1), got {}", self.r),
            });
        }
        if !(self.bin_fraction > 0.0 && self.bin_fraction <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "bin_fraction",
                reason: format!("must lie in (0, 1], got {}", self.bin_fraction),
            });
        }
        Ok(())
    }

    /// `k = max(1, ⌈r·n⌉)`, capped at the `n − 1` available gaps.
    pub fn gap_rank(&self, n: usize) -> usize {
        gap_rank(self.r, n)
    }

    /// `b = max(1, round(f·n))`.
    pub fn bin_count(&self, n: usize) -> usize {
        bin_count(self.bin_fraction, n)
    }
}

fn gap_rank(r: f64, n: usize) -> usize {
    ceil_product(r, n).max(1).min(n.saturating_sub(1).max(1))
}

fn bin_count(fraction: f64, n: usize) -> usize {
    round_product(fraction, n).max(1)
}

/// Bin of `v` on the grid of width `width` anchored so that `anchor` is the
/// center of bin `anchor_bin`; out-of-range values clamp to the end bins.
#[inline]
fn bin_index(v: f64, anchor: f64, anchor_bin: usize, width: f64, bins: usize) -> usize {
    let offset = floor((v - anchor) / width + 0.5);
    let idx = anchor_bin as f64 + offset;
    if idx <= 0.0 {
        0
    } else if idx >= (bins - 1) as f64 {
        bins - 1
    } else {
        idx as usize
    }
}

/// Bin that `anchor` falls into on the plain grid starting at `min`.
#[inline]
fn anchor_bin(anchor: f64, min: f64, width: f64, bins: usize) -> usize {
    let raw = floor((anchor - min) / width);
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(bins - 1)
    }
}

/// Fraction-of-gaps score of observation `i` at one level.
pub fn gaps_score_at_level(intercepts: &[f64], i: usize, r: f64) -> f64 {
    let n = intercepts.len();
    if n < 2 {
        return 0.0;
    }
    let vi = intercepts[i];
    let mut gaps: Vec<f64> = intercepts
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| abs(v - vi))
        .collect();
    let k = gap_rank(r, n);
    let (_, kth, _) = gaps.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// Histogram score of observation `i` at one level.
pub fn hist_score_at_level(intercepts: &[f64], i: usize, bin_fraction: f64) -> f64 {
    let n = intercepts.len();
    if n < 2 {
        return 0.0;
    }
    let (min, max) = intercepts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(max > min) {
        return 0.0;
    }
    let bins = bin_count(bin_fraction, n);
    let width = (max - min) / bins as f64;
    let vi = intercepts[i];
    let own = anchor_bin(vi, min, width, bins);
    let mut counts = vec![0usize; bins];
    for &v in intercepts {
        counts[bin_index(v, vi, own, width, bins)] += 1;
    }
    let own_count = counts[own];
    counts.iter().filter(|&&c| c > own_count).sum::<usize>() as f64 / n as f64
}

/// Per-observation scores and the level that produced each.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreReport {
    pub scores: Vec<f64>,
    /// Level `j` (1-based) attaining the maximum; the first one on ties.
    pub argmax_level: Vec<usize>,
    pub config: ScoringConfig,
}

impl ScoreReport {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `β` of the arg-max level of observation `i`.
    pub fn argmax_beta(&self, i: usize) -> f64 {
        self.argmax_level[i] as f64 / self.config.levels as f64
    }
}

/// Precomputed per-level sorted intercepts of a family. Scoring one
/// observation touches only this, so observations can be scored
/// independently and in any order.
#[derive(Debug, Clone)]
pub struct ScoringContext {
    config: ScoringConfig,
    intercepts: InterceptMatrix,
    sorted: Vec<f64>,
    degenerate: Vec<bool>,
    gap_rank: usize,
    bins: usize,
}

impl ScoringContext {
    pub fn new(family: &NcdfFamily, config: ScoringConfig) -> Self {
        let intercepts = InterceptMatrix::new(family, config.levels);
        let degenerate = family.curves().iter().map(|c| c.is_degenerate()).collect();
        Self::from_intercepts(intercepts, degenerate, config)
    }

    pub fn from_intercepts(
        intercepts: InterceptMatrix,
        degenerate: Vec<bool>,
        config: ScoringConfig,
    ) -> Self {
        let n = intercepts.len();
        let mut sorted = Vec::with_capacity(intercepts.levels() * n);
        for j in 1..=intercepts.levels() {
            let start = sorted.len();
            sorted.extend_from_slice(intercepts.level(j));
            sorted[start..].sort_by(f64::total_cmp);
        }
        Self {
            gap_rank: config.gap_rank(n),
            bins: config.bin_count(n),
            config,
            intercepts,
            sorted,
            degenerate,
        }
    }

    pub fn config(&self) -> &ScoringConfig {
        &self.config
    }

    pub fn intercepts(&self) -> &InterceptMatrix {
        &self.intercepts
    }

    pub fn len(&self) -> usize {
        self.intercepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intercepts.is_empty()
    }

    fn sorted_level(&self, j: usize) -> &[f64] {
        let n = self.len();
        &self.sorted[(j - 1) * n..j * n]
    }

    /// Score of observation `i` at level `j`.
    pub fn level_score(&self, i: usize, j: usize) -> f64 {
        let v = self.intercepts.level(j)[i];
        let sorted = self.sorted_level(j);
        match self.config.method {
            Method::Gaps => {
                let at = sorted.partition_point(|&x| x < v);
                kth_gap(sorted, v, at, Some(at), self.gap_rank)
            }
            Method::Hist => hist_sorted(sorted, v, self.bins, None),
        }
    }

    /// Final score and arg-max level of observation `i`. Degenerate rows
    /// score 0 at level 1.
    pub fn score(&self, i: usize) -> (f64, usize) {
        if self.degenerate[i] {
            return (0.0, 1);
        }
        self.max_over_levels(|j| self.level_score(i, j))
    }

    /// Scores a point outside the reference set from its own intercepts
    /// (one per level). The nearest reference intercept stands in for the
    /// excluded self gap, and the histogram counts reference intercepts
    /// only, so a duplicate of reference row `r` scores exactly as row `r`.
    pub fn score_external(&self, intercepts: &[f64]) -> (f64, usize) {
        self.max_over_levels(|j| {
            let v = intercepts[j - 1];
            let sorted = self.sorted_level(j);
            match self.config.method {
                Method::Gaps => {
                    let at = sorted.partition_point(|&x| x < v);
                    let rank = (self.gap_rank + 1).min(sorted.len());
                    kth_gap(sorted, v, at, None, rank)
                }
                Method::Hist => hist_sorted(sorted, v, self.bins, Some(v)),
            }
        })
    }

    fn max_over_levels(&self, level_score: impl Fn(usize) -> f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 1);
        for j in 1..=self.intercepts.levels() {
            let s = level_score(j);
            if s > best.0 {
                best = (s, j);
            }
        }
        best
    }

    /// Scores every observation in order.
    pub fn score_all(&self) -> ScoreReport {
        let (scores, argmax_level) = (0..self.len()).map(|i| self.score(i)).unzip();
        ScoreReport {
            scores,
            argmax_level,
            config: self.config,
        }
    }
}

/// `rank`-th smallest `|sorted[j] − v|`, walking outward from `at`; the
/// element at `skip` (a copy of `v` itself) is excluded.
fn kth_gap(sorted: &[f64], v: f64, at: usize, skip: Option<usize>, rank: usize) -> f64 {
    let mut left = at;
    let mut right = at;
    if skip == Some(at) {
        right += 1;
    }
    let mut last = 0.0;
    for _ in 0..rank {
        let lgap = (left > 0).then(|| v - sorted[left - 1]);
        let rgap = (right < sorted.len()).then(|| sorted[right] - v);
        last = match (lgap, rgap) {
            (Some(l), Some(r)) if l <= r => {
                left -= 1;
                l
            }
            (Some(l), None) => {
                left -= 1;
                l
            }
            (_, Some(r)) => {
                right += 1;
                r
            }
            (None, None) => break,
        };
    }
    last
}

/// Histogram score of intercept `v` against the sorted level. `extra`
/// widens the range with a value that is not itself counted.
fn hist_sorted(sorted: &[f64], v: f64, bins: usize, extra: Option<f64>) -> f64 {
    let n = sorted.len();
    let (mut min, mut max) = (sorted[0], sorted[n - 1]);
    if let Some(e) = extra {
        min = min.min(e);
        max = max.max(e);
    }
    if !(max > min) {
        return 0.0;
    }
    let width = (max - min) / bins as f64;
    let own = anchor_bin(v, min, width, bins);
    // bin_index is monotone in v, so bin boundaries are partition points.
    let mut counts = vec![0usize; bins];
    let mut start = 0;
    for (m, count) in counts.iter_mut().enumerate() {
        let end = if m + 1 == bins {
            n
        } else {
            start + sorted[start..].partition_point(|&x| bin_index(x, v, own, width, bins) <= m)
        };
        *count = end - start;
        start = end;
    }
    let own_count = counts[own];
    counts.iter().filter(|&&c| c > own_count).sum::<usize>() as f64 / n as f64
}

/// Scores every curve of a family.
pub fn score_family(family: &NcdfFamily, config: &ScoringConfig) -> Result<ScoreReport> {
    config.validate()?;
    Ok(ScoringContext::new(family, *config).score_all())
}

/// Distance from each observation to its `k`-th nearest neighbor (self
/// excluded, Euclidean), min-max normalized to `[0, 1]` over the dataset.
pub fn knn_baseline_score(data: &Dataset, k: usize) -> Result<Vec<f64>> {
    let n = data.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("need 1 <= k <= n - 1 = {}, got {k}", n.saturating_sub(1)),
        });
    }
    let mut raw = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n - 1);
    for i in 0..n {
        let xi = data.row(i);
        dist.clear();
        for j in (0..n).filter(|&j| j != i) {
            let s: f64 = xi
                .iter()
                .zip(data.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist.push(s);
        }
        let (_, kth, _) = dist.select_nth_unstable_by(k - 1, f64::total_cmp);
        raw.push(sqrt(*kth));
    }
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    Ok(raw
        .into_iter()
        .map(|v| if range > 0.0 { (v - lo) / range } else { 0.0 })
        .collect())
}
