//! The JSON file read by the browser front end: the family, its scores and
//! the features behind it, for one dataset or window.
//!
//! Top-level keys are fixed: `meta`, `features {names, raw, normalized}`,
//! `curves [{id, xs}]`, `scores`, `argmax_beta` and, for labeled data,
//! `labels`. Row `k` of every array describes the same observation.

use std::path::Path;

use ncdf_core::{Dataset, NcdfFamily, NormParam, ScoreReport, ScoringConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_N: usize = 5000;
/// Longest `xs` array written per curve.
pub const MAX_CURVE_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizExport {
    pub meta: ExportMeta,
    pub features: ExportFeatures,
    pub curves: Vec<ExportCurve>,
    pub scores: Vec<f64>,
    pub argmax_beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMeta {
    pub n: usize,
    pub d: usize,
    pub p: NormParam,
    pub method: ncdf_core::Method,
    pub levels: usize,
    pub r: f64,
    pub bin_fraction: f64,
    pub dataset: String,
    pub seed: Option<u64>,
    /// 0-based step indices kept in every `xs` when curves were
    /// downsampled: `xs[m]` is the radius where the curve reaches
    /// `(curve_indices[m] + 1) / n`. `None` means `xs` is complete.
    pub curve_indices: Option<Vec<usize>>,
    pub degenerate_rows: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportFeatures {
    pub names: Vec<String>,
    pub raw: Vec<Vec<f64>>,
    pub normalized: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportCurve {
    pub id: u64,
    pub xs: Vec<f64>,
}

/// Evenly spread step indices `0 = i_0 < … < i_{m-1} = n − 1` with
/// `m ≤ max_points`, or `None` when all `n` steps fit. Consecutive kept
/// indices are less than `n / (max_points − 1) + 1` apart, so any run of
/// tied radii longer than that keeps at least one step.
pub fn downsample_indices(n: usize, max_points: usize) -> Option<Vec<usize>> {
    if n <= max_points || max_points < 2 {
        return None;
    }
    let last = (n - 1) as u128;
    let slots = (max_points - 1) as u128;
    let mut idx: Vec<usize> = (0..=slots)
        .map(|k| ((k * last + slots / 2) / slots) as usize)
        .collect();
    idx.dedup();
    Some(idx)
}

#[derive(Debug, Clone)]
pub struct ExportInput<'a> {
    pub dataset: String,
    pub seed: Option<u64>,
    pub raw: &'a Dataset,
    pub normalized: &'a Dataset,
    pub family: &'a NcdfFamily,
    pub report: &'a ScoreReport,
    pub max_n: usize,
}

pub fn build_export(input: ExportInput<'_>) -> Result<VizExport> {
    let n = input.family.len();
    if n > input.max_n {
        return Err(Error::ExportTooLarge {
            n,
            max_n: input.max_n,
        });
    }
    let indices = downsample_indices(n, MAX_CURVE_POINTS);
    let curves = input
        .family
        .curves()
        .iter()
        .map(|c| ExportCurve {
            id: c.owner_id(),
            xs: match &indices {
                Some(idx) => idx.iter().map(|&k| c.xs()[k]).collect(),
                None => c.xs().to_vec(),
            },
        })
        .collect();
    let config: ScoringConfig = input.report.config;
    let rows = |d: &Dataset| d.rows().map(<[f64]>::to_vec).collect();
    Ok(VizExport {
        meta: ExportMeta {
            n,
            d: input.family.n_features(),
            p: input.family.norm(),
            method: config.method,
            levels: config.levels,
            r: config.r,
            bin_fraction: config.bin_fraction,
            dataset: input.dataset,
            seed: input.seed,
            curve_indices: indices,
            degenerate_rows: input.family.degenerate_rows(),
        },
        features: ExportFeatures {
            names: input.raw.feature_names().to_vec(),
            raw: rows(input.raw),
            normalized: rows(input.normalized),
        },
        curves,
        scores: input.report.scores.clone(),
        argmax_beta: (0..n).map(|i| input.report.argmax_beta(i)).collect(),
        labels: input.raw.labels().map(<[bool]>::to_vec),
    })
}

impl VizExport {
    pub fn ids(&self) -> Vec<u64> {
        self.curves.iter().map(|c| c.id).collect()
    }

    /// Ids with `score > threshold`, in row order.
    pub fn flagged(&self, threshold: f64) -> Vec<u64> {
        self.curves
            .iter()
            .zip(&self.scores)
            .filter(|(_, &s)| s > threshold)
            .map(|(c, _)| c.id)
            .collect()
    }

    /// Structural checks a consumer relies on.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.meta.n;
        let lengths = [
            ("curves", self.curves.len()),
            ("scores", self.scores.len()),
            ("argmax_beta", self.argmax_beta.len()),
            ("features.raw", self.features.raw.len()),
            ("features.normalized", self.features.normalized.len()),
        ];
        for (name, len) in lengths {
            if len != n {
                return Err(format!("{name} has {len} entries, expected {n}"));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(format!("labels has {} entries, expected {n}", labels.len()));
            }
        }
        let points = self.meta.curve_indices.as_ref().map_or(n, Vec::len);
        if points > MAX_CURVE_POINTS {
            return Err(format!(
                "curves carry {points} points, limit is {MAX_CURVE_POINTS}"
            ));
        }
        for c in &self.curves {
            if c.xs.len() != points {
                return Err(format!(
                    "curve {} has {} points, expected {points}",
                    c.id,
                    c.xs.len()
                ));
            }
            if c.xs.windows(2).any(|w| w[0] > w[1]) {
                return Err(format!("curve {} is not nondecreasing", c.id));
            }
        }
        if self.scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err("scores outside [0, 1]".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(crate::csv_io::io_error(path))?;
        Self::from_json(&text)
    }
}
