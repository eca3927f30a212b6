//! In-memory datasets and the row-level operations of the evaluation
//! protocol: min-max normalization, windowing and prevalence subsampling.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::round_product;

/// An `n × d` matrix of finite feature values with stable row identifiers
/// and optional binary labels (`true` = anomalous).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    values: Vec<f64>,
    n_features: usize,
    feature_names: Vec<String>,
    labels: Option<Vec<bool>>,
    row_ids: Vec<u64>,
}

impl Dataset {
    /// Builds a dataset from row-major `values`. Checks shape, finiteness and
    /// row-id uniqueness.
    pub fn new(
        values: Vec<f64>,
        feature_names: Vec<String>,
        labels: Option<Vec<bool>>,
        row_ids: Vec<u64>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::NoFeatures);
        }
        let n = row_ids.len();
        if values.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                actual: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                feature: pos % d,
            });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: l.len(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for &id in &row_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateRowId(id));
            }
        }
        Ok(Self {
            values,
            n_features: d,
            feature_names,
            labels,
            row_ids,
        })
    }

    /// Convenience constructor: ids `0..n`, features named `x0, x1, …`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::new(values, names, None, (0..rows.len() as u64).collect())
    }

    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features)
    }

    /// Row-major backing storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    /// Number of rows labeled anomalous (0 when unlabeled).
    pub fn n_anomalous(&self) -> usize {
        self.labels
            .as_ref()
            .map_or(0, |l| l.iter().filter(|&&x| x).count())
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features;
        let mut values = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            values,
            n_features: d,
            feature_names: self.feature_names.clone(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    /// Rows in a seeded uniformly random order.
    pub fn shuffled(&self, seed: u64) -> Dataset {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.select(&order)
    }
}

/// Per-feature minimum and maximum, fitted on one dataset and applicable to
/// others (e.g. a future test observation).
#[derive(Debug, Clone, PartialEq)]
pub struct MinMax {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl MinMax {
    pub fn fit(data: &Dataset) -> Self {
        let d = data.n_features();
        let mut mins = alloc::vec![f64::INFINITY; d];
        let mut maxs = alloc::vec![f64::NEG_INFINITY; d];
        for row in data.rows() {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Self { mins, maxs }
    }

    /// `(x − min) / (max − min)` per feature; constant features map to 0.
    pub fn apply_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                actual: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| self.scale(j, v))
            .collect())
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let d = data.n_features();
        if d != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                actual: d,
            });
        }
        let values = data
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| self.scale(k % d, v))
            .collect();
        Ok(Dataset {
            values,
            ..data.clone()
        })
    }

    #[inline]
    fn scale(&self, j: usize, v: f64) -> f64 {
        let range = self.maxs[j] - self.mins[j];
        if range > 0.0 {
            (v - self.mins[j]) / range
        } else {
            0.0
        }
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }
}

/// Rescales every feature to `[0, 1]`. Constant features become all zeros.
pub fn minmax_normalize(data: &Dataset) -> Dataset {
    MinMax::fit(data)
        .apply(data)
        .expect("fitted on the same dataset")
}

/// Splits `data` into `⌊n/ws⌋` consecutive windows of exactly `ws` rows.
/// Trailing rows that do not fill a window are dropped. Returns no windows
/// when `ws > n`; callers decide whether that is an error.
pub fn slice_windows(data: &Dataset, ws: usize) -> Result<Vec<Dataset>> {
    if ws < 2 {
        return Err(Error::InvalidParameter {
            name: "ws",
            reason: format!("window size must be at least 2, got {ws}"),
        });
    }
    let count = data.len() / ws;
    Ok((0..count)
        .map(|w| {
            let idx: Vec<usize> = (w * ws..(w + 1) * ws).collect();
            data.select(&idx)
        })
        .collect())
}

/// Keeps every benign row and `round(π·B/(1−π))` anomalous rows chosen
/// uniformly at random, then shuffles the result. Both random steps use the
/// same seeded generator.
pub fn subsample_prevalence(data: &Dataset, prevalence: f64, seed: u64) -> Result<Dataset> {
    if !(prevalence > 0.0 && prevalence < 1.0) {
        return Err(Error::InvalidParameter {
            name: "prevalence",
            reason: format!("must lie in (0, 1), got {prevalence}"),
        });
    }
    let labels = data.labels().ok_or(Error::MissingLabels)?;
    let (anomalous, benign): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| labels[i]);
    let needed = round_product(prevalence / (1.0 - prevalence), benign.len());
    if needed > anomalous.len() {
        let total = anomalous.len() + benign.len();
        return Err(Error::InsufficientAnomalies {
            requested: prevalence,
            needed,
            available: anomalous.len(),
            max_prevalence: if total == 0 {
                0.0
            } else {
                anomalous.len() as f64 / total as f64
            },
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, anomalous.len(), needed);
    let mut keep = benign;
    keep.extend(picked.iter().map(|k| anomalous[k]));
    keep.shuffle(&mut rng);
    Ok(data.select(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn col(values: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    fn labeled(benign: usize, anomalous: usize) -> Dataset {
        let n = benign + anomalous;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n).map(|i| i >= benign).collect();
        Dataset::from_rows(&rows)
            .unwrap()
            .with_labels(labels)
            .unwrap()
    }

    #[test]
    fn rejects_non_finite_and_duplicate_ids() {
        let names = vec![String::from("a")];
        assert_eq!(
            Dataset::new(vec![1.0, f64::NAN], names.clone(), None, vec![0, 1]),
            Err(Error::NonFinite { row: 1, feature: 0 })
        );
        assert_eq!(
            Dataset::new(vec![1.0, 2.0], names, None, vec![5, 5]),
            Err(Error::DuplicateRowId(5))
        );
        assert_eq!(
            Dataset::new(vec![], vec![], None, vec![]),
            Err(Error::NoFeatures)
        );
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            minmax_normalize(&col(&[1.0, 3.0, 5.0])).values(),
            &[0.0, 0.5, 1.0]
        );
        assert_eq!(
            minmax_normalize(&col(&[7.0, 7.0, 7.0])).values(),
            &[0.0, 0.0, 0.0]
        );
        let unit = [0.0, 0.25, 0.3, 1.0, 0.999];
        let out = minmax_normalize(&col(&unit));
        for (a, b) in out.values().iter().zip(&unit) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn normalize_keeps_ids_and_labels() {
        let ds = labeled(3, 2);
        let out = minmax_normalize(&ds);
        assert_eq!(out.row_ids(), ds.row_ids());
        assert_eq!(out.labels(), ds.labels());
    }

    #[test]
    fn windows_floor_division() {
        let ds = labeled(990, 10);
        let w = slice_windows(&ds, 400).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|x| x.len() == 400));
        assert_eq!(w[1].row_ids()[0], 400);

        let exact = slice_windows(&labeled(399, 1), 400).unwrap();
        assert_eq!(exact.len(), 1);
        assert!(slice_windows(&labeled(10, 1), 400).unwrap().is_empty());
        assert!(slice_windows(&ds, 1).is_err());
    }

    #[test]
    fn window_labels_follow_rows() {
        let ds = labeled(950, 50).shuffled(3);
        let w = slice_windows(&ds, 300).unwrap();
        let kept = ds.select(&(0..900).collect::<Vec<_>>());
        let sum: usize = w.iter().map(Dataset::n_anomalous).sum();
        assert_eq!(sum, kept.n_anomalous());
    }

    #[test]
    fn prevalence_examples() {
        let ds = labeled(996, 50);
        let out = subsample_prevalence(&ds, 0.004, 42).unwrap();
        assert_eq!(out.n_anomalous(), 4);
        assert_eq!(out.len(), 1000);
        let again = subsample_prevalence(&ds, 0.004, 42).unwrap();
        assert_eq!(out.row_ids(), again.row_ids());
        let other = subsample_prevalence(&ds, 0.004, 43).unwrap();
        assert_ne!(out.row_ids(), other.row_ids());

        match subsample_prevalence(&labeled(100, 5), 0.5, 1) {
            Err(Error::InsufficientAnomalies {
                available,
                max_prevalence,
                ..
            }) => {
                assert_eq!(available, 5);
                assert!((max_prevalence - 5.0 / 105.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            subsample_prevalence(&col(&[1.0, 2.0]), 0.1, 0),
            Err(Error::MissingLabels)
        );
        assert!(subsample_prevalence(&ds, 1.0, 0).is_err());
    }
}
