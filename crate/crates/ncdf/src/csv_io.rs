//! CSV ingestion and the two CSV outputs: datasets (simulator output) and
//! per-row scores.
//!
//! Input dialect: comma separated, header row, UTF-8, `.` decimal point.
//! Header names and cells are trimmed.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ncdf_core::{Dataset, ScoreReport};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Column parsed as the binary label and removed from the features.
    pub label_column: Option<String>,
    /// Columns removed by name before parsing (addresses, timestamps...).
    pub drop_columns: Vec<String>,
}

impl LoadOptions {
    pub fn with_label(label: impl Into<String>) -> Self {
        Self {
            label_column: Some(label.into()),
            drop_columns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_dropped_invalid: usize,
    /// Dropped by name, or because no cell of the column parsed as a number.
    pub columns_dropped: Vec<String>,
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rows_read={} rows_dropped_invalid={} columns_dropped=[{}]",
            self.rows_read,
            self.rows_dropped_invalid,
            self.columns_dropped.join(",")
        )
    }
}

/// Maps a label cell to anomalous (`true`) or normal. Benign spellings are
/// `BENIGN`, `normal`, `false` and `0` (any case); every other non-empty
/// value, such as an attack name, is anomalous. Empty cells are invalid.
pub fn parse_label(cell: &str) -> Option<bool> {
    let cell = cell.trim();
    if cell.is_empty() {
        return None;
    }
    let benign = ["benign", "normal", "false", "0"]
        .iter()
        .any(|b| cell.eq_ignore_ascii_case(b));
    Some(!benign && (cell.parse::<f64>() != Ok(0.0)))
}

pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<(Dataset, IngestReport)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path, options)
}

/// [`load_csv`] over any reader; `path` only labels errors.
pub fn read_csv<R: Read>(
    reader: R,
    path: &Path,
    options: &LoadOptions,
) -> Result<(Dataset, IngestReport)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::MissingHeader {
            path: path.to_path_buf(),
        });
    }
    let records = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)?;

    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn {
                path: path.to_path_buf(),
                name: name.to_owned(),
            })
    };
    let label_idx = options.label_column.as_deref().map(find).transpose()?;
    let mut dropped_by_name = Vec::new();
    for name in &options.drop_columns {
        dropped_by_name.push(find(name)?);
    }

    let mut columns_dropped = Vec::new();
    let mut features = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if Some(c) == label_idx {
            continue;
        }
        let textual = !records.iter().any(|r| {
            r.get(c)
                .is_some_and(|cell| !cell.is_empty() && cell.parse::<f64>().is_ok())
        });
        if dropped_by_name.contains(&c) || textual {
            columns_dropped.push(name.clone());
        } else {
            features.push(c);
        }
    }
    if features.is_empty() {
        return Err(Error::NoNumericColumns {
            path: path.to_path_buf(),
        });
    }

    let mut values = Vec::with_capacity(records.len() * features.len());
    let mut labels = Vec::new();
    let mut row_ids = Vec::new();
    let mut row = Vec::with_capacity(features.len());
    for (line, record) in records.iter().enumerate() {
        row.clear();
        let parsed = features.iter().all(|&c| {
            match record.get(c).and_then(|cell| cell.parse::<f64>().ok()) {
                Some(v) if v.is_finite() => {
                    row.push(v);
                    true
                }
                _ => false,
            }
        });
        let label = match label_idx {
            Some(c) => match record.get(c).and_then(parse_label) {
                Some(l) => Some(l),
                None => continue,
            },
            None => None,
        };
        if !parsed {
            continue;
        }
        values.extend_from_slice(&row);
        labels.extend(label);
        row_ids.push(line as u64);
    }
    let kept = row_ids.len();
    if kept < 2 {
        return Err(Error::TooFewRows {
            path: path.to_path_buf(),
            kept,
        });
    }
    let names = features.iter().map(|&c| header[c].clone()).collect();
    let labels = label_idx.map(|_| labels);
    let data = Dataset::new(values, names, labels, row_ids)?;
    let report = IngestReport {
        rows_read: records.len(),
        rows_dropped_invalid: records.len() - kept,
        columns_dropped,
    };
    Ok((data, report))
}

/// 17 significant digits: enough to read back the identical `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the features, then a final `label` column of `0`/`1` when the
/// dataset is labeled.
pub fn write_dataset<W: Write>(data: &Dataset, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    if data.labels().is_some() {
        header.push("label");
    }
    w.write_record(&header)?;
    for (i, row) in data.rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        if let Some(labels) = data.labels() {
            record.push(if labels[i] { "1" } else { "0" }.to_owned());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// `row_id,score,argmax_beta`, one line per observation.
pub fn write_scores<W: Write>(
    row_ids: &[u64],
    report: &ScoreReport,
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row_id", "score", "argmax_beta"])?;
    for (i, id) in row_ids.iter().enumerate() {
        w.write_record([
            id.to_string(),
            format_f64(report.scores[i]),
            format_f64(report.argmax_beta(i)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub row_id: u64,
    pub score: f64,
    pub argmax_beta: f64,
}

pub fn read_scores<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let bad = |e: &dyn std::fmt::Display| Error::ScoresFormat(e.to_string());
    let header = rdr.headers().map_err(|e| bad(&e))?;
    if header.iter().collect::<Vec<_>>() != ["row_id", "score", "argmax_beta"] {
        return Err(Error::ScoresFormat(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| bad(&e))?;
        let field = |k: usize| record.get(k).unwrap_or("");
        rows.push(ScoreRow {
            row_id: field(0).parse().map_err(|e| bad(&e))?,
            score: field(1).parse().map_err(|e| bad(&e))?,
            argmax_beta: field(2).parse().map_err(|e| bad(&e))?,
        });
    }
    Ok(rows)
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: PathBuf::from(path),
        source,
    }
}
