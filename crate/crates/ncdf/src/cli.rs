//! Command-line front end. Every subcommand is a pure function of its
//! flags; outputs go to a temporary file first and are renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncdf_core::simulate::{simulate_1d, simulate_grid, simulate_stream};
use ncdf_core::{
    epsilon_max, log10_volume_ratio, log_volume, minmax_normalize, slice_windows, Dataset,
    Detector, EvalConfig, EvalReport, Method, NcdfFamily, NormParam, ScoreReport, ScoringConfig,
};

use crate::csv_io::{self, IngestReport, LoadOptions};
use crate::error::{Error, Result};
use crate::export::{build_export, ExportInput, DEFAULT_MAX_N};
use crate::parallel::{build_family_par, score_family_par, windowed_eval_par, with_threads};

#[derive(Debug, Parser)]
#[command(name = "ncdf", version, about = "Neighborhood-CDF anomaly scoring")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every row of a CSV file.
    Score(ScoreArgs),
    /// Windowed AUC evaluation of a labeled CSV file.
    Eval(EvalArgs),
    /// Write the JSON consumed by the visual front end.
    Export(ExportArgs),
    /// Write a synthetic dataset as CSV.
    Simulate(SimulateArgs),
    /// Print L^p ball volumes for a radius and dimension.
    Volume(VolumeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    pub input: PathBuf,
    /// Column holding the labels; removed from the features.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Columns to ignore, e.g. addresses or timestamps. Repeatable.
    #[arg(long = "drop-col")]
    pub drop_cols: Vec<String>,
}

impl InputArgs {
    fn load(&self) -> Result<(Dataset, IngestReport)> {
        let options = LoadOptions {
            label_column: self.label_col.clone(),
            drop_columns: self.drop_cols.clone(),
        };
        let (data, report) = csv_io::load_csv(&self.input, &options)?;
        eprintln!("ingest: {report}");
        Ok((data, report))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScoringArgs {
    /// Norm exponent: a decimal, `2^m`, or `inf`.
    #[arg(long, default_value = "2^-4")]
    pub p: NormParam,
    #[arg(long, default_value = "gaps")]
    pub method: Method,
    /// Number of β-levels.
    #[arg(long, default_value_t = 100)]
    pub levels: usize,
    /// Gap fraction for the gaps method.
    #[arg(long, default_value_t = 0.01)]
    pub r: f64,
    /// Bins per observation for the hist method.
    #[arg(long, default_value_t = 0.05)]
    pub bins_frac: f64,
}

impl ScoringArgs {
    pub fn config(&self) -> ScoringConfig {
        ScoringConfig {
            method: self.method,
            levels: self.levels,
            r: self.r,
            bin_fraction: self.bins_frac,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Scores CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorKind {
    Ncdf,
    Knn,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Window size.
    #[arg(long, default_value_t = 400)]
    pub ws: usize,
    /// Anomaly prevalence after subsampling.
    #[arg(long, default_value_t = 0.004)]
    pub prevalence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DetectorKind::Ncdf)]
    pub detector: DetectorKind,
    /// Neighbor rank for the knn detector.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Refuse inputs with more rows than this.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Export a single window of this many rows.
    #[arg(long)]
    pub ws: Option<usize>,
    /// Index of the window to export.
    #[arg(long, default_value_t = 0, requires = "ws")]
    pub window: usize,
    /// Shuffle rows with this seed before windowing.
    #[arg(long, requires = "ws")]
    pub seed: Option<u64>,
    /// Dataset name stored in the export; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulationKind {
    #[value(name = "1d")]
    OneD,
    Grid,
    Stream,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: SimulationKind,
    /// Dimension (grid and stream).
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Normal rows of a stream.
    #[arg(long, default_value_t = 3984)]
    pub inliers: usize,
    /// Anomalous rows of a stream.
    #[arg(long, default_value_t = 40)]
    pub outliers: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VolumeArgs {
    #[arg(long)]
    pub p: NormParam,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub eps: f64,
}

/// Normalize, build the family and score it.
pub fn score_dataset(
    raw: &Dataset,
    p: NormParam,
    config: &ScoringConfig,
) -> Result<(Dataset, NcdfFamily, ScoreReport)> {
    config.validate()?;
    let normalized = minmax_normalize(raw);
    let family = build_family_par(&normalized, p)?;
    let report = score_family_par(&family, config)?;
    Ok((normalized, family, report))
}

pub fn run(cli: Cli) -> Result<()> {
    let command = cli.command;
    with_threads(cli.threads, move || match command {
        Command::Score(args) => cmd_score(&args),
        Command::Eval(args) => cmd_eval(&args).map(|_| ()),
        Command::Export(args) => cmd_export(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Volume(args) => cmd_volume(&args),
    })
}

pub fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let (raw, _) = args.input.load()?;
    let (_, _, report) = score_dataset(&raw, args.scoring.p, &args.scoring.config())?;
    emit(args.out.as_deref(), |w| {
        csv_io::write_scores(raw.row_ids(), &report, w).map_err(csv_error(args.out.as_deref()))
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    if args.input.label_col.is_none() {
        return Err(Error::Usage("eval needs --label-col".into()));
    }
    let (raw, _) = args.input.load()?;
    let detector = match args.detector {
        DetectorKind::Ncdf => Detector::Ncdf {
            p: args.scoring.p,
            scoring: args.scoring.config(),
        },
        DetectorKind::Knn => Detector::Knn { k: args.k },
    };
    if let Detector::Ncdf { scoring, .. } = &detector {
        scoring.validate()?;
    }
    let config = EvalConfig {
        ws: args.ws,
        prevalence: args.prevalence,
        seed: args.seed,
        detector,
    };
    let report = windowed_eval_par(&raw, &config)?;
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report)?;
        write_atomic(out, |w| {
            w.write_all(json.as_bytes()).map_err(csv_io::io_error(out))
        })?;
    }
    let mut stdout = std::io::stdout().lock();
    write_eval_table(&report, &mut stdout).map_err(csv_io::io_error(Path::new("<stdout>")))?;
    Ok(report)
}

pub fn write_eval_table<W: Write>(report: &EvalReport, w: &mut W) -> std::io::Result<()> {
    writeln!(
        w,
        "{:>6}  {:>9}  {:>6}  {:>8}",
        "window", "anomalous", "normal", "auc"
    )?;
    for win in &report.windows {
        let auc = win
            .auc
            .map_or_else(|| "skipped".to_owned(), |a| format!("{a:.4}"));
        writeln!(
            w,
            "{:>6}  {:>9}  {:>6}  {:>8}",
            win.index, win.anomalous, win.normal, auc
        )?;
    }
    writeln!(
        w,
        "rows={} dropped={} windows={} evaluated={} skipped={}",
        report.rows,
        report.dropped_rows,
        report.windows.len(),
        report.per_window_auc.len(),
        report.skipped_windows.len()
    )?;
    writeln!(
        w,
        "mean_auc={:.6} pooled_auc={:.6}",
        report.mean_auc, report.pooled_auc
    )
}

pub fn cmd_export(args: &ExportArgs) -> Result<()> {
    let (mut raw, _) = args.input.load()?;
    if let Some(ws) = args.ws {
        if let Some(seed) = args.seed {
            raw = raw.shuffled(seed);
        }
        let windows = slice_windows(&raw, ws)?;
        let count = windows.len();
        raw = windows.into_iter().nth(args.window).ok_or_else(|| {
            Error::Usage(format!(
                "window {} out of range: {} rows give {count} windows of {ws}",
                args.window,
                raw.len()
            ))
        })?;
    }
    if raw.len() > args.max_n {
        return Err(Error::ExportTooLarge {
            n: raw.len(),
            max_n: args.max_n,
        });
    }
    let (normalized, family, report) = score_dataset(&raw, args.scoring.p, &args.scoring.config())?;
    let name = args.name.clone().unwrap_or_else(|| {
        args.input
            .input
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
    });
    let export = build_export(ExportInput {
        dataset: name,
        seed: args.seed,
        raw: &raw,
        normalized: &normalized,
        family: &family,
        report: &report,
        max_n: args.max_n,
    })?;
    let json = export.to_json()?;
    write_atomic(&args.out, |w| {
        w.write_all(json.as_bytes())
            .map_err(csv_io::io_error(&args.out))
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let data = match args.kind {
        SimulationKind::OneD => simulate_1d(),
        SimulationKind::Grid => simulate_grid(args.d, args.seed)?,
        SimulationKind::Stream => simulate_stream(args.inliers, args.outliers, args.d, args.seed)?,
    };
    emit(args.out.as_deref(), |w| {
        csv_io::write_dataset(&data, w).map_err(csv_error(args.out.as_deref()))
    })
}

pub fn cmd_volume(args: &VolumeArgs) -> Result<()> {
    let ln_v = log_volume(args.eps, args.d, args.p)?;
    println!("p={} d={} eps={}", args.p, args.d, args.eps);
    println!("ln_volume={ln_v}");
    println!("log10_volume={}", ln_v / std::f64::consts::LN_10);
    println!("eps_max={}", epsilon_max(args.d, args.p));
    println!(
        "log10_ratio_to_eps_max={}",
        log10_volume_ratio(args.eps, args.d, args.p)
    );
    Ok(())
}

fn csv_error(path: Option<&Path>) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.unwrap_or(Path::new("<stdout>")).to_path_buf(),
        source,
    }
}

/// Writes to `path` atomically, or to stdout when there is no path.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => write_atomic(path, f),
        None => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            std::io::stdout()
                .lock()
                .write_all(&buf)
                .map_err(csv_io::io_error(Path::new("<stdout>")))
        }
    }
}

/// Fills a temporary file next to `path` and renames it over `path`, so a
/// failure never leaves a partial output behind.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(csv_io::io_error(path))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        f(&mut w)?;
        w.flush().map_err(csv_io::io_error(path))?;
    }
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}
