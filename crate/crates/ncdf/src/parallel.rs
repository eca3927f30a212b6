//! Rayon-backed versions of the core pipeline. Every function returns
//! bit-identical results to its sequential counterpart in `ncdf-core`,
//! whatever the thread count: work is split per row or per window and
//! reassembled in index order.

use ncdf_core::eval::{assemble_report, evaluate_window, prepare_windows};
use ncdf_core::{
    Dataset, DistanceMatrix, EvalConfig, EvalReport, NcdfCurve, NcdfFamily, NormParam, Result,
    ScoreReport, ScoringConfig, ScoringContext,
};
use rayon::prelude::*;

pub fn build_family_par(data: &Dataset, p: NormParam) -> Result<NcdfFamily> {
    if data.len() < 2 {
        return Err(ncdf_core::Error::TooFewObservations {
            required: 2,
            actual: data.len(),
        });
    }
    let curves: Vec<NcdfCurve> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let row = DistanceMatrix::row_power_sums(data, i, p);
            NcdfCurve::from_power_sums(i, data.row_ids()[i], &row, p)
        })
        .collect();
    NcdfFamily::from_curves(curves, p, data.n_features())
}

pub fn score_family_par(family: &NcdfFamily, config: &ScoringConfig) -> Result<ScoreReport> {
    config.validate()?;
    let context = ScoringContext::new(family, *config);
    let (scores, argmax_level) = (0..family.len())
        .into_par_iter()
        .map(|i| context.score(i))
        .unzip();
    Ok(ScoreReport {
        scores,
        argmax_level,
        config: *config,
    })
}

/// Windows are scored in parallel; the report is assembled in window order.
pub fn windowed_eval_par(data: &Dataset, config: &EvalConfig) -> Result<EvalReport> {
    let prepared = prepare_windows(data, config)?;
    let outcomes = prepared
        .windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| evaluate_window(i, w, &config.detector))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(*config, &prepared, outcomes)
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
