//! Synthetic datasets with known anomalies.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Ten repetitions of a local pattern on the real line: nine normal points
/// at `10i` and one anomalous point at `10i + 1`, for `i = 0..10`.
pub fn simulate_1d() -> Dataset {
    let mut values = Vec::with_capacity(100);
    let mut labels = Vec::with_capacity(100);
    for i in 0..10 {
        let base = 10.0 * i as f64;
        values.extend(core::iter::repeat_n(base, 9));
        labels.extend(core::iter::repeat_n(false, 9));
        values.push(base + 1.0);
        labels.push(true);
    }
    Dataset::new(
        values,
        vec![String::from("x")],
        Some(labels),
        (0..100).collect(),
    )
    .expect("well-formed simulator output")
}

/// Coordinates of the three injected outliers along the diagonal, in the
/// order they are appended: near-lattice, between clusters, far.
pub const GRID_OUTLIERS: [f64; 3] = [0.105, 0.22, 0.5];

/// Observations of the dense lattice `{0.01·i}` and sparse lattice
/// `{0.8 + 0.02·i}`.
pub const GRID_DENSE_POINTS: usize = 21 * 21;
pub const GRID_SPARSE_POINTS: usize = 11 * 11;

/// Two lattice clusters of different density plus three outliers on the
/// diagonal.
///
/// For `d = 2` the clusters are the full lattices `{0.01·i : i = 0..=20}²`
/// (441 points) and `{0.8 + 0.02·i : i = 0..=10}²` (121 points). For larger
/// `d` the same counts are drawn as distinct nodes of the d-dimensional
/// lattices, so `n = 565` for every `d`. Rows are ordered dense cluster,
/// sparse cluster, then the outliers at `a·1` for `a` in [`GRID_OUTLIERS`].
pub fn simulate_grid(d: usize, seed: u64) -> Result<Dataset> {
    if d < 2 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("grid simulator needs d >= 2, got {d}"),
        });
    }
    let mut values = Vec::with_capacity((GRID_DENSE_POINTS + GRID_SPARSE_POINTS + 3) * d);
    let lattices: [(f64, f64, u8, usize); 2] = [
        (0.0, 0.01, 21, GRID_DENSE_POINTS),
        (0.8, 0.02, 11, GRID_SPARSE_POINTS),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (offset, step, side, count) in lattices {
        let nodes = if d == 2 {
            (0..side)
                .flat_map(|a| (0..side).map(move |b| vec![a, b]))
                .collect::<Vec<_>>()
        } else {
            sample_nodes(&mut rng, d, side, count)
        };
        for node in nodes {
            values.extend(node.iter().map(|&k| offset + step * f64::from(k)));
        }
    }
    for a in GRID_OUTLIERS {
        values.extend(core::iter::repeat_n(a, d));
    }
    let n = GRID_DENSE_POINTS + GRID_SPARSE_POINTS + 3;
    let labels = (0..n).map(|i| i >= n - 3).collect();
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::new(values, names, Some(labels), (0..n as u64).collect())
}

/// `count` distinct lattice nodes in `{0..side}^d`, in draw order.
fn sample_nodes(rng: &mut ChaCha8Rng, d: usize, side: u8, count: usize) -> Vec<Vec<u8>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let node: Vec<u8> = (0..d).map(|_| rng.gen_range(0..side)).collect();
        if seen.insert(node.clone()) {
            out.push(node);
        }
    }
    out
}

/// An evaluation stream: `inliers` points uniform in `[0, 1]^d` followed by
/// `outliers` anomalous points uniform in `[2, 3]^d`.
pub fn simulate_stream(inliers: usize, outliers: usize, d: usize, seed: u64) -> Result<Dataset> {
    if d == 0 {
        return Err(Error::NoFeatures);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = inliers + outliers;
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        let shift = if i < inliers { 0.0 } else { 2.0 };
        values.extend((0..d).map(|_| shift + rng.gen::<f64>()));
    }
    let labels = (0..n).map(|i| i >= inliers).collect();
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::new(values, names, Some(labels), (0..n as u64).collect())
}
