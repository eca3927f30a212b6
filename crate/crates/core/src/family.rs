//! The sample NCDF family.
//!
//! Row `i` of the family is the staircase
//! `v ↦ #{j : ‖x_i − x_j‖_p / max_j ‖x_i − x_j‖_p ≤ v} / n`, i.e. the share
//! of the dataset inside the closed neighborhood of `x_i` whose radius is the
//! fraction `v` of the row's largest distance. The self-distance counts, so
//! every curve starts at `1/n` and reaches 1 at `v = 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, MinMax};
use crate::error::{Error, Result};
use crate::geometry::NormParam;
use crate::scoring::{ScoreReport, ScoringConfig, ScoringContext};

/// Pairwise `power_sum` values (`Σ|Δ|^p`, or the max for `p = ∞`) stored
/// row-major. Monotone in the L^p distance; see [`NormParam::power_sum`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    power_sums: Vec<f64>,
}

impl DistanceMatrix {
    /// Computes the upper triangle once and mirrors it.
    pub fn compute(data: &Dataset, p: NormParam) -> Self {
        let n = data.len();
        let mut power_sums = vec![0.0; n * n];
        for i in 0..n {
            let xi = data.row(i);
            for j in i + 1..n {
                let s = p.power_sum(xi, data.row(j));
                power_sums[i * n + j] = s;
                power_sums[j * n + i] = s;
            }
        }
        Self { n, power_sums }
    }

    /// One row of the matrix. `|a − b|` is exactly `|b − a|` in floating
    /// point, so rows computed independently agree bit-for-bit with
    /// [`compute`](Self::compute).
    pub fn row_power_sums(data: &Dataset, i: usize, p: NormParam) -> Vec<f64> {
        let xi = data.row(i);
        data.rows().map(|xj| p.power_sum(xi, xj)).collect()
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut power_sums = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            power_sums.extend(row);
        }
        Ok(Self { n, power_sums })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.power_sums[i * self.n..(i + 1) * self.n]
    }

    /// The actual L^p distance between rows `i` and `j`.
    pub fn distance(&self, i: usize, j: usize, p: NormParam) -> f64 {
        p.root(self.power_sums[i * self.n + j])
    }
}

/// One observation's staircase: its sorted, row-max-normalized distances.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NcdfCurve {
    owner_id: u64,
    xs: Vec<f64>,
    neighbors: Vec<u32>,
    degenerate: bool,
}

impl NcdfCurve {
    /// Builds the curve of row `owner` from its row of power sums. Ties are
    /// ordered self first, then by ascending neighbor index.
    pub fn from_power_sums(owner: usize, owner_id: u64, row: &[f64], p: NormParam) -> Self {
        let mut neighbors: Vec<u32> = (0..row.len() as u32).collect();
        neighbors.sort_by(|&a, &b| {
            row[a as usize]
                .total_cmp(&row[b as usize])
                .then_with(|| (a as usize != owner).cmp(&(b as usize != owner)))
                .then_with(|| a.cmp(&b))
        });
        let max = neighbors.last().map_or(0.0, |&j| row[j as usize]);
        let degenerate = !(max > 0.0);
        let xs = if degenerate {
            vec![0.0; row.len()]
        } else {
            neighbors
                .iter()
                .map(|&j| p.root(row[j as usize] / max))
                .collect()
        };
        Self {
            owner_id,
            xs,
            neighbors,
            degenerate,
        }
    }

    pub fn owner_id(&self) -> u64 {
        self.owner_id
    }

    /// Sorted normalized radii; the `k`-th step (1-based) reaches `k/n`.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Row indices in the order of [`xs`](Self::xs).
    pub fn neighbors(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// The row's largest distance was zero: every observation coincides
    /// with it.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Smallest normalized radius at which the curve reaches `k/n`
    /// (1-based `k`).
    pub fn intercept(&self, k: usize) -> f64 {
        self.xs[k - 1]
    }
}

/// Curve height at `v`: the share of radii `≤ v` (closed neighborhood, so
/// the staircase is right-continuous).
pub fn curve_value(curve: &NcdfCurve, v: f64) -> f64 {
    curve.xs.partition_point(|&x| x <= v) as f64 / curve.len() as f64
}

/// All `n` curves of a dataset under one norm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NcdfFamily {
    curves: Vec<NcdfCurve>,
    p: NormParam,
    n_features: usize,
}

impl NcdfFamily {
    /// Assembles a family from independently built curves (e.g. in
    /// parallel). All curves must have one step per curve.
    pub fn from_curves(curves: Vec<NcdfCurve>, p: NormParam, n_features: usize) -> Result<Self> {
        let n = curves.len();
        if n < 2 {
            return Err(Error::TooFewObservations {
                required: 2,
                actual: n,
            });
        }
        if let Some(bad) = curves.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Self {
            curves,
            p,
            n_features,
        })
    }

    pub fn curves(&self) -> &[NcdfCurve] {
        &self.curves
    }

    pub fn curve(&self, i: usize) -> &NcdfCurve {
        &self.curves[i]
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn norm(&self) -> NormParam {
        self.p
    }

    /// Ids of rows whose maximum distance was zero.
    pub fn degenerate_rows(&self) -> Vec<u64> {
        self.curves
            .iter()
            .filter(|c| c.degenerate)
            .map(|c| c.owner_id)
            .collect()
    }
}

/// Builds the family of a dataset already normalized to `[0, 1]^d`.
pub fn build_family(data: &Dataset, p: NormParam) -> Result<NcdfFamily> {
    if data.len() < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            actual: data.len(),
        });
    }
    let matrix = DistanceMatrix::compute(data, p);
    let curves = (0..data.len())
        .map(|i| NcdfCurve::from_power_sums(i, data.row_ids()[i], matrix.row(i), p))
        .collect();
    NcdfFamily::from_curves(curves, p, data.n_features())
}

/// `⌈j·n / l⌉` in integer arithmetic: the step index (1-based) at which a
/// curve over `n` points first reaches `β_j = j/l`.
pub fn level_rank(j: usize, levels: usize, n: usize) -> usize {
    (j * n).div_ceil(levels)
}

/// The `n` intercepts of level `β_j = j/l` (`1 ≤ j ≤ l`).
pub fn intercepts_at_level(family: &NcdfFamily, j: usize, levels: usize) -> Vec<f64> {
    assert!((1..=levels).contains(&j), "level {j} outside 1..={levels}");
    let k = level_rank(j, levels, family.len()).max(1);
    family.curves.iter().map(|c| c.intercept(k)).collect()
}

/// Intercepts of every curve at `β_j = j/l`, `j = 1..=l`, stored level-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterceptMatrix {
    levels: usize,
    n: usize,
    values: Vec<f64>,
}

impl InterceptMatrix {
    pub fn new(family: &NcdfFamily, levels: usize) -> Self {
        let n = family.len();
        let mut values = Vec::with_capacity(levels * n);
        for j in 1..=levels {
            values.extend(intercepts_at_level(family, j, levels));
        }
        Self { levels, n, values }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of curves.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `β_j = j/l`.
    pub fn beta(&self, j: usize) -> f64 {
        j as f64 / self.levels as f64
    }

    /// Intercepts at level `j` (1-based).
    pub fn level(&self, j: usize) -> &[f64] {
        &self.values[(j - 1) * self.n..j * self.n]
    }
}

/// The normalized radii of a point that is not part of the reference set,
/// sorted: its distances to the `n` reference rows over their maximum.
///
/// The nearest reference row takes the place of the self step, so a point
/// that duplicates reference row `r` gets exactly row `r`'s curve.
pub fn external_curve(reference: &Dataset, x: &[f64], p: NormParam) -> Result<Vec<f64>> {
    if x.len() != reference.n_features() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_features(),
            actual: x.len(),
        });
    }
    let mut sums: Vec<f64> = reference.rows().map(|r| p.power_sum(x, r)).collect();
    sums.sort_by(f64::total_cmp);
    let max = sums.last().copied().unwrap_or(0.0);
    if !(max > 0.0) {
        return Ok(vec![0.0; sums.len()]);
    }
    Ok(sums.into_iter().map(|s| p.root(s / max)).collect())
}

/// A fitted reference window: normalization, family, intercepts and scores.
/// New observations are scored against it in `O(d·n + l·n)` without
/// touching the reference.
#[derive(Debug, Clone)]
pub struct ReferenceModel {
    minmax: MinMax,
    points: Dataset,
    family: NcdfFamily,
    context: ScoringContext,
    report: ScoreReport,
}

impl ReferenceModel {
    /// Normalizes `raw`, builds its family and scores it.
    pub fn fit(raw: &Dataset, p: NormParam, config: ScoringConfig) -> Result<Self> {
        config.validate()?;
        let minmax = MinMax::fit(raw);
        let points = minmax.apply(raw)?;
        let family = build_family(&points, p)?;
        let context = ScoringContext::new(&family, config);
        let report = context.score_all();
        Ok(Self {
            minmax,
            points,
            family,
            context,
            report,
        })
    }

    pub fn family(&self) -> &NcdfFamily {
        &self.family
    }

    pub fn normalized(&self) -> &Dataset {
        &self.points
    }

    pub fn report(&self) -> &ScoreReport {
        &self.report
    }

    pub fn minmax(&self) -> &MinMax {
        &self.minmax
    }

    /// Scores a raw (unnormalized) observation.
    pub fn score_raw(&self, x: &[f64]) -> Result<f64> {
        let normalized = self.minmax.apply_point(x)?;
        self.score_normalized(&normalized)
    }

    /// Scores an observation already in the reference's normalized space.
    pub fn score_normalized(&self, x: &[f64]) -> Result<f64> {
        score_test_observation(&self.points, &self.context, self.family.norm(), x)
    }
}

/// Scores a single new observation against a reference family in `O(d·n)`
/// distance work plus `O(l·(k + b·log n))` scoring, where the reference is
/// given by its normalized points and a [`ScoringContext`] built on its
/// family.
pub fn score_test_observation(
    reference: &Dataset,
    context: &ScoringContext,
    p: NormParam,
    x: &[f64],
) -> Result<f64> {
    let xs = external_curve(reference, x, p)?;
    if xs.last().is_none_or(|&m| m == 0.0) {
        return Ok(0.0);
    }
    let levels = context.config().levels;
    let n = xs.len();
    let intercepts: Vec<f64> = (1..=levels)
        .map(|j| xs[level_rank(j, levels, n).max(1) - 1])
        .collect();
    Ok(context.score_external(&intercepts).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = points.iter().map(|&v| vec![v]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn three_points_on_a_line() {
        for p in [NormParam::Finite(1.0), NormParam::Infinity] {
            let fam = build_family(&line(&[0.0, 0.5, 1.0]), p).unwrap();
            assert_eq!(fam.curve(0).xs(), &[0.0, 0.5, 1.0]);
            assert_eq!(fam.curve(1).xs(), &[0.0, 1.0, 1.0]);
            assert_eq!(fam.curve(2).xs(), &[0.0, 0.5, 1.0]);
        }
        // p < 1 goes through the 1/p-th power and back
        let fam = build_family(&line(&[0.0, 0.5, 1.0]), NormParam::dyadic(-4)).unwrap();
        let expected = [[0.0, 0.5, 1.0], [0.0, 1.0, 1.0], [0.0, 0.5, 1.0]];
        for (curve, want) in fam.curves().iter().zip(expected) {
            for (a, b) in curve.xs().iter().zip(want) {
                assert!(crate::math::abs(a - b) < 1e-14, "{a} vs {b}");
            }
        }
        let fam = build_family(&line(&[0.0, 0.5, 1.0]), NormParam::Finite(2.0)).unwrap();
        assert_eq!(fam.curve(1).neighbors(), &[1, 0, 2]);
        assert_eq!(fam.curve(2).neighbors(), &[2, 1, 0]);
    }

    #[test]
    fn degenerate_and_pairs() {
        let fam = build_family(&line(&[0.3, 0.3]), NormParam::default()).unwrap();
        assert_eq!(fam.curve(0).xs(), &[0.0, 0.0]);
        assert_eq!(fam.degenerate_rows(), vec![0, 1]);
        let fam = build_family(&line(&[0.1, 0.9]), NormParam::default()).unwrap();
        assert_eq!(fam.curve(0).xs(), &[0.0, 1.0]);
        assert_eq!(fam.curve(1).xs(), &[0.0, 1.0]);
        assert!(fam.degenerate_rows().is_empty());
        assert_eq!(
            build_family(&line(&[0.1]), NormParam::default()),
            Err(Error::TooFewObservations {
                required: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn self_step_comes_first_among_ties() {
        let fam = build_family(&line(&[0.2, 0.2, 1.0]), NormParam::Finite(1.0)).unwrap();
        assert_eq!(fam.curve(1).neighbors(), &[1, 0, 2]);
    }

    #[test]
    fn curve_values() {
        let fam = build_family(&line(&[0.0, 0.5, 1.0]), NormParam::Finite(1.0)).unwrap();
        let c = fam.curve(0);
        assert_eq!(curve_value(c, 0.0), 1.0 / 3.0);
        assert_eq!(curve_value(c, 0.5), 2.0 / 3.0);
        assert_eq!(curve_value(c, 0.49), 1.0 / 3.0);
        assert_eq!(curve_value(c, 1.0), 1.0);
    }

    #[test]
    fn intercept_examples() {
        let fam = build_family(&line(&[0.0, 0.5, 1.0]), NormParam::Finite(1.0)).unwrap();
        // β = 0.4 = 2/5 → k = ⌈6/5⌉ = 2
        assert_eq!(intercepts_at_level(&fam, 2, 5), vec![0.5, 1.0, 0.5]);
        assert_eq!(intercepts_at_level(&fam, 5, 5), vec![1.0, 1.0, 1.0]);
        // β = 1/n
        assert_eq!(intercepts_at_level(&fam, 1, 3), vec![0.0, 0.0, 0.0]);
        let m = InterceptMatrix::new(&fam, 5);
        assert_eq!(m.level(2), &[0.5, 1.0, 0.5]);
        assert_eq!(m.beta(2), 0.4);
    }

    #[test]
    fn level_rank_is_exact() {
        assert_eq!(level_rank(29, 100, 100), 29);
        assert_eq!(level_rank(1, 100, 400), 4);
        assert_eq!(level_rank(1, 100, 150), 2);
        assert_eq!(level_rank(100, 100, 7), 7);
        assert_eq!(level_rank(1, 100, 50), 1);
    }

    #[test]
    fn external_curve_of_duplicate_matches_row() {
        let ds = line(&[0.0, 0.2, 0.25, 0.9, 1.0]);
        let p = NormParam::dyadic(-4);
        let fam = build_family(&ds, p).unwrap();
        let xs = external_curve(&ds, &[0.25], p).unwrap();
        assert_eq!(xs, fam.curve(2).xs());
        assert!(external_curve(&ds, &[0.1, 0.1], p).is_err());
    }
}
