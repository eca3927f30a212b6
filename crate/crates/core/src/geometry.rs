//! L^p quasi-norm geometry: distances, closed neighborhoods under an optional
//! linear transform, and neighborhood volumes inside the unit cube.
//!
//! Volumes are only ever exposed in the log domain. At the dimensions seen in
//! flow-feature data (d ≈ 70) the linear-domain ratios fall far below the
//! smallest representable `f64`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};

/// Exponent of the L^p (quasi-)norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormParam {
    /// `0 < p < ∞`. Values below 1 give a quasi-norm with a non-convex ball.
    Finite(f64),
    /// The max norm.
    Infinity,
}

impl Default for NormParam {
    /// `p = 2^-4`, the small exponent the scoring pipeline is tuned for.
    fn default() -> Self {
        NormParam::dyadic(-4)
    }
}

impl NormParam {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 {
            Ok(NormParam::Finite(p))
        } else if p == f64::INFINITY {
            Ok(NormParam::Infinity)
        } else {
            Err(Error::InvalidNorm(p))
        }
    }

    /// `p = 2^m`, which is exact in binary floating point.
    pub fn dyadic(m: i32) -> Self {
        NormParam::Finite(libm::ldexp(1.0, m))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, NormParam::Infinity)
    }

    /// The exponent as an `f64` (`inf` for the max norm).
    pub fn value(&self) -> f64 {
        match *self {
            NormParam::Finite(p) => p,
            NormParam::Infinity => f64::INFINITY,
        }
    }

    /// `m` such that `p = 2^m`, if `p` is a power of two.
    pub fn dyadic_exponent(&self) -> Option<i32> {
        match *self {
            NormParam::Finite(p) => {
                let (mantissa, exp) = libm::frexp(p);
                (mantissa == 0.5).then_some(exp - 1)
            }
            NormParam::Infinity => None,
        }
    }

    fn kernel(&self) -> Kernel {
        match *self {
            NormParam::Infinity => Kernel::Max,
            NormParam::Finite(1.0) => Kernel::One,
            NormParam::Finite(2.0) => Kernel::Two,
            NormParam::Finite(p) => match self.dyadic_exponent() {
                Some(m) if (-30..0).contains(&m) => Kernel::RootChain((-m) as u32),
                _ => Kernel::General { p, inv: 1.0 / p },
            },
        }
    }

    /// `Σ |x_i - y_i|^p` (or `max |x_i - y_i|` for `p = ∞`), the quantity
    /// whose `1/p`-th power is the distance. It is monotone in the distance
    /// and stays finite where the distance itself overflows (`d^{1/p}` for
    /// tiny `p`), so per-row normalization works on it directly.
    ///
    /// Both slices must have the same length; extra elements are ignored.
    pub fn power_sum(&self, x: &[f64], y: &[f64]) -> f64 {
        let kernel = self.kernel();
        let mut acc = 0.0;
        for (a, b) in x.iter().zip(y) {
            acc = kernel.accumulate(acc, abs(a - b));
        }
        acc
    }

    /// Inverse of the outer power: maps a [`power_sum`](Self::power_sum)
    /// value to a distance.
    pub fn root(&self, power_sum: f64) -> f64 {
        self.kernel().root(power_sum)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Max,
    One,
    Two,
    /// `p = 2^-m`: the term is `m` nested square roots and the root is `m`
    /// repeated squarings, both cheaper and tighter than `pow`.
    RootChain(u32),
    General {
        p: f64,
        inv: f64,
    },
}

impl Kernel {
    #[inline]
    fn accumulate(self, acc: f64, delta: f64) -> f64 {
        match self {
            Kernel::Max => acc.max(delta),
            Kernel::One => acc + delta,
            Kernel::Two => acc + delta * delta,
            Kernel::RootChain(m) => {
                let mut t = delta;
                for _ in 0..m {
                    t = sqrt(t);
                }
                acc + t
            }
            Kernel::General { p, .. } => acc + libm::pow(delta, p),
        }
    }

    #[inline]
    fn root(self, s: f64) -> f64 {
        match self {
            Kernel::Max | Kernel::One => s,
            Kernel::Two => sqrt(s),
            Kernel::RootChain(m) => {
                let mut t = s;
                for _ in 0..m {
                    t *= t;
                }
                t
            }
            Kernel::General { inv, .. } => libm::pow(s, inv),
        }
    }
}

impl fmt::Display for NormParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormParam::Infinity => f.write_str("inf"),
            NormParam::Finite(p) => match self.dyadic_exponent() {
                Some(0) => f.write_str("1"),
                Some(m) => write!(f, "2^{m}"),
                None => write!(f, "{p}"),
            },
        }
    }
}

impl FromStr for NormParam {
    type Err = Error;

    /// Accepts a positive decimal, `2^m` (exact), or `inf`/`infinity`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let err = || Error::NormParse(t.to_string());
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(NormParam::Infinity);
        }
        if let Some(exp) = t.strip_prefix("2^") {
            let exp = exp.trim_start_matches('(').trim_end_matches(')');
            let m: i32 = exp.trim().parse().map_err(|_| err())?;
            if !(-1000..=1000).contains(&m) {
                return Err(err());
            }
            return Ok(NormParam::dyadic(m));
        }
        let p: f64 = t.parse().map_err(|_| err())?;
        NormParam::finite(p).map_err(|_| err())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for NormParam {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for NormParam {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> core::result::Result<Self, D::Error> {
        let s = alloc::string::String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `‖x − y‖_p`. Symmetric, zero iff `x == y`.
pub fn lp_distance(x: &[f64], y: &[f64], p: NormParam) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(p.root(p.power_sum(x, y)))
}

/// Closed ball `{x : ‖A⁻¹(x − center)‖ ≤ epsilon}`. `A` defaults to the
/// identity; when given it is stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSpec {
    center: Vec<f64>,
    epsilon: f64,
    transform: Option<Vec<f64>>,
}

impl NeighborhoodSpec {
    pub fn new(center: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "radius must be non-negative".to_string(),
            });
        }
        Ok(Self {
            center,
            epsilon,
            transform: None,
        })
    }

    /// Attaches a `d × d` row-major transform. Fails if it is not square in
    /// the center's dimension or is singular.
    pub fn with_transform(mut self, a: Vec<f64>) -> Result<Self> {
        let d = self.center.len();
        if a.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: a.len(),
            });
        }
        solve(&a, &vec![0.0; d])?;
        self.transform = Some(a);
        Ok(self)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn transform(&self) -> Option<&[f64]> {
        self.transform.as_deref()
    }
}

/// Whether `x` lies in the closed neighborhood described by `spec`.
pub fn in_neighborhood(x: &[f64], spec: &NeighborhoodSpec, p: NormParam) -> Result<bool> {
    let d = spec.center.len();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x.len(),
        });
    }
    let offset: Vec<f64> = x.iter().zip(&spec.center).map(|(a, c)| a - c).collect();
    let u = match &spec.transform {
        Some(a) => solve(a, &offset)?,
        None => offset,
    };
    let origin = vec![0.0; d];
    Ok(lp_distance(&u, &origin, p)? <= spec.epsilon)
}

/// Solves `A u = b` by Gaussian elimination with partial pivoting.
fn solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let d = b.len();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
    if scale == 0.0 {
        return Err(Error::SingularTransform);
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| abs(m[i * d + col]).total_cmp(&abs(m[j * d + col])))
            .unwrap_or(col);
        if abs(m[pivot * d + col]) <= 1e-12 * scale {
            return Err(Error::SingularTransform);
        }
        if pivot != col {
            for k in 0..d {
                m.swap(pivot * d + k, col * d + k);
            }
            rhs.swap(pivot, col);
        }
        for row in col + 1..d {
            let factor = m[row * d + col] / m[col * d + col];
            if factor != 0.0 {
                for k in col..d {
                    m[row * d + k] -= factor * m[col * d + k];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    let mut u = vec![0.0; d];
    for row in (0..d).rev() {
        let tail: f64 = (row + 1..d).map(|k| m[row * d + k] * u[k]).sum();
        u[row] = (rhs[row] - tail) / m[row * d + row];
    }
    Ok(u)
}

/// Largest L^p distance between two points of `[0, 1]^d`: `d^{1/p}`, which
/// is 1 for the max norm. Overflows to `inf` for very small `p`; see
/// [`log10_volume_ratio`] for a representation that does not.
pub fn epsilon_max(d: usize, p: NormParam) -> f64 {
    match p {
        NormParam::Infinity => 1.0,
        NormParam::Finite(p) => libm::pow(d as f64, 1.0 / p),
    }
}

/// Natural log of the volume of the L^p ball of radius `epsilon` in `R^d`:
/// `d·ln(2ε) + d·lnΓ(1 + 1/p) − lnΓ(1 + d/p)`.
pub fn log_volume(epsilon: f64, d: usize, p: NormParam) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::NonPositiveRadius(epsilon));
    }
    if d == 0 {
        return Err(Error::NoFeatures);
    }
    let d = d as f64;
    let cube = d * libm::log(2.0 * epsilon);
    Ok(match p {
        NormParam::Infinity => cube,
        NormParam::Finite(p) => cube + d * libm::lgamma(1.0 + 1.0 / p) - libm::lgamma(1.0 + d / p),
    })
}

/// `log10(V(ε) / V(ε_max)) = d·log10(ε / d^{1/p})`, the share of the largest
/// in-cube neighborhood taken by a neighborhood of radius `ε`. Zero at
/// `ε = ε_max`.
pub fn log10_volume_ratio(epsilon: f64, d: usize, p: NormParam) -> f64 {
    let dd = d as f64;
    match p {
        NormParam::Infinity => dd * libm::log10(epsilon),
        NormParam::Finite(p) => dd * (libm::log10(epsilon) - libm::log10(dd) / p),
    }
}

/// Maps a row-normalized radius `ε/ε_max ∈ [0, 1]` to the matching volume
/// fraction `(ε/ε_max)^d`. Underflows to zero quickly as `d` grows.
pub fn volume_fraction(normalized_radius: f64, d: usize) -> f64 {
    libm::pow(normalized_radius, d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT5: f64 = 2.236_067_977_499_79;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        abs(a - b) <= rel * abs(b).max(1e-300)
    }

    #[test]
    fn distance_examples() {
        let o = [0.0, 0.0];
        let q = [3.0, 4.0];
        assert_eq!(lp_distance(&o, &q, NormParam::Finite(2.0)).unwrap(), 5.0);
        assert_eq!(lp_distance(&o, &q, NormParam::Infinity).unwrap(), 4.0);
        let half = lp_distance(&o, &q, NormParam::Finite(0.5)).unwrap();
        // (√3 + 2)² = 7 + 4√3
        assert!(close(half, 7.0 + 4.0 * sqrt(3.0), 1e-14), "{half}");
        assert!(close(
            lp_distance(&o, &q, NormParam::Finite(1.0)).unwrap(),
            7.0,
            0.0
        ));
    }

    #[test]
    fn distance_dimension_mismatch() {
        assert_eq!(
            lp_distance(&[0.0], &[1.0, 2.0], NormParam::default()),
            Err(Error::DimensionMismatch {
                expected: 1,
                actual: 2
            })
        );
    }

    #[test]
    fn dyadic_kernel_matches_pow() {
        let x = [0.1, 0.7, 0.33];
        let y = [0.9, 0.2, 0.31];
        let p = NormParam::dyadic(-4);
        let fast = lp_distance(&x, &y, p).unwrap();
        let s: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| libm::pow(abs(a - b), 0.0625))
            .sum();
        let slow = libm::pow(s, 16.0);
        assert!(close(fast, slow, 1e-13), "{fast} vs {slow}");
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(
            "2^-4".parse::<NormParam>().unwrap(),
            NormParam::Finite(0.0625)
        );
        assert_eq!(
            "2^(-5)".parse::<NormParam>().unwrap(),
            NormParam::Finite(0.03125)
        );
        assert_eq!("inf".parse::<NormParam>().unwrap(), NormParam::Infinity);
        assert_eq!("0.5".parse::<NormParam>().unwrap(), NormParam::Finite(0.5));
        assert!("0".parse::<NormParam>().is_err());
        assert!("-1".parse::<NormParam>().is_err());
        assert!("two".parse::<NormParam>().is_err());
        assert_eq!(NormParam::dyadic(-4).to_string(), "2^-4");
        assert_eq!(NormParam::Finite(1.0).to_string(), "1");
        assert_eq!(NormParam::Finite(0.3).to_string(), "0.3");
        assert_eq!(NormParam::Infinity.to_string(), "inf");
        assert_eq!(NormParam::default(), NormParam::Finite(0.0625));
    }

    #[test]
    fn neighborhood_is_closed() {
        let ball = NeighborhoodSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        let p2 = NormParam::Finite(2.0);
        assert!(in_neighborhood(&[0.0, 0.0], &ball, p2).unwrap());
        assert!(in_neighborhood(&[1.0, 0.0], &ball, p2).unwrap());
        assert!(!in_neighborhood(&[1.0, 1e-6], &ball, p2).unwrap());
        let point = NeighborhoodSpec::new(vec![0.3, 0.4], 0.0).unwrap();
        assert!(in_neighborhood(&[0.3, 0.4], &point, NormParam::default()).unwrap());
        assert!(NeighborhoodSpec::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn transformed_ball_is_an_ellipse_along_eigenvectors() {
        // A = 2 v1 v1' + 1 v2 v2' with v1 = (2,1)/√5, v2 = (-1,2)/√5.
        let v1 = [2.0 / SQRT5, 1.0 / SQRT5];
        let v2 = [-1.0 / SQRT5, 2.0 / SQRT5];
        let mut a = vec![0.0; 4];
        for r in 0..2 {
            for c in 0..2 {
                a[r * 2 + c] = 2.0 * v1[r] * v1[c] + v2[r] * v2[c];
            }
        }
        let spec = NeighborhoodSpec::new(vec![0.0, 0.0], 1.0)
            .unwrap()
            .with_transform(a)
            .unwrap();
        let p2 = NormParam::Finite(2.0);
        let along = |v: [f64; 2], t: f64| [v[0] * t, v[1] * t];
        assert!(in_neighborhood(&along(v1, 1.999), &spec, p2).unwrap());
        assert!(!in_neighborhood(&along(v1, 2.001), &spec, p2).unwrap());
        assert!(in_neighborhood(&along(v2, 0.999), &spec, p2).unwrap());
        assert!(!in_neighborhood(&along(v2, 1.001), &spec, p2).unwrap());
        assert!(!in_neighborhood(&along(v2, 1.5), &spec, p2).unwrap());
    }

    #[test]
    fn singular_transform_rejected() {
        let spec = NeighborhoodSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(
            spec.clone().with_transform(vec![1.0, 2.0, 2.0, 4.0]),
            Err(Error::SingularTransform)
        );
        assert_eq!(
            spec.with_transform(vec![1.0; 3]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn epsilon_max_examples() {
        assert_eq!(epsilon_max(2, NormParam::Finite(1.0)), 2.0);
        assert_eq!(epsilon_max(70, NormParam::Infinity), 1.0);
        assert_eq!(epsilon_max(2, NormParam::Finite(0.5)), 4.0);
        assert!(epsilon_max(3, NormParam::Finite(0.5)) > epsilon_max(3, NormParam::Finite(1.0)));
    }

    #[test]
    fn log_volume_examples() {
        let ln8 = libm::log(8.0);
        assert!(close(
            log_volume(1.0, 3, NormParam::Infinity).unwrap(),
            ln8,
            1e-15
        ));
        let disk = log_volume(sqrt(2.0), 2, NormParam::Finite(2.0)).unwrap();
        assert!(close(disk, libm::log(2.0 * core::f64::consts::PI), 1e-12));
        let diamond = log_volume(2.0, 2, NormParam::Finite(1.0)).unwrap();
        assert!(close(diamond, ln8, 1e-12));
        assert_eq!(
            log_volume(0.0, 2, NormParam::default()),
            Err(Error::NonPositiveRadius(0.0))
        );
        let huge = log_volume(0.5, 1000, NormParam::dyadic(-8)).unwrap();
        assert!(huge.is_finite());
    }

    #[test]
    fn volume_ratio_examples() {
        let p1 = NormParam::Finite(1.0);
        assert!(abs(log10_volume_ratio(epsilon_max(5, p1), 5, p1)) < 1e-12);
        let r = log10_volume_ratio(0.5, 70, p1);
        assert!(abs(r - (-70.0 * libm::log10(140.0))) < 1e-9, "{r}");
        for p in [NormParam::dyadic(-5), p1, NormParam::Infinity] {
            assert!(abs(log10_volume_ratio(0.5, 1, p) - libm::log10(0.5)) < 1e-15);
        }
    }
}
