//! Thin wrappers so the rest of the crate reads like `std` float code.

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// `ceil(a * n)` for a fraction `a`, treating products within a few ulps of
/// an integer as that integer (`0.29 * 100` is 28.999999999999996).
pub(crate) fn ceil_product(a: f64, n: usize) -> usize {
    let x = a * n as f64;
    let nearest = round(x);
    if abs(x - nearest) <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        libm::ceil(x) as usize
    }
}

/// `round(a * n)`, half away from zero.
pub(crate) fn round_product(a: f64, n: usize) -> usize {
    round(a * n as f64) as usize
}
