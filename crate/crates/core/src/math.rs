//! Float helpers that `core` does not provide.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Floor that forgives representation error just below an integer.
#[inline]
pub(crate) fn floor_tol(x: f64) -> f64 {
    let r = libm::round(x);
    if (x - r).abs() <= 1e-9 {
        r
    } else {
        floor(x)
    }
}

/// Ceil that forgives representation error just above an integer.
#[inline]
pub(crate) fn ceil_tol(x: f64) -> f64 {
    let r = libm::round(x);
    if (x - r).abs() <= 1e-9 {
        r
    } else {
        ceil(x)
    }
}
