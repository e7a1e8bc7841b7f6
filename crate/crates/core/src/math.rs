//! Thin wrappers over `libm` so the numeric code reads like `std` code.

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `x log2(1/x)` with the `0 log 0 = 0` convention.
#[inline]
pub fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        -x * log2(x)
    } else {
        0.0
    }
}

/// Binary entropy in bits.
#[cfg(test)]
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// Index count `ceil(2^{n r})`, snapping values within 1e-9 of an integer.
pub fn index_count(n: usize, rate: f64) -> f64 {
    let raw = exp2(n as f64 * rate);
    let nearest = round(raw);
    if abs(raw - nearest) <= 1e-9 * raw.max(1.0) {
        nearest
    } else {
        ceil(raw)
    }
}
