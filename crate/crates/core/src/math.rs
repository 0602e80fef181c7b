//! Small log-space helpers shared by the distribution code.

use alloc::vec::Vec;

/// `ln x!` for every `x` in `lower..=upper`, by cumulative summation of `ln k`.
pub(crate) fn ln_factorials(lower: u32, upper: u32) -> Vec<f64> {
    let mut acc = 0.0;
    for k in 2..=lower {
        acc += libm::log(f64::from(k));
    }
    let mut out = Vec::with_capacity((upper - lower + 1) as usize);
    out.push(acc);
    for k in (lower + 1)..=upper {
        acc += libm::log(f64::from(k));
        out.push(acc);
    }
    out
}

/// `ln(e^a + e^b)`, exact when either side is `-inf`.
#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `ln Σ e^{v_i}` with the maximum shifted out first.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| libm::exp(v - max)).sum();
    max + libm::log(sum)
}

/// `ln w`, mapping `0` to `-inf`.
#[inline]
pub(crate) fn ln_weight(w: f64) -> f64 {
    if w <= 0.0 {
        f64::NEG_INFINITY
    } else {
        libm::log(w)
    }
}

/// `a * b` with the convention `0 * ±inf = 0`.
#[inline]
pub(crate) fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * b
    }
}
