//! The Conway-Maxwell-Poisson distribution, truncated to an integer range.
//!
//! Unnormalized weights are `λ^x / (x!)^ν`. Everything is evaluated in log
//! space with the largest exponent shifted out, since `λ^x` and `(x!)^ν`
//! overflow long before the ratio does.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ln_factorials, log_sum_exp};
use crate::mixture::FrequencyTable;
use crate::rng::Uniform;

/// Largest untruncated series the tail search will walk before giving up.
const MAX_SERIES_TERMS: usize = 1_000_000;

/// Inclusive integer range `[lower, upper]` a truncated distribution lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Support {
    lower: u32,
    upper: u32,
}

impl Support {
    pub fn new(lower: u32, upper: u32) -> Result<Self> {
        if upper < lower {
            return Err(Error::InvalidSupport { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> u32 {
        self.lower
    }

    pub fn upper(&self) -> u32 {
        self.upper
    }

    /// Number of support points, `upper - lower + 1`.
    pub fn len(&self) -> usize {
        (self.upper - self.lower) as usize + 1
    }

    /// Always false; a support holds at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> impl DoubleEndedIterator<Item = u32> {
        self.lower..=self.upper
    }

    pub fn contains(&self, x: u32) -> bool {
        (self.lower..=self.upper).contains(&x)
    }

    pub fn index_of(&self, x: u32) -> Option<usize> {
        self.contains(x).then(|| (x - self.lower) as usize)
    }

    pub fn value_at(&self, index: usize) -> u32 {
        self.lower + index as u32
    }

    pub(crate) fn check_same(&self, other: &Support) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SupportMismatch {
                expected_lower: self.lower,
                expected_upper: self.upper,
                found_lower: other.lower,
                found_upper: other.upper,
            })
        }
    }
}

/// One CMP component: rate-like `lambda > 0` and dispersion `nu >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmpParams {
    lambda: f64,
    nu: f64,
}

impl CmpParams {
    pub fn new(lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0 && nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParams { lambda, nu });
        }
        Ok(Self { lambda, nu })
    }

    /// The Poisson special case, `nu = 1`.
    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispersionClass {
    Over,
    Equi,
    Under,
}

impl DispersionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            DispersionClass::Over => "over",
            DispersionClass::Equi => "equi",
            DispersionClass::Under => "under",
        }
    }
}

/// `x ln λ - ν ln x!` for every support value.
fn log_weights(params: &CmpParams, support: &Support) -> Vec<f64> {
    let ln_lambda = libm::log(params.lambda);
    support
        .values()
        .zip(ln_factorials(support.lower, support.upper))
        .map(|(x, lf)| f64::from(x) * ln_lambda - params.nu * lf)
        .collect()
}

/// `ln Σ_{j=lower..=upper} λ^j / (j!)^ν`.
pub fn log_normalizer_truncated(params: &CmpParams, support: &Support) -> f64 {
    log_sum_exp(&log_weights(params, support))
}

/// Log probabilities of the truncated CMP, one per support value.
pub fn log_pmf_truncated(params: &CmpParams, support: &Support) -> Vec<f64> {
    let mut w = log_weights(params, support);
    let z = log_sum_exp(&w);
    for v in &mut w {
        *v -= z;
    }
    w
}

/// Probabilities of the truncated CMP, one per support value.
pub fn pmf_truncated(params: &CmpParams, support: &Support) -> Vec<f64> {
    log_pmf_truncated(params, support)
        .into_iter()
        .map(libm::exp)
        .collect()
}

/// The untruncated CMP pmf on `{0, ..., cutoff}`.
///
/// Terms are added until the latest one is below `tail_epsilon` times the
/// running sum while the term sequence is already decreasing, so the rest of
/// the series is dominated by a geometric tail. The result is renormalized.
pub fn pmf_untruncated(params: &CmpParams, tail_epsilon: f64) -> Result<Vec<f64>> {
    if params.nu == 0.0 && params.lambda >= 1.0 {
        return Err(Error::Divergent {
            lambda: params.lambda,
        });
    }
    let ln_lambda = libm::log(params.lambda);
    let ln_eps = libm::log(tail_epsilon);
    let mut terms: Vec<f64> = vec![0.0];
    let mut ln_fact = 0.0;
    let mut running = 0.0;
    let mut j = 0u64;
    loop {
        j += 1;
        if terms.len() >= MAX_SERIES_TERMS {
            return Err(Error::CutoffExceeded(MAX_SERIES_TERMS));
        }
        ln_fact += libm::log(j as f64);
        let term = j as f64 * ln_lambda - params.nu * ln_fact;
        let previous = *terms.last().expect("series starts non-empty");
        terms.push(term);
        running = crate::math::log_add_exp(running, term);
        if term < previous && term < ln_eps + running {
            break;
        }
    }
    let z = log_sum_exp(&terms);
    Ok(terms.into_iter().map(|t| libm::exp(t - z)).collect())
}

/// `P(X = x - 1) / P(X = x) = x^ν / λ`.
pub fn successive_ratio(x: u32, params: &CmpParams) -> f64 {
    libm::pow(f64::from(x), params.nu) / params.lambda
}

/// Mean and variance of the truncated distribution.
pub fn moments_truncated(params: &CmpParams, support: &Support) -> (f64, f64) {
    let pmf = pmf_truncated(params, support);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, p) in support.values().zip(&pmf) {
        let x = f64::from(x);
        m1 += x * p;
        m2 += x * x * p;
    }
    (m1, (m2 - m1 * m1).max(0.0))
}

pub fn classify_dispersion(params: &CmpParams) -> DispersionClass {
    if params.nu < 1.0 {
        DispersionClass::Over
    } else if params.nu > 1.0 {
        DispersionClass::Under
    } else {
        DispersionClass::Equi
    }
}

/// Cumulative distribution with the last entry pinned to exactly one.
pub(crate) fn cdf(pmf: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = pmf
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Inverse-CDF lookup: the first index whose cumulative mass exceeds `u`.
#[inline]
pub(crate) fn lookup(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Draws `n` values from an arbitrary pmf over `support`, one uniform per draw.
pub fn sample_pmf(pmf: &[f64], support: &Support, n: u64, seed: u64) -> Result<FrequencyTable> {
    if pmf.len() != support.len() {
        return Err(Error::LengthMismatch {
            expected: support.len(),
            found: pmf.len(),
        });
    }
    let cdf = cdf(pmf);
    let mut rng = Uniform::new(seed);
    let mut counts = vec![0u64; support.len()];
    for _ in 0..n {
        counts[lookup(&cdf, rng.next())] += 1;
    }
    FrequencyTable::new(*support, counts)
}

/// `n` draws from the truncated CMP, deterministic for a given seed.
pub fn sample_truncated(
    params: &CmpParams,
    support: &Support,
    n: u64,
    seed: u64,
) -> Result<FrequencyTable> {
    sample_pmf(&pmf_truncated(params, support), support, n, seed)
}
