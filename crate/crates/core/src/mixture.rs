//! The two-component truncated CMP mixture `p f1 + (1 - p) f2`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cmp::{cdf, log_pmf_truncated, lookup, moments_truncated, pmf_truncated};
use crate::cmp::{CmpParams, Support};
use crate::error::{Error, Result};
use crate::math::{ln_weight, log_add_exp, mul0};
use crate::rng::Uniform;

/// Observed data as counts per support value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    support: Support,
    counts: Vec<u64>,
    labels: Option<Vec<String>>,
}

impl FrequencyTable {
    pub fn new(support: Support, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                found: counts.len(),
            });
        }
        Ok(Self {
            support,
            counts,
            labels: None,
        })
    }

    /// Counts on `{1, ..., counts.len()}`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyData);
        }
        Self::new(Support::new(1, counts.len() as u32)?, counts.to_vec())
    }

    /// Attaches one ordered label per support value. Labels must be unique.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.support.len() {
            return Err(Error::LengthMismatch {
                expected: self.support.len(),
                found: labels.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label for a support position, falling back to the numeric value.
    pub fn label_at(&self, index: usize) -> String {
        match &self.labels {
            Some(l) => l[index].clone(),
            None => alloc::format!("{}", self.support.value_at(index)),
        }
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Reverses the value order (counts and labels); the support is unchanged.
    pub fn flipped(&self) -> Self {
        let mut counts = self.counts.clone();
        counts.reverse();
        let labels = self.labels.clone().map(|mut l| {
            l.reverse();
            l
        });
        Self {
            support: self.support,
            counts,
            labels,
        }
    }
}

/// Mixing weight `p` of component 1 plus both components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    p: f64,
    comp1: CmpParams,
    comp2: CmpParams,
}

impl MixtureParams {
    pub fn new(p: f64, comp1: CmpParams, comp2: CmpParams) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidWeight(p));
        }
        Ok(Self { p, comp1, comp2 })
    }

    /// Shorthand for `(p, λ1, ν1, λ2, ν2)`.
    pub fn from_values(p: f64, lambda1: f64, nu1: f64, lambda2: f64, nu2: f64) -> Result<Self> {
        Self::new(
            p,
            CmpParams::new(lambda1, nu1)?,
            CmpParams::new(lambda2, nu2)?,
        )
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn comp1(&self) -> &CmpParams {
        &self.comp1
    }

    pub fn comp2(&self) -> &CmpParams {
        &self.comp2
    }

    pub(crate) fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub(crate) fn with_components(mut self, comp1: CmpParams, comp2: CmpParams) -> Self {
        self.comp1 = comp1;
        self.comp2 = comp2;
        self
    }

    /// Reporting order: component 1 has the smaller truncated mean, ties
    /// going to the smaller `nu`.
    pub fn canonical(&self, support: &Support) -> Self {
        let (m1, _) = moments_truncated(&self.comp1, support);
        let (m2, _) = moments_truncated(&self.comp2, support);
        let swap = m2 < m1 || (m2 == m1 && self.comp2.nu() < self.comp1.nu());
        if swap {
            Self {
                p: 1.0 - self.p,
                comp1: self.comp2,
                comp2: self.comp1,
            }
        } else {
            *self
        }
    }
}

/// Posterior probability of component 1, one value per support point.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities(Vec<f64>);

impl Responsibilities {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One mixture side pre-multiplied by its weight, in linear and log form.
pub(crate) struct WeightedLogPmf {
    lin: Vec<f64>,
    log: Vec<f64>,
}

impl WeightedLogPmf {
    pub(crate) fn new(weight: f64, log_pmf: &[f64]) -> Self {
        let lw = ln_weight(weight);
        let log: Vec<f64> = log_pmf.iter().map(|l| lw + l).collect();
        let lin = log.iter().map(|&l| libm::exp(l)).collect();
        Self { lin, log }
    }
}

const LINEAR_FLOOR: f64 = 1e-290;

/// `ln(w1 f1(x) + w2 f2(x))`; linear when safely representable, log-space otherwise.
#[inline]
pub(crate) fn log_mix_at(a: &WeightedLogPmf, b: &WeightedLogPmf, i: usize) -> f64 {
    let s = a.lin[i] + b.lin[i];
    if s > LINEAR_FLOOR {
        libm::log(s)
    } else {
        log_add_exp(a.log[i], b.log[i])
    }
}

/// `Σ_x counts(x) ln(w1 f1(x) + w2 f2(x))`, skipping empty cells.
#[inline]
pub(crate) fn grouped_loglik(counts: &[f64], a: &WeightedLogPmf, b: &WeightedLogPmf) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0.0 {
            acc += c * log_mix_at(a, b, i);
        }
    }
    acc
}

pub(crate) fn weighted_sides(
    mix: &MixtureParams,
    support: &Support,
) -> (WeightedLogPmf, WeightedLogPmf) {
    (
        WeightedLogPmf::new(mix.p, &log_pmf_truncated(&mix.comp1, support)),
        WeightedLogPmf::new(1.0 - mix.p, &log_pmf_truncated(&mix.comp2, support)),
    )
}

/// Pointwise `p f1 + (1 - p) f2` over the support.
pub fn mixture_pmf(mix: &MixtureParams, support: &Support) -> Vec<f64> {
    let f1 = pmf_truncated(&mix.comp1, support);
    let f2 = pmf_truncated(&mix.comp2, support);
    f1.iter()
        .zip(&f2)
        .map(|(a, b)| mul0(mix.p, *a) + mul0(1.0 - mix.p, *b))
        .collect()
}

/// Observed-data log-likelihood on grouped counts.
pub fn observed_loglik(mix: &MixtureParams, data: &FrequencyTable) -> Result<f64> {
    let support = data.support();
    let (a, b) = weighted_sides(mix, support);
    Ok(grouped_loglik(&data.counts_f64(), &a, &b))
}

/// Posterior membership of component 1 for each support value.
pub fn responsibilities(mix: &MixtureParams, data: &FrequencyTable) -> Result<Responsibilities> {
    let support = data.support();
    let (a, b) = weighted_sides(mix, support);
    let same = mix.comp1() == mix.comp2();
    let values = (0..support.len())
        .map(|i| {
            let total = log_mix_at(&a, &b, i);
            if same {
                mix.p()
            } else if a.log[i] == f64::NEG_INFINITY {
                0.0
            } else {
                libm::exp(a.log[i] - total).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(Responsibilities(values))
}

/// Complete-data log-likelihood with responsibilities standing in for the
/// latent memberships. Uses `0 ln 0 = 0`.
pub fn complete_loglik(
    mix: &MixtureParams,
    data: &FrequencyTable,
    resp: &Responsibilities,
) -> Result<f64> {
    let support = data.support();
    if resp.0.len() != support.len() {
        return Err(Error::LengthMismatch {
            expected: support.len(),
            found: resp.0.len(),
        });
    }
    let lf1 = log_pmf_truncated(&mix.comp1, support);
    let lf2 = log_pmf_truncated(&mix.comp2, support);
    let (lp, lq) = (ln_weight(mix.p), ln_weight(1.0 - mix.p));
    let mut acc = 0.0;
    for (i, &c) in data.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let y = resp.0[i];
        acc += c as f64 * (mul0(y, lp + lf1[i]) + mul0(1.0 - y, lq + lf2[i]));
    }
    Ok(acc)
}

/// `n` draws: component 1 with probability `p`, then an inverse-CDF draw from it.
pub fn sample_mixture(
    mix: &MixtureParams,
    support: &Support,
    n: u64,
    seed: u64,
) -> Result<FrequencyTable> {
    let cdf1 = cdf(&pmf_truncated(&mix.comp1, support));
    let cdf2 = cdf(&pmf_truncated(&mix.comp2, support));
    let mut rng = Uniform::new(seed);
    let mut counts = vec![0u64; support.len()];
    for _ in 0..n {
        let pick = rng.next() < mix.p;
        let u = rng.next();
        let i = if pick {
            lookup(&cdf1, u)
        } else {
            lookup(&cdf2, u)
        };
        counts[i] += 1;
    }
    FrequencyTable::new(*support, counts)
}

/// Errors unless `data` lives on `support`.
pub(crate) fn check_support(support: &Support, data: &FrequencyTable) -> Result<()> {
    support.check_same(data.support())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn mix(p: f64, l1: f64, n1: f64, l2: f64, n2: f64) -> MixtureParams {
        MixtureParams::from_values(p, l1, n1, l2, n2).unwrap()
    }

    /// Ungrouped oracle: one term per replicated observation, direct
    /// (non-log-space) mixture density.
    fn per_observation_loglik(m: &MixtureParams, data: &FrequencyTable) -> f64 {
        let f = mixture_pmf(m, data.support());
        let mut acc = 0.0;
        for (i, &c) in data.counts().iter().enumerate() {
            for _ in 0..c {
                acc += libm::log(f[i]);
            }
        }
        acc
    }

    #[test]
    fn table_validation() {
        let s = Support::new(1, 3).unwrap();
        assert!(FrequencyTable::new(s, vec![1, 2]).is_err());
        let t = FrequencyTable::new(s, vec![1, 2, 3]).unwrap();
        assert_eq!(t.n(), 6);
        let dup = t
            .clone()
            .with_labels(vec!["a".into(), "b".into(), "a".into()]);
        assert_eq!(dup, Err(Error::DuplicateLabel("a".into())));
        let ok = t
            .with_labels(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let f = ok.flipped();
        assert_eq!(f.counts(), &[3, 2, 1]);
        assert_eq!(f.labels().unwrap()[0], "c");
        assert_eq!(f.flipped(), ok);
        assert!(MixtureParams::from_values(1.2, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_and_identical_mixtures() {
        let s = Support::new(1, 10).unwrap();
        let m = mix(1.0, 1.5, 2.0, 7.0, 0.5);
        let f1 = pmf_truncated(m.comp1(), &s);
        for (a, b) in mixture_pmf(&m, &s).iter().zip(&f1) {
            assert!((a - b).abs() < 1e-15);
        }
        let same = mix(0.5, 3.0, 0.9, 3.0, 0.9);
        let f = pmf_truncated(same.comp1(), &s);
        for (a, b) in mixture_pmf(&same, &s).iter().zip(&f) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ten_point_expected_counts_from_reported_parameters() {
        let s = Support::new(1, 10).unwrap();
        let m = mix(0.24, 1.13, 3.75, 9.0, 0.8);
        let published = [22, 2, 0, 1, 2, 4, 7, 13, 20, 29];
        for (p, e) in mixture_pmf(&m, &s).iter().zip(published) {
            assert!((libm::round(100.0 * p) - e as f64).abs() <= 1.0);
        }
    }

    #[test]
    fn loglik_single_point_is_zero() {
        let t = FrequencyTable::new(Support::new(1, 1).unwrap(), vec![17]).unwrap();
        let ll = observed_loglik(&mix(0.4, 2.0, 0.5, 7.0, 3.0), &t).unwrap();
        assert!(ll.abs() < 1e-12);
    }

    #[test]
    fn loglik_p_one_is_component_one() {
        let t = fixtures::ten_point();
        let m = mix(1.0, 1.13, 3.75, 9.0, 0.8);
        let lf = log_pmf_truncated(m.comp1(), t.support());
        let direct: f64 = t.counts().iter().zip(&lf).map(|(c, l)| *c as f64 * l).sum();
        assert!((observed_loglik(&m, &t).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn loglik_five_point_matches_ungrouped_oracle() {
        let t = fixtures::five_point();
        let m = mix(0.28, 0.99, 2.3, 4.99, 0.7);
        let ll = observed_loglik(&m, &t).unwrap();
        assert!((ll - per_observation_loglik(&m, &t)).abs() < 1e-9);
        // Our value at the reported parameters; the published AIC (338.83) is
        // not reproducible from them, see the acceptance suite.
        assert!((ll - (-150.744_485_052_905_47)).abs() < 1e-8);
    }

    #[test]
    fn responsibilities_examples() {
        let t = fixtures::ten_point();
        let same = mix(0.3, 2.0, 1.2, 2.0, 1.2);
        for y in responsibilities(&same, &t).unwrap().values() {
            assert!((y - 0.3).abs() < 1e-15);
        }
        let one = mix(1.0, 2.0, 1.2, 8.0, 0.4);
        assert!(responsibilities(&one, &t)
            .unwrap()
            .values()
            .iter()
            .all(|&y| y == 1.0));
        let zero = mix(0.0, 2.0, 1.2, 8.0, 0.4);
        assert!(responsibilities(&zero, &t)
            .unwrap()
            .values()
            .iter()
            .all(|&y| y == 0.0));

        // Arithmetic identity: p f1 / (p f1 + (1 - p) f2) with f1 = 0.2, f2 = 0.1.
        let a = WeightedLogPmf::new(0.5, &[libm::log(0.2)]);
        let b = WeightedLogPmf::new(0.5, &[libm::log(0.1)]);
        let y = libm::exp(a.log[0] - log_mix_at(&a, &b, 0));
        assert!((y - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn complete_loglik_identities() {
        let t = fixtures::ten_point();
        let m = mix(1.0, 1.13, 3.75, 9.0, 0.8);
        let ones = Responsibilities::new(vec![1.0; 10]);
        let c = complete_loglik(&m, &t, &ones).unwrap();
        assert!((c - observed_loglik(&m, &t).unwrap()).abs() < 1e-10);

        let p = 0.35;
        let same = mix(p, 4.0, 0.9, 4.0, 0.9);
        let resp = Responsibilities::new(vec![p; 10]);
        let c = complete_loglik(&same, &t, &resp).unwrap();
        let n = t.n() as f64;
        let expected = observed_loglik(&same, &t).unwrap()
            + n * (p * libm::log(p) + (1.0 - p) * libm::log(1.0 - p));
        assert!((c - expected).abs() < 1e-9);
    }

    #[test]
    fn complete_loglik_matches_ungrouped_expansion() {
        let t = fixtures::five_point();
        let m = mix(0.28, 0.99, 2.3, 4.99, 0.7);
        let resp = responsibilities(&m, &t).unwrap();
        let f1 = pmf_truncated(m.comp1(), t.support());
        let f2 = pmf_truncated(m.comp2(), t.support());
        let mut oracle = 0.0;
        for (i, &c) in t.counts().iter().enumerate() {
            for _ in 0..c {
                let y = resp.values()[i];
                oracle += y * (libm::log(0.28) + libm::log(f1[i]))
                    + (1.0 - y) * (libm::log(0.72) + libm::log(f2[i]));
            }
        }
        assert!((complete_loglik(&m, &t, &resp).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let t = fixtures::ten_point();
        let r = Responsibilities::new(vec![0.5; 3]);
        assert!(complete_loglik(&mix(0.5, 1.0, 1.0, 2.0, 1.0), &t, &r).is_err());
    }

    #[test]
    fn mixture_sampling() {
        let s = Support::new(1, 10).unwrap();
        let m = mix(0.0, 1.0, 3.0, 8.0, 0.7);
        assert_eq!(sample_mixture(&m, &s, 0, 1).unwrap().n(), 0);

        let gen = mix(0.3, 1.0, 3.0, 8.0, 0.7);
        let n = 100_000u64;
        let t = sample_mixture(&gen, &s, n, 99).unwrap();
        assert_eq!(t, sample_mixture(&gen, &s, n, 99).unwrap());
        let pmf = mixture_pmf(&gen, &s);
        for (c, q) in t.counts().iter().zip(&pmf) {
            let freq = *c as f64 / n as f64;
            let se = libm::sqrt(q * (1.0 - q) / n as f64);
            assert!((freq - q).abs() <= 3.0 * se + 1e-12);
        }
    }

    #[test]
    fn p_one_sampling_draws_only_from_component_one() {
        let s = Support::new(1, 10).unwrap();
        let m = mix(1.0, 1.0, 8.0, 30.0, 0.0);
        let t = sample_mixture(&m, &s, 2000, 5).unwrap();
        // Component 1 is essentially a point mass at 1.
        assert!(t.counts()[0] >= 1990);
    }

    #[test]
    fn canonical_order_puts_smaller_mean_first() {
        let s = Support::new(1, 10).unwrap();
        let m = mix(0.7, 8.0, 0.7, 1.0, 3.0).canonical(&s);
        assert!((m.p() - 0.3).abs() < 1e-15);
        assert_eq!(m.comp1().lambda(), 1.0);
    }
}
