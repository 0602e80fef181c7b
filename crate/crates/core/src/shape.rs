//! Shape evaluation: modes and lodes, expected counts, AIC, model comparison
//! and log-likelihood surfaces.
//!
//! Shape detection works on plateaus (maximal runs of equal values). A
//! plateau is a local peak when it is strictly above every flanking plateau
//! and a local dip when strictly below. The summary keeps the two highest
//! local peaks as modes (ties to the left) and, for each stretch of the
//! support outside or between the modes, the lowest plateau as a lode. This
//! gives at most two modes and one to three lodes, and ignores small wiggles
//! on a slope (e.g. `104, 106` on the way down from a peak).

use alloc::vec;
use alloc::vec::Vec;

use crate::cmp::{CmpParams, Support};
use crate::em::{FitResult, FittedParams, ModelKind};
use crate::error::{Error, Result};
use crate::mixture::{
    check_support, grouped_loglik, FrequencyTable, MixtureParams, WeightedLogPmf,
};

/// Inclusive range of support positions (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
}

impl Plateau {
    pub fn indices(&self) -> core::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn values(&self, support: &Support) -> Vec<u32> {
        self.indices().map(|i| support.value_at(i)).collect()
    }

    /// Midpoint as a support value.
    pub fn center(&self, support: &Support) -> f64 {
        f64::from(support.value_at(self.start)) + (self.end - self.start) as f64 / 2.0
    }

    fn mirrored(&self, len: usize) -> Self {
        Self {
            start: len - 1 - self.end,
            end: len - 1 - self.start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShapeSummary {
    /// Left to right, at most two.
    pub modes: Vec<Plateau>,
    /// Left to right, alternating with the modes.
    pub lodes: Vec<Plateau>,
    pub peak_magnitudes: Vec<f64>,
    pub dip_magnitudes: Vec<f64>,
    /// Number of local peaks before reduction to the two dominant modes.
    pub local_peaks: usize,
}

impl ShapeSummary {
    pub fn is_bimodal(&self) -> bool {
        self.local_peaks >= 2
    }

    pub fn mode_values(&self, support: &Support) -> Vec<Vec<u32>> {
        self.modes.iter().map(|p| p.values(support)).collect()
    }

    pub fn lode_values(&self, support: &Support) -> Vec<Vec<u32>> {
        self.lodes.iter().map(|p| p.values(support)).collect()
    }

    /// The same summary for the reversed vector of length `len`.
    pub fn mirrored(&self, len: usize) -> Self {
        let flip = |v: &[Plateau]| v.iter().rev().map(|p| p.mirrored(len)).collect();
        let rev = |v: &[f64]| v.iter().rev().copied().collect();
        Self {
            modes: flip(&self.modes),
            lodes: flip(&self.lodes),
            peak_magnitudes: rev(&self.peak_magnitudes),
            dip_magnitudes: rev(&self.dip_magnitudes),
            local_peaks: self.local_peaks,
        }
    }
}

/// `n · pmf(x)` per support value.
pub fn expected_counts(pmf: &[f64], n: u64) -> Vec<f64> {
    pmf.iter().map(|p| n as f64 * p).collect()
}

/// Shape of a count vector after rounding to integers.
pub fn detect_shape(counts: &[f64]) -> ShapeSummary {
    detect_shape_with(counts, true)
}

struct Run {
    plateau: Plateau,
    value: f64,
}

fn runs(values: &[f64]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(run) if run.value == v => run.plateau.end = i,
            _ => out.push(Run {
                plateau: Plateau { start: i, end: i },
                value: v,
            }),
        }
    }
    out
}

/// Lowest run in `runs[from..to]`, leftmost on ties.
fn lowest(runs: &[Run], from: usize, to: usize) -> Option<usize> {
    (from..to).fold(None, |best: Option<usize>, i| match best {
        Some(b) if runs[b].value <= runs[i].value => Some(b),
        _ => Some(i),
    })
}

/// Shape of a count vector; `round` snaps values to integers first.
pub fn detect_shape_with(counts: &[f64], round: bool) -> ShapeSummary {
    let values: Vec<f64> = if round {
        counts.iter().map(|&c| libm::round(c)).collect()
    } else {
        counts.to_vec()
    };
    let runs = runs(&values);
    if runs.len() < 2 {
        return ShapeSummary::default();
    }

    let above = |i: usize, j: Option<usize>| j.is_none_or(|j| runs[i].value > runs[j].value);
    let neighbours = |i: usize| (i.checked_sub(1), (i + 1 < runs.len()).then_some(i + 1));
    let mut peaks: Vec<usize> = (0..runs.len())
        .filter(|&i| {
            let (l, r) = neighbours(i);
            above(i, l) && above(i, r)
        })
        .collect();
    let local_peaks = peaks.len();

    peaks.sort_by(|&x, &y| runs[y].value.total_cmp(&runs[x].value).then(x.cmp(&y)));
    peaks.truncate(2);
    peaks.sort_unstable();

    let mut dips = Vec::new();
    let mut from = 0;
    for &m in &peaks {
        dips.extend(lowest(&runs, from, m));
        from = m + 1;
    }
    dips.extend(lowest(&runs, from, runs.len()));

    ShapeSummary {
        modes: peaks.iter().map(|&i| runs[i].plateau).collect(),
        lodes: dips.iter().map(|&i| runs[i].plateau).collect(),
        peak_magnitudes: peaks.iter().map(|&i| runs[i].value).collect(),
        dip_magnitudes: dips.iter().map(|&i| runs[i].value).collect(),
        local_peaks,
    }
}

/// `-2 loglik + 2k`.
pub fn aic(loglik: f64, k: usize) -> f64 {
    -2.0 * loglik + 2.0 * k as f64
}

/// Observed vs expected at one support position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub index: usize,
    pub value: u32,
    pub observed: f64,
    pub expected: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub model_kind: ModelKind,
    pub params: Option<FittedParams>,
    pub expected_counts: Vec<f64>,
    pub shape: ShapeSummary,
    pub loglik: f64,
    pub k: usize,
    pub aic: f64,
    pub max_abs_deviation: f64,
    /// One entry per support position inside an observed mode.
    pub at_modes: Vec<Deviation>,
    /// One entry per support position inside an observed lode.
    pub at_lodes: Vec<Deviation>,
}

impl ModelReport {
    /// Builds a report entry from an expected-count column.
    pub fn from_expected(
        model_kind: ModelKind,
        data: &FrequencyTable,
        expected_counts: Vec<f64>,
        loglik: f64,
        k: usize,
    ) -> Result<Self> {
        let support = data.support();
        if expected_counts.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                found: expected_counts.len(),
            });
        }
        let observed = data.counts_f64();
        let data_shape = detect_shape(&observed);
        let deviation = |i: usize| Deviation {
            index: i,
            value: support.value_at(i),
            observed: observed[i],
            expected: expected_counts[i],
            abs: (observed[i] - expected_counts[i]).abs(),
        };
        let at = |plateaus: &[Plateau]| -> Vec<Deviation> {
            plateaus
                .iter()
                .flat_map(|p| p.indices())
                .map(deviation)
                .collect()
        };
        let max_abs_deviation = (0..support.len())
            .map(|i| deviation(i).abs)
            .fold(0.0, f64::max);
        Ok(Self {
            model_kind,
            params: None,
            shape: detect_shape(&expected_counts),
            at_modes: at(&data_shape.modes),
            at_lodes: at(&data_shape.lodes),
            expected_counts,
            loglik,
            k,
            aic: aic(loglik, k),
            max_abs_deviation,
        })
    }

    pub fn from_fit(data: &FrequencyTable, fit: &FitResult) -> Result<Self> {
        check_support(&fit.support, data)?;
        let mut r = Self::from_expected(
            fit.model_kind,
            data,
            fit.expected_counts.clone(),
            fit.loglik,
            fit.k,
        )?;
        r.params = Some(fit.params);
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub data: FrequencyTable,
    pub data_shape: ShapeSummary,
    pub models: Vec<ModelReport>,
}

impl ComparisonReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model_kind == kind)
    }
}

/// Side-by-side evaluation of several fits against the same data.
pub fn compare(data: &FrequencyTable, fits: &[FitResult]) -> Result<ComparisonReport> {
    let models = fits
        .iter()
        .map(|f| ModelReport::from_fit(data, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        data: data.clone(),
        data_shape: detect_shape(&data.counts_f64()),
        models,
    })
}

/// Observed log-likelihood on a `(nu1, nu2)` grid, row-major by `nu1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub values: Vec<f64>,
}

impl Surface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nu2.len() + j]
    }

    /// `(nu1, nu2, loglik)` at the largest cell.
    pub fn max(&self) -> (f64, f64, f64) {
        let mut best = (self.nu1[0], self.nu2[0], f64::NEG_INFINITY);
        for (i, &a) in self.nu1.iter().enumerate() {
            for (j, &b) in self.nu2.iter().enumerate() {
                let v = self.get(i, j);
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        best
    }
}

pub fn loglik_surface(
    data: &FrequencyTable,
    p: f64,
    lambda1: f64,
    lambda2: f64,
    nu1: &[f64],
    nu2: &[f64],
) -> Result<Surface> {
    if nu1.is_empty() || nu2.is_empty() {
        return Err(Error::InvalidGrid("surface axes must be non-empty".into()));
    }
    // Validates p and both lambdas; nu values are checked per node below.
    MixtureParams::from_values(p, lambda1, 1.0, lambda2, 1.0)?;
    let support = data.support();
    let side = |weight: f64, lambda: f64, nus: &[f64]| -> Result<Vec<WeightedLogPmf>> {
        nus.iter()
            .map(|&nu| {
                let c = CmpParams::new(lambda, nu)?;
                Ok(WeightedLogPmf::new(
                    weight,
                    &crate::cmp::log_pmf_truncated(&c, support),
                ))
            })
            .collect()
    };
    let a = side(p, lambda1, nu1)?;
    let b = side(1.0 - p, lambda2, nu2)?;
    let counts = data.counts_f64();
    let mut values = vec![0.0; nu1.len() * nu2.len()];
    for (i, sa) in a.iter().enumerate() {
        for (j, sb) in b.iter().enumerate() {
            values[i * nu2.len() + j] = grouped_loglik(&counts, sa, sb);
        }
    }
    Ok(Surface {
        nu1: nu1.to_vec(),
        nu2: nu2.to_vec(),
        values,
    })
}
