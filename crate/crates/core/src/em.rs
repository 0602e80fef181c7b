//! EM fitting of the two-component truncated CMP mixture.
//!
//! Each outer iteration computes responsibilities, re-estimates the mixing
//! weight as their count-weighted mean, then runs the M-step: alternating
//! grid searches over `(nu1, nu2)` with the lambdas fixed and over
//! `(lambda1, lambda2)` with the nus fixed. Every grid contains the current
//! point, so the observed log-likelihood never decreases.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::baselines::fit_poisson_mixture;
use crate::cmp::{log_pmf_truncated, CmpParams, Support};
use crate::error::{Error, Result};
use crate::grid::{maximize_2d, Axis, GridOptimum, GridSpec};
use crate::mixture::{
    grouped_loglik, mixture_pmf, observed_loglik, responsibilities, FrequencyTable, MixtureParams,
    Responsibilities, WeightedLogPmf,
};
use crate::shape::{aic, detect_shape, expected_counts, Plateau, ShapeSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InitStrategy {
    /// Poisson-mixture estimates, falling back to the peak locations when
    /// the two lambdas nearly coincide.
    Poisson,
    /// Poisson-mixture weight with lambdas at the two empirical peaks.
    Peaks,
    /// Lambdas at the peaks and nus from the peak/neighbour frequency ratio.
    PeakRatio,
}

impl InitStrategy {
    pub const ALL: [InitStrategy; 3] = [Self::Poisson, Self::Peaks, Self::PeakRatio];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Poisson => "poisson",
            Self::Peaks => "peaks",
            Self::PeakRatio => "peak_ratio",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_em_iterations: usize,
    pub loglik_rel_tol: f64,
    /// nu-step / lambda-step alternations per M-step.
    pub inner_mstep_sweeps: usize,
    pub p_clamp: f64,
    pub init_strategies: Vec<InitStrategy>,
    /// Poisson lambdas closer than this count as a failed separation.
    pub lambda_closeness_threshold: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_em_iterations: 500,
            loglik_rel_tol: 1e-8,
            inner_mstep_sweeps: 5,
            p_clamp: 1e-6,
            init_strategies: InitStrategy::ALL.to_vec(),
            lambda_closeness_threshold: 0.5,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.max_em_iterations == 0 || self.inner_mstep_sweeps == 0 {
            return bad("iteration limits must be positive");
        }
        if !(self.loglik_rel_tol > 0.0 && self.loglik_rel_tol < 1.0) {
            return bad("loglik_rel_tol must lie in (0, 1)");
        }
        if !(self.p_clamp > 0.0 && self.p_clamp < 0.5) {
            return bad("p_clamp must lie in (0, 0.5)");
        }
        if !(self.lambda_closeness_threshold > 0.0 && self.lambda_closeness_threshold.is_finite()) {
            return bad("lambda_closeness_threshold must be positive");
        }
        if self.init_strategies.is_empty() {
            return bad("at least one initialization strategy is required");
        }
        Ok(())
    }

    fn clamp_p(&self, p: f64) -> f64 {
        p.clamp(self.p_clamp, 1.0 - self.p_clamp)
    }

    fn converged(&self, old: f64, new: f64) -> bool {
        (new - old).abs() < self.loglik_rel_tol * old.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    CmpMixture,
    PoissonMixture,
    SingleCmp,
    SinglePoisson,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CmpMixture => "cmp_mixture",
            Self::PoissonMixture => "poisson_mixture",
            Self::SingleCmp => "single_cmp",
            Self::SinglePoisson => "single_poisson",
        }
    }

    /// Number of free parameters.
    pub fn k(&self) -> usize {
        match self {
            Self::CmpMixture => 5,
            Self::PoissonMixture => 3,
            Self::SingleCmp => 2,
            Self::SinglePoisson => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FittedParams {
    Mixture(MixtureParams),
    Single(CmpParams),
}

impl FittedParams {
    /// A single component is reported as a mixture with `p = 1`.
    pub fn as_mixture(&self) -> MixtureParams {
        match self {
            Self::Mixture(m) => *m,
            Self::Single(c) => MixtureParams::new(1.0, *c, *c).expect("p = 1 is valid"),
        }
    }

    pub fn pmf(&self, support: &Support) -> Vec<f64> {
        mixture_pmf(&self.as_mixture(), support)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: FittedParams,
    pub model_kind: ModelKind,
    pub support: Support,
    pub n: u64,
    pub loglik: f64,
    pub k: usize,
    pub aic: f64,
    pub expected_counts: Vec<f64>,
    pub shape: ShapeSummary,
    /// Observed log-likelihood at the start and after every outer iteration.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub init_used: &'static str,
    pub grid: GridSpec,
    pub config: EmConfig,
    /// The Poisson-mixture benchmark fitted alongside a CMP mixture.
    pub benchmark: Option<Box<FitResult>>,
    /// The benchmark reached a higher log-likelihood than the CMP mixture.
    pub benchmark_superior: bool,
}

impl FitResult {
    pub fn pmf(&self) -> Vec<f64> {
        self.params.pmf(&self.support)
    }
}

pub(crate) struct EmRun {
    pub params: MixtureParams,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_result(
    data: &FrequencyTable,
    params: FittedParams,
    model_kind: ModelKind,
    loglik: f64,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    init_used: &'static str,
    grid: &GridSpec,
    config: &EmConfig,
) -> FitResult {
    let support = *data.support();
    let params = match params {
        FittedParams::Mixture(m) => FittedParams::Mixture(m.canonical(&support)),
        single => single,
    };
    let expected = expected_counts(&params.pmf(&support), data.n());
    let k = model_kind.k();
    FitResult {
        params,
        model_kind,
        support,
        n: data.n(),
        loglik,
        k,
        aic: aic(loglik, k),
        shape: detect_shape(&expected),
        expected_counts: expected,
        loglik_trace: trace,
        iterations,
        converged,
        init_used,
        grid: grid.clone(),
        config: config.clone(),
        benchmark: None,
        benchmark_superior: false,
    }
}

/// Count-weighted mean responsibility, clamped to `[p_clamp, 1 - p_clamp]`.
pub fn update_p(resp: &Responsibilities, data: &FrequencyTable, p_clamp: f64) -> Result<f64> {
    let n = data.n();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if resp.values().len() != data.counts().len() {
        return Err(Error::LengthMismatch {
            expected: data.counts().len(),
            found: resp.values().len(),
        });
    }
    let total: f64 = resp
        .values()
        .iter()
        .zip(data.counts())
        .map(|(y, &c)| y * c as f64)
        .sum();
    Ok((total / n as f64).clamp(p_clamp, 1.0 - p_clamp))
}

fn component(lambda: f64, nu: f64) -> CmpParams {
    CmpParams::new(lambda, nu).expect("grid nodes are valid CMP parameters")
}

/// Grid search over `(nu1, nu2)` with `p` and both lambdas held at `current`.
/// Returns `(nu1, nu2, loglik)`.
pub fn m_step_nus(
    data: &FrequencyTable,
    current: &MixtureParams,
    grid: &GridSpec,
) -> Result<(f64, f64, f64)> {
    let support = data.support();
    let counts = data.counts_f64();
    let (p, l1, l2) = (
        current.p(),
        current.comp1().lambda(),
        current.comp2().lambda(),
    );
    let axis = grid.nu_axis();
    let start = (current.comp1().nu(), current.comp2().nu());
    let best = maximize_2d(&axis, &axis, start, grid, |a, b, out| {
        let side = |w: f64, lambda: f64, nus: &[f64]| -> Vec<WeightedLogPmf> {
            nus.iter()
                .map(|&nu| {
                    WeightedLogPmf::new(w, &log_pmf_truncated(&component(lambda, nu), support))
                })
                .collect()
        };
        let sa = side(p, l1, a);
        let sb = side(1.0 - p, l2, b);
        for x in &sa {
            for y in &sb {
                out.push(grouped_loglik(&counts, x, y));
            }
        }
    });
    Ok((best.a, best.b, best.value))
}

/// Grid search over `(lambda1, lambda2)` with `p` and both nus held at
/// `current`. Returns `(lambda1, lambda2, loglik)`.
pub fn m_step_lambdas(
    data: &FrequencyTable,
    current: &MixtureParams,
    grid: &GridSpec,
) -> Result<(f64, f64, f64)> {
    let support = data.support();
    let counts = data.counts_f64();
    let (p, n1, n2) = (current.p(), current.comp1().nu(), current.comp2().nu());
    let axis = grid.lambda_axis(support);
    let start = (current.comp1().lambda(), current.comp2().lambda());
    let best = maximize_2d(&axis, &axis, start, grid, |a, b, out| {
        let side = |w: f64, nu: f64, lambdas: &[f64]| -> Vec<WeightedLogPmf> {
            lambdas
                .iter()
                .map(|&l| WeightedLogPmf::new(w, &log_pmf_truncated(&component(l, nu), support)))
                .collect()
        };
        let sa = side(p, n1, a);
        let sb = side(1.0 - p, n2, b);
        for x in &sa {
            for y in &sb {
                out.push(grouped_loglik(&counts, x, y));
            }
        }
    });
    Ok((best.a, best.b, best.value))
}

/// Alternating nu-step / lambda-step sweeps at fixed `p`.
pub fn m_step(
    data: &FrequencyTable,
    current: &MixtureParams,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<MixtureParams> {
    let mut params = *current;
    let mut ll = observed_loglik(&params, data)?;
    for _ in 0..config.inner_mstep_sweeps {
        let (nu1, nu2, _) = m_step_nus(data, &params, grid)?;
        params = params.with_components(
            component(params.comp1().lambda(), nu1),
            component(params.comp2().lambda(), nu2),
        );
        let (l1, l2, ll_new) = m_step_lambdas(data, &params, grid)?;
        params = params.with_components(component(l1, nu1), component(l2, nu2));
        let gain = ll_new - ll;
        ll = ll_new;
        if gain < config.loglik_rel_tol * ll.abs().max(1.0) {
            break;
        }
    }
    Ok(params)
}

/// EM iterations from a fixed starting point.
pub(crate) fn run_em(
    data: &FrequencyTable,
    start: &MixtureParams,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<EmRun> {
    let mut params = start.with_p(config.clamp_p(start.p()));
    let mut ll = observed_loglik(&params, data)?;
    let mut trace = alloc::vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=config.max_em_iterations {
        let resp = responsibilities(&params, data)?;
        params = params.with_p(update_p(&resp, data, config.p_clamp)?);
        params = m_step(data, &params, grid, config)?;
        let ll_new = observed_loglik(&params, data)?;
        trace.push(ll_new);
        iterations = it;
        let done = config.converged(ll, ll_new);
        ll = ll_new;
        if done {
            converged = true;
            break;
        }
    }
    Ok(EmRun {
        params,
        trace,
        iterations,
        converged,
    })
}

/// Runs EM from `start` and reports it as a CMP mixture fit.
pub fn em_from_start(
    data: &FrequencyTable,
    start: &MixtureParams,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<FitResult> {
    grid.validate()?;
    config.validate()?;
    if data.n() == 0 {
        return Err(Error::EmptyData);
    }
    let run = run_em(data, start, grid, config)?;
    let ll = *run.trace.last().expect("trace is never empty");
    Ok(build_result(
        data,
        FittedParams::Mixture(run.params),
        ModelKind::CmpMixture,
        ll,
        run.trace,
        run.iterations,
        run.converged,
        "custom",
        grid,
        config,
    ))
}

/// True when the data shows at least two local peaks.
pub fn is_bimodal(data: &FrequencyTable) -> bool {
    detect_shape(&data.counts_f64()).is_bimodal()
}

/// Two peak plateaus of the data, left to right. Falls back to the support
/// values at the 25% and 75% cumulative-mass points when there is only one.
pub(crate) fn two_peaks(data: &FrequencyTable) -> (Plateau, Plateau) {
    let shape = detect_shape(&data.counts_f64());
    if let [a, b] = shape.modes[..] {
        return (a, b);
    }
    let n = data.n() as f64;
    let quantile = |q: f64| {
        let mut acc = 0.0;
        for (i, &c) in data.counts().iter().enumerate() {
            acc += c as f64;
            if acc >= q * n && c > 0 {
                return i;
            }
        }
        data.counts().len() - 1
    };
    let lo = quantile(0.25);
    let mut hi = quantile(0.75);
    if hi == lo {
        hi = if lo + 1 < data.counts().len() {
            lo + 1
        } else {
            lo - 1
        };
    }
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    (
        Plateau { start: lo, end: lo },
        Plateau { start: hi, end: hi },
    )
}

/// Share of the data closer (in support distance) to the first peak than to
/// the second; equidistant cells are split evenly.
pub(crate) fn mass_near_first(data: &FrequencyTable, first: f64, second: f64) -> f64 {
    let support = data.support();
    let n = data.n() as f64;
    if n == 0.0 {
        return 0.5;
    }
    let mut share = 0.0;
    for (i, &c) in data.counts().iter().enumerate() {
        let x = f64::from(support.value_at(i));
        let (d1, d2) = ((x - first).abs(), (x - second).abs());
        share += c as f64
            * if d1 < d2 {
                1.0
            } else if d1 == d2 {
                0.5
            } else {
                0.0
            };
    }
    share / n
}

/// Peak locations as lambdas, clamped into the grid's lambda range.
fn peak_lambdas(data: &FrequencyTable, grid: &GridSpec) -> (f64, f64, Plateau, Plateau) {
    let (m1, m2) = two_peaks(data);
    let axis = grid.lambda_axis(data.support());
    let support = data.support();
    (
        axis.clamp(m1.center(support)),
        axis.clamp(m2.center(support)),
        m1,
        m2,
    )
}

fn from_poisson_fit(
    data: &FrequencyTable,
    poisson: &FitResult,
    grid: &GridSpec,
    config: &EmConfig,
    keep_lambdas: bool,
) -> MixtureParams {
    let fitted = poisson.params.as_mixture();
    let (l1, l2) = if keep_lambdas
        && (fitted.comp1().lambda() - fitted.comp2().lambda()).abs()
            >= config.lambda_closeness_threshold
    {
        (fitted.comp1().lambda(), fitted.comp2().lambda())
    } else {
        let (a, b, _, _) = peak_lambdas(data, grid);
        (a, b)
    };
    MixtureParams::new(
        config.clamp_p(fitted.p()),
        component(l1, 1.0),
        component(l2, 1.0),
    )
    .expect("clamped weight is valid")
}

/// Start from the Poisson-mixture estimates with `nu1 = nu2 = 1`.
pub fn init_poisson(
    data: &FrequencyTable,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<MixtureParams> {
    let poisson = fit_poisson_mixture(data, grid, config)?;
    Ok(from_poisson_fit(data, &poisson, grid, config, true))
}

/// `nu` from the ratio law `pmf(x-1)/pmf(x) = x^nu / lambda`, using the
/// observed counts at the peak and its inward neighbour.
fn ratio_nu(data: &FrequencyTable, lambda: f64, peak: usize, neighbour: usize, nu_max: f64) -> f64 {
    let (lo, hi) = (peak.min(neighbour), peak.max(neighbour));
    let x = f64::from(data.support().value_at(hi));
    if x <= 1.0 {
        return 1.0;
    }
    let count = |i: usize| match data.counts()[i] {
        0 => 0.5,
        c => c as f64,
    };
    let nu = (libm::log(lambda) + libm::log(count(lo) / count(hi))) / libm::log(x);
    nu.clamp(0.0, nu_max)
}

/// Lambdas at the two peaks, nus from the peak/neighbour count ratios, and
/// `p` from the mass nearer the first peak.
pub fn init_peak_ratio(
    data: &FrequencyTable,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<MixtureParams> {
    if data.n() == 0 {
        return Err(Error::EmptyData);
    }
    let (l1, l2, m1, m2) = peak_lambdas(data, grid);
    let last = data.counts().len() - 1;
    let nu_max = grid.nu_max();
    // First peak looks right (towards the second), second peak looks left.
    let nu1 = if m1.end < last {
        ratio_nu(data, l1, m1.end, m1.end + 1, nu_max)
    } else {
        ratio_nu(data, l1, m1.start, m1.start.saturating_sub(1), nu_max)
    };
    let nu2 = if m2.start > 0 {
        ratio_nu(data, l2, m2.start, m2.start - 1, nu_max)
    } else {
        ratio_nu(data, l2, m2.end, (m2.end + 1).min(last), nu_max)
    };
    let support = data.support();
    let p = mass_near_first(data, m1.center(support), m2.center(support));
    MixtureParams::new(config.clamp_p(p), component(l1, nu1), component(l2, nu2))
}

/// Full EM fit with multi-start initialization and a Poisson benchmark.
/// Data with a single peak gets a single truncated CMP instead.
pub fn em_fit(data: &FrequencyTable, grid: &GridSpec, config: &EmConfig) -> Result<FitResult> {
    grid.validate()?;
    config.validate()?;
    if data.n() == 0 {
        return Err(Error::EmptyData);
    }
    let support = data.support();
    if support.len() < 2 {
        return Err(Error::InvalidSupport {
            lower: support.lower(),
            upper: support.upper(),
        });
    }
    if !is_bimodal(data) {
        return fit_single_cmp(data, grid);
    }

    let poisson = fit_poisson_mixture(data, grid, config)?;
    let mut strategies = config.init_strategies.clone();
    strategies.sort_unstable();
    strategies.dedup();

    let mut best: Option<(EmRun, InitStrategy)> = None;
    for strategy in strategies {
        let start = match strategy {
            InitStrategy::Poisson => from_poisson_fit(data, &poisson, grid, config, true),
            InitStrategy::Peaks => from_poisson_fit(data, &poisson, grid, config, false),
            InitStrategy::PeakRatio => init_peak_ratio(data, grid, config)?,
        };
        let run = run_em(data, &start, grid, config)?;
        let better = match &best {
            None => true,
            Some((b, _)) => run.trace.last() > b.trace.last(),
        };
        if better {
            best = Some((run, strategy));
        }
    }
    let (run, strategy) = best.expect("at least one strategy ran");
    let ll = *run.trace.last().expect("trace is never empty");
    let mut result = build_result(
        data,
        FittedParams::Mixture(run.params),
        ModelKind::CmpMixture,
        ll,
        run.trace,
        run.iterations,
        run.converged,
        strategy.as_str(),
        grid,
        config,
    );
    result.benchmark_superior = poisson.loglik > result.loglik;
    result.benchmark = Some(Box::new(poisson));
    Ok(result)
}

/// Single-component maximum likelihood over a refined `(lambda, nu)` grid.
pub(crate) fn fit_single(
    data: &FrequencyTable,
    grid: &GridSpec,
    kind: ModelKind,
) -> Result<FitResult> {
    grid.validate()?;
    let n = data.n();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let support = data.support();
    let counts = data.counts_f64();
    let lambda_axis = grid.lambda_axis(support);
    let nu_axis = grid.nu_axis();
    let mean = support
        .values()
        .zip(&counts)
        .map(|(x, c)| f64::from(x) * c)
        .sum::<f64>()
        / n as f64;
    let start = (lambda_axis.clamp(mean), nu_axis.clamp(1.0));
    let loglik_at = |l: f64, nu: f64| -> f64 {
        let lf = log_pmf_truncated(&component(l, nu), support);
        counts
            .iter()
            .zip(&lf)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, l)| c * l)
            .sum()
    };
    // The log-likelihood is jointly concave in (ln lambda, nu), so a refined
    // search over nu of the lambda-profiled likelihood reaches the optimum
    // even where the two parameters trade off along a narrow ridge.
    let point = Axis::point(0.0);
    let best_lambda = |nu: f64| {
        maximize_2d(&lambda_axis, &point, (start.0, 0.0), grid, |ls, _, out| {
            out.extend(ls.iter().map(|&l| loglik_at(l, nu)))
        })
    };
    let mut profile_cache: Vec<(f64, f64)> = Vec::new();
    let best_nu = maximize_2d(&nu_axis, &point, (start.1, 0.0), grid, |nus, _, out| {
        for &nu in nus {
            let b = best_lambda(nu);
            profile_cache.push((nu, b.a));
            out.push(b.value);
        }
    });
    let lambda = profile_cache
        .iter()
        .find(|(nu, _)| *nu == best_nu.a)
        .map(|(_, l)| *l)
        .expect("optimum was evaluated");
    let best = GridOptimum {
        a: lambda,
        b: best_nu.a,
        value: best_nu.value,
    };
    let config = EmConfig::default();
    Ok(build_result(
        data,
        FittedParams::Single(component(best.a, best.b)),
        kind,
        best.value,
        alloc::vec![best.value],
        1,
        true,
        "single",
        grid,
        &config,
    ))
}

/// Single truncated CMP, used when the data has one peak.
pub fn fit_single_cmp(data: &FrequencyTable, grid: &GridSpec) -> Result<FitResult> {
    fit_single(data, grid, ModelKind::SingleCmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmp::pmf_truncated;
    use crate::fixtures;
    use crate::grid::{NuAxis, NuRegion};

    fn mix(p: f64, l1: f64, n1: f64, l2: f64, n2: f64) -> MixtureParams {
        MixtureParams::from_values(p, l1, n1, l2, n2).unwrap()
    }

    #[test]
    fn update_p_examples() {
        let t = FrequencyTable::from_counts(&[2, 8]).unwrap();
        let p = update_p(&Responsibilities::new(vec![1.0, 1.0]), &t, 1e-6).unwrap();
        assert_eq!(p, 1.0 - 1e-6);
        let p = update_p(&Responsibilities::new(vec![0.5, 0.5]), &t, 1e-6).unwrap();
        assert_eq!(p, 0.5);
        let p = update_p(&Responsibilities::new(vec![1.0, 0.0]), &t, 1e-6).unwrap();
        assert!((p - 0.2).abs() < 1e-15);
        let empty = FrequencyTable::from_counts(&[0, 0]).unwrap();
        assert_eq!(
            update_p(&Responsibilities::new(vec![0.5, 0.5]), &empty, 1e-6),
            Err(Error::EmptyData)
        );
    }

    #[test]
    fn eq7_update_maximizes_complete_loglik_in_p() {
        let t = fixtures::ten_point();
        let m = mix(0.4, 1.5, 2.0, 8.0, 0.9);
        let resp = responsibilities(&m, &t).unwrap();
        let p_hat = update_p(&resp, &t, 1e-9).unwrap();
        let at = |p: f64| crate::mixture::complete_loglik(&m.with_p(p), &t, &resp).unwrap();
        for dp in [-0.05, -0.01, -1e-4, 1e-4, 0.01, 0.05] {
            assert!(at(p_hat) >= at(p_hat + dp));
        }
    }

    /// Exact, on-grid data: counts proportional to a pmf whose nus are
    /// grid nodes.
    fn exact_data(m: &MixtureParams, support: Support, scale: f64) -> FrequencyTable {
        let pmf = mixture_pmf(m, &support);
        FrequencyTable::new(
            support,
            pmf.iter().map(|p| libm::round(p * scale) as u64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn nu_step_recovers_exact_grid_nodes() {
        let s = Support::new(1, 10).unwrap();
        let truth = mix(0.3, 1.0, 3.25, 8.0, 0.7);
        let data = exact_data(&truth, s, 1e9);
        let start = mix(0.3, 1.0, 1.0, 8.0, 1.0);
        let (n1, n2, _) = m_step_nus(&data, &start, &GridSpec::default()).unwrap();
        assert!((n1 - 3.25).abs() < 2e-3, "{n1}");
        assert!((n2 - 0.7).abs() < 2e-3, "{n2}");
    }

    #[test]
    fn lambda_step_recovers_exact_nodes() {
        let s = Support::new(1, 10).unwrap();
        let truth = mix(0.3, 1.0, 3.0, 8.0, 0.7);
        let data = exact_data(&truth, s, 1e9);
        let start = mix(0.3, 2.0, 3.0, 5.0, 0.7);
        let (l1, l2, _) = m_step_lambdas(&data, &start, &GridSpec::default()).unwrap();
        assert!((l1 - 1.0).abs() < 5e-3, "{l1}");
        assert!((l2 - 8.0).abs() < 5e-3, "{l2}");
    }

    #[test]
    fn ten_point_partial_steps_land_near_reported_values() {
        let t = fixtures::ten_point();
        let g = GridSpec::default();
        let (n1, n2, _) = m_step_nus(&t, &mix(0.24, 1.13, 1.0, 9.0, 1.0), &g).unwrap();
        // Loose: the likelihood is flat along ridges; the reported values are
        // two-decimal roundings of another optimizer's output.
        assert!((n1 - 3.75).abs() < 0.5, "nu1 {n1}");
        assert!((n2 - 0.8).abs() < 0.1, "nu2 {n2}");
        let (l1, l2, _) = m_step_lambdas(&t, &mix(0.24, 1.0, 3.75, 5.0, 0.8), &g).unwrap();
        assert!((l1 - 1.13).abs() < 0.3, "lambda1 {l1}");
        assert!((l2 - 9.0).abs() < 1.0, "lambda2 {l2}");
    }

    #[test]
    fn m_step_never_decreases_and_keeps_grid_maxima() {
        let t = fixtures::ten_point();
        let g = GridSpec::default();
        let c = EmConfig::default();
        let start = mix(0.3, 1.0, 1.0, 10.0, 1.0);
        let before = observed_loglik(&start, &t).unwrap();
        let once = m_step(
            &t,
            &start,
            &g,
            &EmConfig {
                inner_mstep_sweeps: 1,
                ..c.clone()
            },
        )
        .unwrap();
        let after = observed_loglik(&once, &t).unwrap();
        assert!(after > before);
        assert_eq!(once.p(), start.p());

        let full = m_step(&t, &start, &g, &c).unwrap();
        let again = m_step(
            &t,
            &full,
            &g,
            &EmConfig {
                inner_mstep_sweeps: 1,
                ..c
            },
        )
        .unwrap();
        assert!(
            observed_loglik(&again, &t).unwrap() >= observed_loglik(&full, &t).unwrap() - 1e-12
        );
    }

    #[test]
    fn m_step_on_flat_data_terminates() {
        let t = FrequencyTable::from_counts(&[10; 6]).unwrap();
        let out = m_step(
            &t,
            &mix(0.5, 1.0, 1.0, 5.0, 1.0),
            &GridSpec::default(),
            &EmConfig::default(),
        );
        assert!(out.is_ok());
    }

    fn coarse_grid() -> GridSpec {
        GridSpec {
            nu_axis: NuAxis::Regions(vec![NuRegion::closed(0.0, 4.0)]),
            lambda_range: Some((0.5, 12.5)),
            lambda_points: 5,
            points_per_region: 5,
            ..GridSpec::default()
        }
        .without_refinement()
    }

    #[test]
    fn coarse_grid_matches_enumeration() {
        let t = fixtures::ten_point();
        let g = coarse_grid();
        let nus = [0.0, 1.0, 2.0, 3.0, 4.0];
        let lambdas = [0.5, 3.5, 6.5, 9.5, 12.5];
        let current = mix(0.3, 3.5, 1.0, 9.5, 1.0);
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for a in nus {
            for b in nus {
                let ll = observed_loglik(&mix(0.3, 3.5, a, 9.5, b), &t).unwrap();
                if ll > best.0 {
                    best = (ll, a, b);
                }
            }
        }
        let (n1, n2, ll) = m_step_nus(&t, &current, &g).unwrap();
        assert_eq!((n1, n2), (best.1, best.2));
        assert!((ll - best.0).abs() < 1e-12);

        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for a in lambdas {
            for b in lambdas {
                let ll = observed_loglik(&mix(0.3, a, 1.0, b, 1.0), &t).unwrap();
                if ll > best.0 {
                    best = (ll, a, b);
                }
            }
        }
        let (l1, l2, _) = m_step_lambdas(&t, &current, &g).unwrap();
        assert_eq!((l1, l2), (best.1, best.2));
    }

    #[test]
    fn bimodality_checks() {
        assert!(is_bimodal(&fixtures::ten_point()));
        assert!(!is_bimodal(
            &FrequencyTable::from_counts(&[1, 2, 3, 4, 5]).unwrap()
        ));
        assert!(!is_bimodal(&FrequencyTable::from_counts(&[7; 5]).unwrap()));
    }

    #[test]
    fn peak_ratio_examples() {
        let g = GridSpec::default();
        let c = EmConfig::default();
        // Peak at 1 with counts(1)/counts(2) = 11, second peak at 5.
        let t = FrequencyTable::from_counts(&[22, 2, 1, 3, 9]).unwrap();
        let m = init_peak_ratio(&t, &g, &c).unwrap();
        assert_eq!(m.comp1().lambda(), 1.0);
        assert!((m.comp1().nu() - libm::log(11.0) / libm::log(2.0)).abs() < 1e-12);
        assert_eq!(m.comp2().lambda(), 5.0);
        let nu2 = (libm::log(5.0) + libm::log(3.0 / 9.0)) / libm::log(5.0);
        assert!((m.comp2().nu() - nu2).abs() < 1e-12);
        // Mass nearer 1 than 5: values 1, 2 and half of 3.
        assert!((m.p() - (22.0 + 2.0 + 0.5) / 37.0).abs() < 1e-12);

        // Flat neighbourhood: ratio 1 gives ln(lambda) / ln(x).
        let t = FrequencyTable::from_counts(&[5, 1, 6, 6, 2]).unwrap();
        let m = init_peak_ratio(&t, &g, &c).unwrap();
        assert_eq!(m.comp2().lambda(), 3.5);

        // Zero neighbour count is replaced by 0.5.
        let t = FrequencyTable::from_counts(&[22, 0, 1, 3, 9]).unwrap();
        let m = init_peak_ratio(&t, &g, &c).unwrap();
        assert!((m.comp1().nu() - libm::log(44.0) / libm::log(2.0)).abs() < 1e-12);
    }

    #[test]
    fn flat_neighbourhood_ratio() {
        let t = FrequencyTable::from_counts(&[1, 4, 4, 1, 9]).unwrap();
        let nu = ratio_nu(&t, 2.0, 1, 2, 10.0);
        assert!((nu - libm::log(2.0) / libm::log(3.0)).abs() < 1e-12);
    }

    #[test]
    fn poisson_init_on_ten_point() {
        let t = fixtures::ten_point();
        let m = init_poisson(&t, &GridSpec::default(), &EmConfig::default()).unwrap();
        assert_eq!((m.comp1().nu(), m.comp2().nu()), (1.0, 1.0));
        assert!(m.comp1().lambda() < 1.0 && m.comp2().lambda() > 10.0);
        assert!(m.p() > 0.15 && m.p() < 0.4);
    }

    #[test]
    fn poisson_init_falls_back_to_peaks_when_lambdas_coincide() {
        let t = fixtures::ten_point();
        let g = GridSpec::default();
        let c = EmConfig {
            lambda_closeness_threshold: 1e6,
            ..EmConfig::default()
        };
        let m = init_poisson(&t, &g, &c).unwrap();
        assert_eq!((m.comp1().lambda(), m.comp2().lambda()), (1.0, 10.0));
    }

    #[test]
    fn poisson_init_symmetric_counts() {
        let t = FrequencyTable::from_counts(&[10, 1, 10]).unwrap();
        let m = init_poisson(&t, &GridSpec::default(), &EmConfig::default()).unwrap();
        assert!((m.comp1().lambda() - m.comp2().lambda()).abs() > 0.5);
    }

    #[test]
    fn single_cmp_recovers_exact_poisson() {
        let s = Support::new(1, 5).unwrap();
        let pmf = pmf_truncated(&component(2.0, 1.0), &s);
        let t = FrequencyTable::new(s, pmf.iter().map(|p| libm::round(p * 1e8) as u64).collect())
            .unwrap();
        let fit = fit_single_cmp(&t, &GridSpec::default()).unwrap();
        let FittedParams::Single(c) = fit.params else {
            panic!("single fit")
        };
        assert!((c.lambda() - 2.0).abs() < 5e-3, "{}", c.lambda());
        assert!((c.nu() - 1.0).abs() < 5e-3, "{}", c.nu());
        assert_eq!(fit.k, 2);
        assert_eq!(fit.model_kind, ModelKind::SingleCmp);
    }

    #[test]
    fn single_point_support_takes_smallest_node() {
        let t = FrequencyTable::new(Support::new(1, 1).unwrap(), vec![12]).unwrap();
        let fit = fit_single_cmp(&t, &GridSpec::default()).unwrap();
        let FittedParams::Single(c) = fit.params else {
            panic!("single fit")
        };
        assert_eq!((c.lambda(), c.nu()), (0.05, 0.0));
        assert_eq!(fit.loglik, 0.0);
    }

    #[test]
    fn single_cmp_on_sampled_poisson() {
        let s = Support::new(1, 10).unwrap();
        let t = crate::cmp::sample_truncated(&component(4.0, 1.0), &s, 200_000, 8).unwrap();
        let fit = fit_single_cmp(&t, &GridSpec::default()).unwrap();
        let FittedParams::Single(c) = fit.params else {
            panic!("single fit")
        };
        assert!((c.nu() - 1.0).abs() < 0.05, "{}", c.nu());
    }

    #[test]
    fn unimodal_data_routes_to_single_cmp() {
        let t = FrequencyTable::from_counts(&[3, 9, 14, 8, 2]).unwrap();
        let fit = em_fit(&t, &GridSpec::default(), &EmConfig::default()).unwrap();
        assert_eq!(fit.model_kind, ModelKind::SingleCmp);
        assert!(fit.benchmark.is_none());
    }

    #[test]
    fn em_fit_errors() {
        let g = GridSpec::default();
        let c = EmConfig::default();
        let empty = FrequencyTable::from_counts(&[0, 0, 0]).unwrap();
        assert_eq!(em_fit(&empty, &g, &c).unwrap_err(), Error::EmptyData);
        let bad = EmConfig {
            init_strategies: Vec::new(),
            ..EmConfig::default()
        };
        assert!(em_fit(&fixtures::ten_point(), &g, &bad).is_err());
    }

    #[test]
    fn em_fit_ten_point() {
        let t = fixtures::ten_point();
        let fit = em_fit(&t, &GridSpec::default(), &EmConfig::default()).unwrap();
        assert_eq!(fit.model_kind, ModelKind::CmpMixture);
        assert_eq!(fit.k, 5);
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        assert!((fit.expected_counts.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        assert!((fit.aic - (-2.0 * fit.loglik + 10.0)).abs() < 1e-12);
        let bench = fit.benchmark.as_ref().unwrap();
        assert_eq!(fit.benchmark_superior, bench.loglik > fit.loglik);
        if !fit.benchmark_superior {
            assert!(fit.loglik >= bench.loglik);
        }
        let modes = fit.shape.mode_values(&fit.support);
        assert_eq!(modes, [vec![1], vec![10]]);
    }
}
