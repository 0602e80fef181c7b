//! Truncated Poisson baselines: the same EM and grid machinery with both
//! nus pinned to one.

use crate::em::{
    build_result, fit_single, mass_near_first, run_em, two_peaks, EmConfig, FitResult,
    FittedParams, ModelKind,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mixture::{FrequencyTable, MixtureParams};

fn poisson_grid(grid: &GridSpec) -> GridSpec {
    grid.clone().with_fixed_nu(1.0)
}

/// Two-component truncated Poisson mixture, started from the two empirical
/// peaks (or the quartiles of the data when there is one peak).
pub fn fit_poisson_mixture(
    data: &FrequencyTable,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<FitResult> {
    config.validate()?;
    let grid = poisson_grid(grid);
    grid.validate()?;
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
    let start = poisson_start(data, &grid)?;
    let run = run_em(data, &start, &grid, config)?;
    let ll = *run.trace.last().expect("trace is never empty");
    Ok(build_result(
        data,
        FittedParams::Mixture(run.params),
        ModelKind::PoissonMixture,
        ll,
        run.trace,
        run.iterations,
        run.converged,
        "peaks",
        &grid,
        config,
    ))
}

/// Starting point of the Poisson mixture: lambdas at the two peaks (or the
/// data quartiles), `p` from the mass nearer the first.
pub fn poisson_start(data: &FrequencyTable, grid: &GridSpec) -> Result<MixtureParams> {
    if data.n() == 0 {
        return Err(Error::EmptyData);
    }
    let support = data.support();
    let (m1, m2) = two_peaks(data);
    let axis = grid.lambda_axis(support);
    let (c1, c2) = (m1.center(support), m2.center(support));
    let p = mass_near_first(data, c1, c2);
    MixtureParams::from_values(p, axis.clamp(c1), 1.0, axis.clamp(c2), 1.0)
}

/// Single truncated Poisson.
pub fn fit_single_poisson(data: &FrequencyTable, grid: &GridSpec) -> Result<FitResult> {
    fit_single(data, &poisson_grid(grid), ModelKind::SinglePoisson)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmp::{CmpParams, Support};
    use crate::fixtures;
    use crate::mixture::observed_loglik;

    #[test]
    fn poisson_mixture_on_ten_point() {
        let t = fixtures::ten_point();
        let fit = fit_poisson_mixture(&t, &GridSpec::default(), &EmConfig::default()).unwrap();
        assert_eq!(fit.k, 3);
        let m = fit.params.as_mixture();
        assert_eq!((m.comp1().nu(), m.comp2().nu()), (1.0, 1.0));
        // Truncated maximum likelihood, found independently by a simplex search.
        assert!((fit.loglik - -179.46).abs() < 0.05, "{}", fit.loglik);
        assert!((m.p() - 0.24).abs() < 0.03, "{}", m.p());
        assert!(m.comp1().lambda() < 0.5);
        assert!((m.comp2().lambda() - 13.73).abs() < 0.5);
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn poisson_mixture_on_five_point() {
        let fit = fit_poisson_mixture(
            &fixtures::five_point(),
            &GridSpec::default(),
            &EmConfig::default(),
        )
        .unwrap();
        assert!((fit.loglik - -150.78).abs() < 0.05, "{}", fit.loglik);
    }

    #[test]
    fn identical_lambdas_reduce_to_single_poisson() {
        let t = fixtures::five_point();
        let m = MixtureParams::from_values(0.3, 2.0, 1.0, 2.0, 1.0).unwrap();
        let single = MixtureParams::new(
            1.0,
            CmpParams::poisson(2.0).unwrap(),
            CmpParams::poisson(2.0).unwrap(),
        )
        .unwrap();
        let a = observed_loglik(&m, &t).unwrap();
        let b = observed_loglik(&single, &t).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn single_poisson_matches_mean_equation() {
        // The truncated Poisson MLE matches the truncated mean to the data mean.
        let t = fixtures::five_point();
        let fit = fit_single_poisson(&t, &GridSpec::default()).unwrap();
        let FittedParams::Single(c) = fit.params else {
            panic!("single fit")
        };
        assert_eq!(c.nu(), 1.0);
        let (mean, _) = crate::cmp::moments_truncated(&c, t.support());
        let data_mean = t
            .support()
            .values()
            .zip(t.counts())
            .map(|(x, &n)| f64::from(x) * n as f64)
            .sum::<f64>()
            / t.n() as f64;
        assert!((mean - data_mean).abs() < 1e-3, "{mean} vs {data_mean}");
    }

    #[test]
    fn poisson_errors() {
        let g = GridSpec::default();
        let c = EmConfig::default();
        let empty = FrequencyTable::from_counts(&[0, 0]).unwrap();
        assert_eq!(
            fit_poisson_mixture(&empty, &g, &c).unwrap_err(),
            Error::EmptyData
        );
        let one = FrequencyTable::new(Support::new(2, 2).unwrap(), vec![4]).unwrap();
        assert!(fit_poisson_mixture(&one, &g, &c).is_err());
    }
}
