//! Mixtures of two truncated Conway-Maxwell-Poisson (CMP) distributions.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerical side of
//! the project: the truncated CMP pmf, the two-component mixture, an EM
//! fitter whose M-step is an alternating grid search with refinement, the
//! truncated Poisson baselines, and shape (mode/lode) evaluation. File
//! formats, configuration and the command line live in the `cmpmix` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
#[macro_use]
extern crate std;

pub mod baselines;
pub mod cmp;
pub mod em;
mod error;
pub mod fixtures;
pub mod grid;
mod math;
pub mod mixture;
mod rng;
pub mod shape;
pub mod sim;

pub use crate::baselines::{fit_poisson_mixture, fit_single_poisson, poisson_start};
pub use crate::cmp::{
    classify_dispersion, log_normalizer_truncated, log_pmf_truncated, moments_truncated,
    pmf_truncated, pmf_untruncated, sample_pmf, sample_truncated, successive_ratio, CmpParams,
    DispersionClass, Support,
};
pub use crate::em::{
    em_fit, em_from_start, fit_single_cmp, init_peak_ratio, init_poisson, is_bimodal, m_step,
    m_step_lambdas, m_step_nus, update_p, EmConfig, FitResult, FittedParams, InitStrategy,
    ModelKind,
};
pub use crate::error::{Error, Result};
pub use crate::grid::{GridSpec, NuAxis, NuRegion};
pub use crate::mixture::{
    complete_loglik, mixture_pmf, observed_loglik, responsibilities, sample_mixture,
    FrequencyTable, MixtureParams, Responsibilities,
};
pub use crate::shape::{
    aic, compare, detect_shape, detect_shape_with, expected_counts, loglik_surface,
    ComparisonReport, Deviation, ModelReport, Plateau, ShapeSummary, Surface,
};
pub use crate::sim::{preset, presets, run_on_data, run_scenario, ScenarioPreset};
