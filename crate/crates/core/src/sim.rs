//! Named generator presets and regenerate-fit-compare runs.

use alloc::string::String;
use alloc::vec::Vec;

use crate::baselines::fit_poisson_mixture;
use crate::cmp::Support;
use crate::em::{em_fit, EmConfig};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mixture::{sample_mixture, FrequencyTable, MixtureParams};
use crate::shape::{compare, ComparisonReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub generator: MixtureParams,
    pub support: Support,
    pub n: u64,
}

impl ScenarioPreset {
    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn sample(&self, seed: u64) -> Result<FrequencyTable> {
        sample_mixture(&self.generator, &self.support, self.n, seed)
    }
}

fn make(
    name: &'static str,
    p: f64,
    c1: (f64, f64),
    c2: (f64, f64),
    upper: u32,
    n: u64,
) -> ScenarioPreset {
    ScenarioPreset {
        name,
        generator: MixtureParams::from_values(p, c1.0, c1.1, c2.0, c2.1)
            .expect("preset parameters are valid"),
        support: Support::new(1, upper).expect("preset support is valid"),
        n,
    }
}

/// Ten-point, five-point and two fifteen-point generator settings.
pub fn presets() -> Vec<ScenarioPreset> {
    alloc::vec![
        make("ten_point", 0.3, (1.0, 3.0), (8.0, 0.7), 10, 100),
        make("five_point", 0.3, (1.0, 1.5), (5.0, 0.7), 5, 100),
        make("fifteen_point_a", 0.8, (2.0, 0.5), (15.0, 0.7), 15, 1000),
        make("fifteen_point_b", 0.4, (1.0, 1.5), (15.0, 1.2), 15, 1000),
    ]
}

pub fn preset(name: &str) -> Result<ScenarioPreset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(String::from(name)))
}

/// Fits the Poisson mixture and the CMP model to `data` and compares them.
pub fn run_on_data(
    data: &FrequencyTable,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<ComparisonReport> {
    let poisson = fit_poisson_mixture(data, grid, config)?;
    let cmp = em_fit(data, grid, config)?;
    compare(data, &[poisson, cmp])
}

/// Samples from the preset's generator and runs [`run_on_data`].
pub fn run_scenario(
    preset: &ScenarioPreset,
    seed: u64,
    grid: &GridSpec,
    config: &EmConfig,
) -> Result<ComparisonReport> {
    let data = preset.sample(seed)?;
    run_on_data(&data, grid, config)
}
