//! JSON reports.

use cmpmix_core::{
    ComparisonReport, Deviation, FitResult, FittedParams, ModelReport, ShapeSummary, Support,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub p: f64,
    pub lambda1: f64,
    pub nu1: f64,
    /// Absent for single-component fits.
    pub lambda2: Option<f64>,
    pub nu2: Option<f64>,
}

impl From<&FittedParams> for ParamsJson {
    fn from(params: &FittedParams) -> Self {
        match params {
            FittedParams::Mixture(m) => Self {
                p: m.p(),
                lambda1: m.comp1().lambda(),
                nu1: m.comp1().nu(),
                lambda2: Some(m.comp2().lambda()),
                nu2: Some(m.comp2().nu()),
            },
            FittedParams::Single(c) => Self {
                p: 1.0,
                lambda1: c.lambda(),
                nu1: c.nu(),
                lambda2: None,
                nu2: None,
            },
        }
    }
}

/// One fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model_kind: String,
    pub params: ParamsJson,
    pub loglik: f64,
    pub aic: f64,
    pub k: usize,
    pub expected_counts: Vec<f64>,
    pub modes: Vec<Vec<u32>>,
    pub lodes: Vec<Vec<u32>>,
    pub converged: bool,
    pub iterations: usize,
    pub init_used: String,
}

impl FitReport {
    pub fn new(fit: &FitResult) -> Self {
        Self {
            model_kind: fit.model_kind.as_str().to_string(),
            params: ParamsJson::from(&fit.params),
            loglik: fit.loglik,
            aic: fit.aic,
            k: fit.k,
            expected_counts: fit.expected_counts.clone(),
            modes: fit.shape.mode_values(&fit.support),
            lodes: fit.shape.lode_values(&fit.support),
            converged: fit.converged,
            iterations: fit.iterations,
            init_used: fit.init_used.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeJson {
    pub modes: Vec<Vec<u32>>,
    pub lodes: Vec<Vec<u32>>,
    pub peak_magnitudes: Vec<f64>,
    pub dip_magnitudes: Vec<f64>,
    pub local_peaks: usize,
    pub bimodal: bool,
}

impl ShapeJson {
    pub fn new(shape: &ShapeSummary, support: &Support) -> Self {
        Self {
            modes: shape.mode_values(support),
            lodes: shape.lode_values(support),
            peak_magnitudes: shape.peak_magnitudes.clone(),
            dip_magnitudes: shape.dip_magnitudes.clone(),
            local_peaks: shape.local_peaks,
            bimodal: shape.is_bimodal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataJson {
    pub support: [u32; 2],
    pub counts: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationJson {
    pub value: u32,
    pub observed: f64,
    pub expected: f64,
    pub abs: f64,
}

impl From<&Deviation> for DeviationJson {
    fn from(d: &Deviation) -> Self {
        Self {
            value: d.value,
            observed: d.observed,
            expected: d.expected,
            abs: d.abs,
        }
    }
}

/// A fitted model plus its deviations from the observed counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    #[serde(flatten)]
    pub fit: FitReport,
    pub max_abs_deviation: f64,
    pub at_modes: Vec<DeviationJson>,
    pub at_lodes: Vec<DeviationJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub data: DataJson,
    pub data_shape: ShapeJson,
    pub models: Vec<ModelJson>,
}

impl ComparisonJson {
    /// `fits` must be the fits the report was built from, in the same order.
    pub fn new(report: &ComparisonReport, fits: &[FitResult]) -> Self {
        let support = report.data.support();
        let models = report
            .models
            .iter()
            .zip(fits)
            .map(|(m, f): (&ModelReport, &FitResult)| ModelJson {
                fit: FitReport::new(f),
                max_abs_deviation: m.max_abs_deviation,
                at_modes: m.at_modes.iter().map(DeviationJson::from).collect(),
                at_lodes: m.at_lodes.iter().map(DeviationJson::from).collect(),
            })
            .collect();
        Self {
            data: DataJson {
                support: [support.lower(), support.upper()],
                counts: report.data.counts().to_vec(),
                labels: report.data.labels().map(<[String]>::to_vec),
            },
            data_shape: ShapeJson::new(&report.data_shape, support),
            models,
        }
    }

    pub fn model(&self, kind: &str) -> Option<&ModelJson> {
        self.models.iter().find(|m| m.fit.model_kind == kind)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> crate::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
