//! File formats, configuration, reports and charts for fitting mixtures of
//! truncated Conway-Maxwell-Poisson distributions. The numerics live in
//! `cmpmix-core`; the `cmpmix` binary wraps both.

pub mod chart;
pub mod config;
pub mod dataset;
mod error;
pub mod report;
pub mod surface;

pub use chart::{svg_chart, text_chart, Overlay};
pub use config::{parse_config, read_config, write_config, FitConfig};
pub use dataset::{flip_order, parse_dataset, read_dataset, write_dataset, ReadOptions};
pub use error::{Error, Result};
pub use report::{ComparisonJson, FitReport, ShapeJson};
pub use surface::{parse_axis, surface_from_text, surface_to_text, SurfaceJson};
