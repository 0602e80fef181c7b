//! Flat `key = value` settings file for the grid and the EM loop.
//!
//! Keys mirror the `GridSpec` and `EmConfig` field names. `#` starts a
//! comment. The nu axis is either `nu_fixed = <value>` or
//! `nu_regions = [0,0.7] (0.7,1] (1,10]`, where `(` marks an open lower end.
//! `lambda_range = auto` means the default range tied to the support.

use std::fmt::Write as _;
use std::path::Path;

use cmpmix_core::{EmConfig, GridSpec, InitStrategy, NuAxis, NuRegion};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitConfig {
    pub grid: GridSpec,
    pub em: EmConfig,
}

pub fn read_config(path: impl AsRef<Path>) -> Result<FitConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn number<T: std::str::FromStr>(value: &str, line: u64) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {value:?}")))
}

fn parse_regions(value: &str, line: u64) -> Result<Vec<NuRegion>> {
    let mut regions = Vec::new();
    for token in value.split_whitespace() {
        let open = match token.chars().next() {
            Some('[') => false,
            Some('(') => true,
            _ => return Err(Error::parse(line, format!("bad nu region {token:?}"))),
        };
        let inner = token[1..]
            .strip_suffix(']')
            .ok_or_else(|| Error::parse(line, format!("bad nu region {token:?}")))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| Error::parse(line, format!("bad nu region {token:?}")))?;
        let (lo, hi) = (number(lo.trim(), line)?, number(hi.trim(), line)?);
        regions.push(if open {
            NuRegion::left_open(lo, hi)
        } else {
            NuRegion::closed(lo, hi)
        });
    }
    if regions.is_empty() {
        return Err(Error::parse(line, "nu_regions needs at least one region"));
    }
    Ok(regions)
}

fn parse_bool(value: &str, line: u64) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::parse(
            line,
            format!("expected true or false, found {value:?}"),
        )),
    }
}

pub fn parse_config(text: &str) -> Result<FitConfig> {
    let mut cfg = FitConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let grid = &mut cfg.grid;
        let em = &mut cfg.em;
        match key {
            "nu_regions" => grid.nu_axis = NuAxis::Regions(parse_regions(value, line)?),
            "nu_fixed" => grid.nu_axis = NuAxis::Fixed(number(value, line)?),
            "lambda_range" => {
                grid.lambda_range = if value == "auto" {
                    None
                } else {
                    let (lo, hi) = value
                        .split_once(',')
                        .ok_or_else(|| Error::parse(line, "expected lower,upper or auto"))?;
                    Some((number(lo.trim(), line)?, number(hi.trim(), line)?))
                }
            }
            "lambda_points" => grid.lambda_points = number(value, line)?,
            "points_per_region" => grid.points_per_region = number(value, line)?,
            "refinement_factor" => grid.refinement_factor = number(value, line)?,
            "min_spacing" => grid.min_spacing = number(value, line)?,
            "refine" => grid.refine = parse_bool(value, line)?,
            "max_em_iterations" => em.max_em_iterations = number(value, line)?,
            "loglik_rel_tol" => em.loglik_rel_tol = number(value, line)?,
            "inner_mstep_sweeps" => em.inner_mstep_sweeps = number(value, line)?,
            "p_clamp" => em.p_clamp = number(value, line)?,
            "lambda_closeness_threshold" => em.lambda_closeness_threshold = number(value, line)?,
            "init_strategies" => {
                em.init_strategies = value
                    .split(',')
                    .map(|s| {
                        InitStrategy::parse(s.trim()).ok_or_else(|| {
                            Error::parse(line, format!("unknown initialization {:?}", s.trim()))
                        })
                    })
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::parse(line, format!("unknown key {key:?}"))),
        }
    }
    cfg.grid.validate()?;
    cfg.em.validate()?;
    Ok(cfg)
}

/// Writes every key, so the output parses back to an equal value.
pub fn write_config(cfg: &FitConfig) -> String {
    let g = &cfg.grid;
    let e = &cfg.em;
    let mut out = String::new();
    match &g.nu_axis {
        NuAxis::Fixed(v) => writeln!(out, "nu_fixed = {v}"),
        NuAxis::Regions(regions) => {
            let parts: Vec<String> = regions
                .iter()
                .map(|r| {
                    let open = if r.lower_open { '(' } else { '[' };
                    format!("{open}{},{}]", r.lower, r.upper)
                })
                .collect();
            writeln!(out, "nu_regions = {}", parts.join(" "))
        }
    }
    .expect("writing to a String");
    let range = match g.lambda_range {
        None => "auto".to_string(),
        Some((lo, hi)) => format!("{lo},{hi}"),
    };
    let strategies: Vec<&str> = e.init_strategies.iter().map(|s| s.as_str()).collect();
    let _ = write!(
        out,
        "lambda_range = {range}\n\
         lambda_points = {}\n\
         points_per_region = {}\n\
         refinement_factor = {}\n\
         min_spacing = {}\n\
         refine = {}\n\
         max_em_iterations = {}\n\
         loglik_rel_tol = {}\n\
         inner_mstep_sweeps = {}\n\
         p_clamp = {}\n\
         lambda_closeness_threshold = {}\n\
         init_strategies = {}\n",
        g.lambda_points,
        g.points_per_region,
        g.refinement_factor,
        g.min_spacing,
        g.refine,
        e.max_em_iterations,
        e.loglik_rel_tol,
        e.inner_mstep_sweeps,
        e.p_clamp,
        e.lambda_closeness_threshold,
        strategies.join(","),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = FitConfig::default();
        let text = write_config(&cfg);
        assert!(text.contains("nu_regions = [0,0.7] (0.7,1] (1,10]"));
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn custom_round_trip() {
        let mut cfg = FitConfig::default();
        cfg.grid = cfg.grid.with_fixed_nu(1.0).without_refinement();
        cfg.grid.lambda_range = Some((0.1, 12.345678901234567));
        cfg.em.init_strategies = vec![InitStrategy::PeakRatio];
        cfg.em.loglik_rel_tol = 1e-10;
        assert_eq!(parse_config(&write_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg =
            parse_config("# coarse run\nlambda_points = 10 # fewer\n\nrefine=false\n").unwrap();
        assert_eq!(cfg.grid.lambda_points, 10);
        assert!(!cfg.grid.refine);
        assert_eq!(cfg.em, EmConfig::default());
    }

    #[test]
    fn errors() {
        let err = parse_config("lambda_points = 10\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_config("refine = yes\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_config("nu_regions = {0,1}\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_config("init_strategies = poisson,guess\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(matches!(
            parse_config("lambda_points = 1\n").unwrap_err(),
            Error::Model(_)
        ));
        assert!(parse_config("just text\n").is_err());
    }
}
