//! Log-likelihood surface files.
//!
//! Text layout: a comment line, then `nu1:` and `nu2:` lines listing the
//! axes, then one whitespace-separated row of values per `nu1` node.

use std::fmt::Write as _;

use cmpmix_core::Surface;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn surface_to_text(s: &Surface) -> String {
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let mut out = String::from("# observed log-likelihood; rows follow nu1, columns follow nu2\n");
    let _ = writeln!(out, "nu1: {}", join(&s.nu1));
    let _ = writeln!(out, "nu2: {}", join(&s.nu2));
    for row in s.values.chunks(s.nu2.len()) {
        let _ = writeln!(out, "{}", join(row));
    }
    out
}

fn floats(text: &str, line: u64) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(line, format!("cannot parse {t:?}")))
        })
        .collect()
}

pub fn surface_from_text(text: &str) -> Result<Surface> {
    let mut nu1 = None;
    let mut nu2 = None;
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some(rest) = content.strip_prefix("nu1:") {
            nu1 = Some(floats(rest, line)?);
        } else if let Some(rest) = content.strip_prefix("nu2:") {
            nu2 = Some(floats(rest, line)?);
        } else {
            let width = nu2
                .as_ref()
                .map(Vec::len)
                .ok_or_else(|| Error::parse(line, "value row before the nu1/nu2 axis lines"))?;
            let row = floats(content, line)?;
            if row.len() != width {
                return Err(Error::parse(
                    line,
                    format!("expected {width} values, found {}", row.len()),
                ));
            }
            values.extend(row);
            rows += 1;
        }
    }
    let (Some(nu1), Some(nu2)) = (nu1, nu2) else {
        return Err(Error::parse(1, "missing nu1 or nu2 axis line"));
    };
    if rows != nu1.len() {
        return Err(Error::parse(
            text.lines().count() as u64,
            format!("expected {} rows, found {rows}", nu1.len()),
        ));
    }
    Ok(Surface { nu1, nu2, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceJson {
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    /// `values[i][j]` is at `(nu1[i], nu2[j])`.
    pub values: Vec<Vec<f64>>,
}

impl From<&Surface> for SurfaceJson {
    fn from(s: &Surface) -> Self {
        Self {
            nu1: s.nu1.clone(),
            nu2: s.nu2.clone(),
            values: s.values.chunks(s.nu2.len()).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl From<SurfaceJson> for Surface {
    fn from(s: SurfaceJson) -> Self {
        Surface {
            nu1: s.nu1,
            nu2: s.nu2,
            values: s.values.concat(),
        }
    }
}

/// Parses an axis given as `a,b,c` or `start:stop:step` (inclusive).
pub fn parse_axis(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("cannot parse {t:?}"))
    };
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err("range needs start <= stop and a positive step".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| start + k as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(format!("expected a,b,c or start:stop:step, found {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmpmix_core::{fixtures, loglik_surface};

    fn sample() -> Surface {
        let axis = [0.0, 0.5, 1.0 / 3.0];
        loglik_surface(&fixtures::ten_point(), 0.24, 1.13, 9.0, &axis, &axis[..2]).unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let s = sample();
        let text = surface_to_text(&s);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("nu1: 0 0.5 0.3333333333333333"));
        assert_eq!(surface_from_text(&text).unwrap(), s);
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let j = SurfaceJson::from(&s);
        assert_eq!(j.values.len(), 3);
        let text = serde_json::to_string(&j).unwrap();
        let back: SurfaceJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Surface::from(back), s);
    }

    #[test]
    fn malformed_text() {
        assert!(surface_from_text("1 2\n").is_err());
        assert!(surface_from_text("nu1: 1\nnu2: 1 2\n3\n").is_err());
        assert!(surface_from_text("nu1: 1 2\nnu2: 1\n3\n").is_err());
        assert!(surface_from_text("nu1: 1\nnu2: x\n").is_err());
    }

    #[test]
    fn axes() {
        assert_eq!(
            parse_axis("0:1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_axis("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_axis("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_axis("1:0:1").is_err());
        assert!(parse_axis("0:1:0").is_err());
        assert!(parse_axis("a").is_err());
    }
}
