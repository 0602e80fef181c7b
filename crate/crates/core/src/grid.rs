//! Grid settings and the refining 2-D grid maximizer behind every M-step.
//!
//! A search evaluates the full coarse grid (with the incoming point injected
//! on both axes), then repeatedly re-grids a shrinking window around the
//! incumbent until the spacing drops below `min_spacing`. Each window contains
//! the incumbent itself, so the returned value never falls below the value at
//! the starting point. Ties go to the lexicographically smallest node.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cmp::Support;
use crate::error::{Error, Result};

/// One interval of the `nu` search range. Only the lower end may be open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuRegion {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
}

impl NuRegion {
    pub fn closed(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: false,
        }
    }

    pub fn left_open(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: true,
        }
    }

    /// `count` evenly spaced nodes; an open lower end is skipped.
    fn nodes(&self, count: usize) -> Vec<f64> {
        let width = self.upper - self.lower;
        if self.lower_open {
            (1..=count)
                .map(|k| self.lower + width * k as f64 / count as f64)
                .collect()
        } else {
            (0..count)
                .map(|k| self.lower + width * k as f64 / (count - 1) as f64)
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NuAxis {
    /// Disjoint, ordered regions covering `[0, nu_max]`.
    Regions(Vec<NuRegion>),
    /// `nu` pinned to one value (the Poisson baselines use `1`).
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nu_axis: NuAxis,
    /// `None` means `[0.05, 3 * upper support bound]`.
    pub lambda_range: Option<(f64, f64)>,
    pub lambda_points: usize,
    pub points_per_region: usize,
    pub refinement_factor: f64,
    pub min_spacing: f64,
    pub refine: bool,
}

pub const NU_MAX: f64 = 10.0;
pub const LAMBDA_MIN: f64 = 0.05;

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nu_axis: NuAxis::Regions(vec![
                NuRegion::closed(0.0, 0.7),
                NuRegion::left_open(0.7, 1.0),
                NuRegion::left_open(1.0, NU_MAX),
            ]),
            lambda_range: None,
            lambda_points: 36,
            points_per_region: 12,
            refinement_factor: 5.0,
            min_spacing: 1e-3,
            refine: true,
        }
    }
}

/// Node list plus the closed bounds refinement windows are clipped to.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
}

impl Axis {
    pub(crate) fn point(v: f64) -> Self {
        Self {
            lo: v,
            hi: v,
            nodes: vec![v],
        }
    }

    pub(crate) fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

impl GridSpec {
    pub fn with_fixed_nu(mut self, nu: f64) -> Self {
        self.nu_axis = NuAxis::Fixed(nu);
        self
    }

    pub fn without_refinement(mut self) -> Self {
        self.refine = false;
        self
    }

    pub fn nu_max(&self) -> f64 {
        match &self.nu_axis {
            NuAxis::Regions(r) => r.last().map_or(NU_MAX, |r| r.upper),
            NuAxis::Fixed(v) => *v,
        }
    }

    pub fn lambda_bounds(&self, support: &Support) -> (f64, f64) {
        self.lambda_range
            .unwrap_or((LAMBDA_MIN, 3.0 * f64::from(support.upper().max(1))))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGrid(m.into()));
        match &self.nu_axis {
            NuAxis::Fixed(v) => {
                if !(v.is_finite() && *v >= 0.0) {
                    return bad("fixed nu must be finite and non-negative");
                }
            }
            NuAxis::Regions(regions) => {
                let Some(first) = regions.first() else {
                    return bad("at least one nu region is required");
                };
                if first.lower != 0.0 || first.lower_open {
                    return bad("nu regions must start at a closed 0");
                }
                for r in regions {
                    if !(r.upper.is_finite() && r.upper > r.lower) {
                        return Err(Error::InvalidGrid(format!(
                            "nu region ({}, {}) is empty",
                            r.lower, r.upper
                        )));
                    }
                }
                for pair in regions.windows(2) {
                    if pair[1].lower != pair[0].upper || !pair[1].lower_open {
                        return bad("nu regions must be ordered, disjoint and contiguous");
                    }
                }
            }
        }
        if let Some((lo, hi)) = self.lambda_range {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
                return bad("lambda range must satisfy 0 < min < max");
            }
        }
        if self.points_per_region < 3 || self.lambda_points < 3 {
            return bad("need at least 3 points per region and per lambda axis");
        }
        if !(self.refinement_factor > 1.0 && self.refinement_factor.is_finite()) {
            return bad("refinement factor must exceed 1");
        }
        if !(self.min_spacing > 0.0 && self.min_spacing.is_finite()) {
            return bad("min spacing must be positive");
        }
        Ok(())
    }

    pub(crate) fn nu_axis(&self) -> Axis {
        match &self.nu_axis {
            NuAxis::Fixed(v) => Axis {
                lo: *v,
                hi: *v,
                nodes: vec![*v],
            },
            NuAxis::Regions(regions) => {
                let mut nodes: Vec<f64> = regions
                    .iter()
                    .flat_map(|r| r.nodes(self.points_per_region))
                    .collect();
                sort_dedup(&mut nodes);
                Axis {
                    lo: regions[0].lower,
                    hi: self.nu_max(),
                    nodes,
                }
            }
        }
    }

    pub(crate) fn lambda_axis(&self, support: &Support) -> Axis {
        let (lo, hi) = self.lambda_bounds(support);
        let m = self.lambda_points;
        let nodes = (0..m)
            .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
            .collect();
        Axis { lo, hi, nodes }
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup();
}

fn with_injected(nodes: &[f64], extra: f64) -> Vec<f64> {
    let mut out = nodes.to_vec();
    out.push(extra);
    sort_dedup(&mut out);
    out
}

/// Largest gap from `x` to its neighbours in a sorted node list.
fn neighbour_gap(nodes: &[f64], x: f64) -> f64 {
    let i = nodes.partition_point(|&v| v < x);
    let left = if i > 0 { x - nodes[i - 1] } else { 0.0 };
    let right = nodes
        .iter()
        .skip(i)
        .find(|&&v| v > x)
        .map_or(0.0, |&v| v - x);
    left.max(right)
}

fn window(center: f64, step: f64, half: i64, axis: &Axis) -> Vec<f64> {
    let mut out: Vec<f64> = (-half..=half)
        .map(|k| {
            if k == 0 {
                center
            } else {
                axis.clamp(center + k as f64 * step)
            }
        })
        .collect();
    sort_dedup(&mut out);
    out
}

fn on_open_edge(level: &[f64], x: f64, axis: &Axis) -> bool {
    let first = level[0];
    let last = level[level.len() - 1];
    (x == first && x > axis.lo) || (x == last && x < axis.hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GridOptimum {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

/// Best cell of one row-major level; scanning in lexicographic order and
/// replacing only on strict improvement keeps the smallest tied node.
fn level_best(a: &[f64], b: &[f64], values: &[f64]) -> GridOptimum {
    let mut best = GridOptimum {
        a: a[0],
        b: b[0],
        value: f64::NEG_INFINITY,
    };
    let mut seen = false;
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let v = values[i * b.len() + j];
            if v.is_nan() {
                continue;
            }
            if !seen || v > best.value {
                best = GridOptimum {
                    a: x,
                    b: y,
                    value: v,
                };
                seen = true;
            }
        }
    }
    best
}

/// Maximizes a 2-D objective over `a × b`. `eval` receives the node lists of
/// one level and must push `a.len() * b.len()` values in row-major order; each
/// value may depend only on its own pair of nodes.
pub(crate) fn maximize_2d<F>(
    a: &Axis,
    b: &Axis,
    start: (f64, f64),
    spec: &GridSpec,
    mut eval: F,
) -> GridOptimum
where
    F: FnMut(&[f64], &[f64], &mut Vec<f64>),
{
    let mut values = Vec::new();
    let nodes_a = with_injected(&a.nodes, start.0);
    let nodes_b = with_injected(&b.nodes, start.1);
    eval(&nodes_a, &nodes_b, &mut values);
    debug_assert_eq!(values.len(), nodes_a.len() * nodes_b.len());
    let mut best = level_best(&nodes_a, &nodes_b, &values);
    if !spec.refine {
        return best;
    }

    let half = libm::ceil(spec.refinement_factor) as i64;
    let mut radius_a = neighbour_gap(&nodes_a, best.a);
    let mut radius_b = neighbour_gap(&nodes_b, best.b);
    for _ in 0..200 {
        let step_a = radius_a / half as f64;
        let step_b = radius_b / half as f64;
        let live_a = step_a >= spec.min_spacing;
        let live_b = step_b >= spec.min_spacing;
        if !live_a && !live_b {
            break;
        }
        let level_a = if live_a {
            window(best.a, step_a, half, a)
        } else {
            vec![best.a]
        };
        let level_b = if live_b {
            window(best.b, step_b, half, b)
        } else {
            vec![best.b]
        };
        values.clear();
        eval(&level_a, &level_b, &mut values);
        best = level_best(&level_a, &level_b, &values);
        // An optimum on the edge of its window (away from the axis bounds)
        // re-centres at the same radius instead of shrinking.
        if !(live_a && on_open_edge(&level_a, best.a, a)) {
            radius_a /= spec.refinement_factor;
        }
        if !(live_b && on_open_edge(&level_b, best.b, b)) {
            radius_b /= spec.refinement_factor;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(a: &[f64], b: &[f64], out: &mut Vec<f64>) {
        for x in a {
            for y in b {
                out.push(
                    -(x - 1.234_567) * (x - 1.234_567) - 2.0 * (y - 0.345_678) * (y - 0.345_678),
                );
            }
        }
    }

    #[test]
    fn default_grid_is_valid_and_splits_nu() {
        let g = GridSpec::default();
        g.validate().unwrap();
        let axis = g.nu_axis();
        assert_eq!(axis.nodes.len(), 36);
        assert_eq!(axis.nodes[0], 0.0);
        assert!(axis.nodes.contains(&0.7));
        assert!(axis.nodes.contains(&1.0));
        assert_eq!(*axis.nodes.last().unwrap(), 10.0);
        let s = Support::new(1, 10).unwrap();
        assert_eq!(g.lambda_bounds(&s), (0.05, 30.0));
    }

    #[test]
    fn invalid_grids() {
        let mut g = GridSpec::default();
        g.nu_axis = NuAxis::Regions(vec![NuRegion::closed(0.0, 1.0), NuRegion::closed(1.0, 2.0)]);
        assert!(g.validate().is_err());
        let mut g = GridSpec::default();
        g.nu_axis = NuAxis::Regions(vec![NuRegion::closed(0.1, 1.0)]);
        assert!(g.validate().is_err());
        let g = GridSpec {
            refinement_factor: 1.0,
            ..GridSpec::default()
        };
        assert!(g.validate().is_err());
        let g = GridSpec {
            points_per_region: 2,
            ..GridSpec::default()
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn refinement_reaches_min_spacing() {
        let g = GridSpec::default();
        let s = Support::new(1, 10).unwrap();
        let best = maximize_2d(&g.lambda_axis(&s), &g.nu_axis(), (5.0, 5.0), &g, quad);
        assert!((best.a - 1.234_567).abs() < 2e-3);
        assert!((best.b - 0.345_678).abs() < 2e-3);
    }

    #[test]
    fn incumbent_is_injected() {
        let g = GridSpec::default().without_refinement();
        let s = Support::new(1, 10).unwrap();
        let best = maximize_2d(
            &g.lambda_axis(&s),
            &g.nu_axis(),
            (1.234_567, 0.345_678),
            &g,
            quad,
        );
        assert_eq!((best.a, best.b), (1.234_567, 0.345_678));
    }

    #[test]
    fn ties_go_to_smallest_node() {
        let g = GridSpec::default();
        let s = Support::new(1, 10).unwrap();
        let flat = |a: &[f64], b: &[f64], out: &mut Vec<f64>| out.resize(a.len() * b.len(), 0.0);
        let best = maximize_2d(&g.lambda_axis(&s), &g.nu_axis(), (3.0, 3.0), &g, flat);
        assert_eq!((best.a, best.b), (0.05, 0.0));
    }
}
