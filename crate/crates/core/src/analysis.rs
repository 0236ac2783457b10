//! Classification of causal functions over a sampled cone field: edge-wise
//! monotonicity, neutral versus strict points and values, density of strict
//! values, and causality checks for sampled curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::causal_graph::{CausalGraph, VertexSet};
use crate::conedsl::{default_sphere_samples, sphere_sample, ConeSpec, EvalError, ScalarExpr};
use crate::geometry::ManifoldGrid;

pub const DEFAULT_BIN_COUNT: usize = 256;
pub const DEFAULT_GAP_BINS: usize = 8;

/// Equality tolerance used when nothing is configured: neutrality compares
/// float values for equality, which needs slack proportional to the range.
pub fn default_tol(range: f64) -> f64 {
    1e-9 * range.abs()
}

/// A scalar function sampled on the grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: ManifoldGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: ManifoldGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert!(values.iter().all(|v| v.is_finite()), "field values must be finite");
        Self { grid, values }
    }

    pub fn constant(grid: ManifoldGrid, c: f64) -> Self {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    /// Pointwise evaluation of a coordinate-only expression.
    pub fn evaluate(grid: &ManifoldGrid, expr: &ScalarExpr) -> Result<Self, EvalError> {
        assert_eq!(expr.dim(), grid.dim());
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map_init(
                || (Vec::new(), vec![0.0; grid.dim()]),
                |(stack, x), v| {
                    grid.coordinates_into(v, x);
                    expr.eval_fast(x, stack)
                },
            )
            .collect::<Result<_, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EvalError);
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
}

/// Per-vertex verdict of the neutrality classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexTag {
    /// Every point in the strict future carries a strictly larger value.
    Strict,
    /// The cone at the point is the full tangent space.
    NeutralSingular,
    /// Some other point of the strict future has an equal value.
    NeutralFuture,
}

#[derive(Debug, Clone)]
pub struct NeutralityReport {
    tags: Vec<VertexTag>,
    witness: Vec<u32>,
    tol: f64,
}

const NO_WITNESS: u32 = u32::MAX;

fn min_pair(a: (f64, u32), b: (f64, u32)) -> (f64, u32) {
    if b < a {
        b
    } else {
        a
    }
}

impl NeutralityReport {
    pub fn tag(&self, v: usize) -> VertexTag {
        self.tags[v]
    }

    pub fn tags(&self) -> &[VertexTag] {
        &self.tags
    }

    /// The equal-valued future point backing a `NeutralFuture` tag.
    pub fn witness(&self, v: usize) -> Option<usize> {
        (self.witness[v] != NO_WITNESS).then(|| self.witness[v] as usize)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn neutral_set(&self) -> VertexSet {
        VertexSet::from_indices(
            self.tags.len(),
            self.tags
                .iter()
                .enumerate()
                .filter(|(_, t)| **t != VertexTag::Strict)
                .map(|(v, _)| v),
        )
    }

    pub fn neutral_count(&self) -> usize {
        self.tags.iter().filter(|t| **t != VertexTag::Strict).count()
    }

    pub fn all_strict(&self) -> bool {
        self.tags.iter().all(|t| *t == VertexTag::Strict)
    }
}

/// Edges along which `f` decreases by more than `tol`. Empty means `f` is a
/// causal function of the sampled structure: edge-wise monotonicity extends
/// to paths by transitivity.
pub fn check_causal(f: &ScalarField, g: &CausalGraph, tol: f64) -> Vec<(usize, usize)> {
    assert!(tol >= 0.0);
    let mut violations = Vec::new();
    for x in 0..g.vertex_count() {
        let fx = f.value(x);
        for &y in g.out(x) {
            if f.value(y as usize) < fx - tol {
                violations.push((x, y as usize));
            }
        }
    }
    violations
}

/// Tag every vertex strict or neutral against the base graph.
///
/// A single pass suffices: per strongly connected component we keep the two
/// smallest values, then a reverse sweep over the condensation (component
/// ids are already topologically sorted) propagates the smallest value of
/// the strictly-reachable region. The minimum over the strict future of a
/// vertex, excluding itself, falls out of those two tables.
pub fn classify_neutral(f: &ScalarField, g_base: &CausalGraph, tol: f64) -> NeutralityReport {
    let n = g_base.vertex_count();
    assert_eq!(f.len(), n);
    let scc = g_base.scc();
    let count = scc.component_count();

    // Smallest and second-smallest (value, vertex) per component.
    let mut best: Vec<(f64, u32)> = vec![(f64::INFINITY, NO_WITNESS); count];
    let mut second: Vec<(f64, u32)> = vec![(f64::INFINITY, NO_WITNESS); count];
    for v in 0..n {
        let c = scc.component(v);
        let cand = (f.value(v), v as u32);
        if cand < best[c] {
            second[c] = best[c];
            best[c] = cand;
        } else if cand < second[c] {
            second[c] = cand;
        }
    }

    // Smallest (value, vertex) over everything strictly after the component.
    let mut down: Vec<(f64, u32)> = vec![(f64::INFINITY, NO_WITNESS); count];
    for c in (0..count).rev() {
        for &s in scc.condensation_out(c) {
            let s = s as usize;
            down[c] = min_pair(down[c], min_pair(best[s], down[s]));
        }
    }

    let mut tags = vec![VertexTag::Strict; n];
    let mut witness = vec![NO_WITNESS; n];
    for v in 0..n {
        if g_base.singular().contains(v) {
            tags[v] = VertexTag::NeutralSingular;
            continue;
        }
        let c = scc.component(v);
        let mut future_min = down[c];
        if scc.is_nontrivial(c) {
            let in_comp = if best[c].1 == v as u32 { second[c] } else { best[c] };
            future_min = min_pair(future_min, in_comp);
        }
        if future_min.1 != NO_WITNESS && future_min.0 <= f.value(v) + tol {
            tags[v] = VertexTag::NeutralFuture;
            witness[v] = future_min.1;
        }
    }
    NeutralityReport { tags, witness, tol }
}

/// Value bins over the range of a function. A bin is neutral when some
/// neutral vertex's value lands in it, strict otherwise; occupancy records
/// whether any sampled value lands in it at all, since an empty bin carries
/// no evidence about the function's values.
#[derive(Debug, Clone, Serialize)]
pub struct ValueBins {
    lo: f64,
    width: f64,
    neutral: Vec<bool>,
    occupied: Vec<bool>,
}

impl ValueBins {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn count(&self) -> usize {
        self.neutral.len()
    }

    pub fn is_neutral(&self, k: usize) -> bool {
        self.neutral[k]
    }

    pub fn is_strict(&self, k: usize) -> bool {
        !self.neutral[k]
    }

    pub fn is_occupied(&self, k: usize) -> bool {
        self.occupied[k]
    }

    /// A strict bin witnessed by at least one sampled value.
    pub fn is_certified_strict(&self, k: usize) -> bool {
        self.occupied[k] && !self.neutral[k]
    }

    pub fn bin_of(&self, value: f64) -> usize {
        if self.width <= 0.0 {
            return 0;
        }
        let k = ((value - self.lo) / self.width).floor();
        (k.max(0.0) as usize).min(self.neutral.len() - 1)
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width
    }

    pub fn strict_count(&self) -> usize {
        self.neutral.iter().filter(|b| !**b).count()
    }
}

pub fn strict_value_bins(f: &ScalarField, report: &NeutralityReport, width: f64) -> ValueBins {
    let lo = f.min();
    let range = f.range();
    assert!(width > 0.0 || range == 0.0, "bin width must be positive");
    let count = if range <= 0.0 || width <= 0.0 {
        1
    } else {
        // Shave an ulp-scale sliver so an exact multiple does not round up
        // to a spurious empty bin.
        let ratio = range / width;
        ((ratio - ratio * 1e-12).ceil().max(1.0)) as usize
    };
    let mut bins =
        ValueBins { lo, width, neutral: vec![false; count], occupied: vec![false; count] };
    for (v, tag) in report.tags().iter().enumerate() {
        let k = bins.bin_of(f.value(v));
        bins.occupied[k] = true;
        if *tag != VertexTag::Strict {
            bins.neutral[k] = true;
        }
    }
    bins
}

/// Density check for strict values: every window of length `gap` inside the
/// covered range must contain a strict bin certified by a sampled value.
/// A constant function passes vacuously.
pub fn is_special(bins: &ValueBins, gap: f64) -> bool {
    assert!(gap >= bins.width(), "gap below bin resolution");
    let mut run = 0usize;
    for k in 0..bins.count() {
        if bins.is_certified_strict(k) {
            run = 0;
        } else {
            run += 1;
            if run as f64 * bins.width() >= gap {
                return false;
            }
        }
    }
    true
}

/// A causal function with no neutral points at all.
pub fn is_time_function(report: &NeutralityReport) -> bool {
    report.all_strict()
}

/// Result of checking a sampled curve against the cone field.
#[derive(Debug, Clone, Serialize)]
pub struct CurveReport {
    pub causal: bool,
    /// Index of the first chord whose direction the cone rejects.
    pub first_violation: Option<usize>,
    /// Chords of zero length, skipped as the allowed zero velocity.
    pub degenerate_chords: Vec<usize>,
}

/// A curve is accepted when every chord direction is a member of the cone at
/// the chord's start, or lies within `tol_angle` of a sampled member
/// direction there.
pub fn check_curve_causal(
    samples: &[Vec<f64>],
    spec: &ConeSpec,
    grid: &ManifoldGrid,
    tol_angle: f64,
) -> Result<CurveReport, EvalError> {
    assert!(samples.len() >= 2, "a curve needs at least two samples");
    let dim = grid.dim();
    let cos_tol = tol_angle.cos();
    let sphere = sphere_sample(dim, default_sphere_samples(dim));
    let mut degenerate_chords = Vec::new();
    for i in 0..samples.len() - 1 {
        let x = &samples[i];
        assert_eq!(x.len(), dim);
        let d = grid.point_displacement(x, &samples[i + 1]);
        if d.norm < 1e-15 {
            degenerate_chords.push(i);
            continue;
        }
        if spec.member(x, &d.vector)? {
            continue;
        }
        let unit = d.unit();
        let mut admitted = false;
        if tol_angle > 0.0 {
            for w in &sphere {
                let dot: f64 = unit.iter().zip(w).map(|(a, b)| a * b).sum();
                if dot >= cos_tol && spec.member(x, w)? {
                    admitted = true;
                    break;
                }
            }
        }
        if !admitted {
            return Ok(CurveReport {
                causal: false,
                first_violation: Some(i),
                degenerate_chords,
            });
        }
    }
    Ok(CurveReport { causal: true, first_violation: None, degenerate_chords })
}
