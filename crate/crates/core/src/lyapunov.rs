//! Construction and verification of discrete Lyapunov functions: the rank
//! potential that is flat exactly on the recurrent set, trapping closures,
//! two-level step functions, and the glued staircase approximation of a
//! causal function.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::analysis::{
    classify_neutral, default_tol, strict_value_bins, ScalarField, DEFAULT_BIN_COUNT,
};
use crate::causal_graph::{CausalGraph, Direction, VertexSet};

pub const DEFAULT_DELTA_0: f64 = 1e-6;

/// Band description for a step function: two plateau levels and the cut
/// level between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpec {
    pub a_minus: f64,
    pub a: f64,
    pub a_plus: f64,
}

impl StepSpec {
    pub fn new(a_minus: f64, a: f64, a_plus: f64) -> Self {
        assert!(
            a_minus < a && a < a_plus,
            "step levels must satisfy a_minus < a < a_plus"
        );
        Self { a_minus, a, a_plus }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LyapunovError {
    /// The cut level is not a strict value at the working resolution, or
    /// the enlarged graph smears the band into the exterior plateau.
    #[error("level {a} is not strict at this resolution: {reason}")]
    NotStrict { a: f64, reason: String },
    /// A slab of the staircase has no strict value to cut at.
    #[error("no strict value available inside slab {k}")]
    NoStrictBin { k: i64 },
    /// The target function decreases along causal edges; nothing to
    /// approximate.
    #[error("target is not a causal function: {violations} decreasing edges")]
    NotCausal { violations: usize },
}

/// Outcome of verifying a candidate Lyapunov field against a graph.
#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// Smallest increase per unit displacement over edges leaving the
    /// designated recurrent set; None when every edge starts inside it.
    pub margin: Option<f64>,
    /// Sources of edges that fail monotonicity or the strict-increase
    /// requirement outside the recurrent set.
    pub critical: VertexSet,
    /// Edges along which the field strictly decreases.
    pub monotone_violations: Vec<(usize, usize)>,
    /// Largest |tau - f| against the approximation target, when one exists.
    pub sup_error: Option<f64>,
    /// Cycles of the enlarged graph that forced a plateau at an interior
    /// band value.
    pub band_plateaus: usize,
}

/// Rank potential of the condensation: zero on source components, one
/// longest-path step per condensation edge, scaled into [0, 1]. Constant on
/// every strongly connected component, strictly increasing across every
/// condensation edge.
pub fn complete_lyapunov(g: &CausalGraph) -> ScalarField {
    let scc = g.scc();
    let count = scc.component_count();
    let mut rank = vec![0u32; count];
    for c in 0..count {
        for &s in scc.condensation_out(c) {
            rank[s as usize] = rank[s as usize].max(rank[c] + 1);
        }
    }
    let r_max = rank.iter().copied().max().unwrap_or(0).max(1) as f64;
    let values: Vec<f64> =
        (0..g.vertex_count()).map(|v| rank[scc.component(v)] as f64 / r_max).collect();
    ScalarField::new(g.grid().clone(), values)
}

/// Forward closure of a seed set: the smallest vertex set containing the
/// seed that no enlarged edge leaves.
pub fn trapping_closure(g_theta: &CausalGraph, seed: &VertexSet) -> VertexSet {
    if seed.is_empty() {
        return seed.clone();
    }
    g_theta.reach(seed, Direction::Forward)
}

struct StepOutcome {
    field: ScalarField,
    /// Vertices holding the top plateau value although f is still below it.
    top_leak: usize,
    /// Enlarged cycles that force a flat interior band value.
    band_plateaus: usize,
}

/// The construction itself; level validation is the caller's business.
fn step_core(
    f: &ScalarField,
    spec: StepSpec,
    g_theta: &CausalGraph,
) -> Result<StepOutcome, LyapunovError> {
    let n = g_theta.vertex_count();
    assert_eq!(f.len(), n);
    let f_i = VertexSet::from_indices(n, (0..n).filter(|&v| f.value(v) >= spec.a_plus));
    let f_e = VertexSet::from_indices(n, (0..n).filter(|&v| f.value(v) <= spec.a_minus));
    let seed = VertexSet::from_indices(n, (0..n).filter(|&v| f.value(v) >= spec.a));
    let a = trapping_closure(g_theta, &seed);
    let top = trapping_closure(g_theta, &f_i);

    let mut a_and_fe = a.clone();
    a_and_fe.intersect_with(&f_e);
    if !a_and_fe.is_empty() {
        return Err(LyapunovError::NotStrict {
            a: spec.a,
            reason: format!(
                "the upper region flows back into the lower plateau at {} vertices",
                a_and_fe.count()
            ),
        });
    }
    let mut top_and_fe = top.clone();
    top_and_fe.intersect_with(&f_e);
    if !top_and_fe.is_empty() {
        return Err(LyapunovError::NotStrict {
            a: spec.a,
            reason: "the top plateau reaches the lower plateau".into(),
        });
    }
    let scc = g_theta.scc();
    let count = scc.component_count();
    let mut touches_i = vec![false; count];
    let mut touches_e = vec![false; count];
    for v in 0..n {
        let c = scc.component(v);
        touches_i[c] |= f_i.contains(v);
        touches_e[c] |= f_e.contains(v);
    }
    if (0..count).any(|c| scc.is_nontrivial(c) && touches_i[c] && touches_e[c]) {
        return Err(LyapunovError::NotStrict {
            a: spec.a,
            reason: "a cycle spans both plateaus".into(),
        });
    }

    // Longest-path rank over the condensation nodes lying in the open band.
    let mut in_band = vec![false; count];
    for v in 0..n {
        if a.contains(v) && !top.contains(v) {
            in_band[scc.component(v)] = true;
        }
    }
    let mut rank = vec![0u32; count];
    let mut r_band = 0u32;
    for c in 0..count {
        if !in_band[c] {
            continue;
        }
        for &s in scc.condensation_out(c) {
            if in_band[s as usize] {
                rank[s as usize] = rank[s as usize].max(rank[c] + 1);
                r_band = r_band.max(rank[s as usize]);
            }
        }
    }

    let span = spec.a_plus - spec.a_minus;
    let mut values = vec![0.0; n];
    let mut top_leak = 0usize;
    for v in 0..n {
        values[v] = if top.contains(v) {
            if f.value(v) < spec.a_plus {
                top_leak += 1;
            }
            spec.a_plus
        } else if a.contains(v) {
            let r = rank[scc.component(v)];
            spec.a_minus + span * (r + 1) as f64 / (r_band + 2) as f64
        } else {
            spec.a_minus
        };
    }
    let band_plateaus =
        (0..count).filter(|&c| in_band[c] && scc.is_nontrivial(c)).count();
    Ok(StepOutcome {
        field: ScalarField::new(f.grid().clone(), values),
        top_leak,
        band_plateaus,
    })
}

/// Two-plateau Lyapunov step around a strict value of `f`: `a_plus` on the
/// forward closure of the upper region, `a_minus` off the closure of the
/// cut, graded in between. The cut level must sit in a strict value bin of
/// `f` over the base graph.
pub fn step_lyapunov(
    f: &ScalarField,
    spec: StepSpec,
    g_theta: &CausalGraph,
    g_base: &CausalGraph,
) -> Result<ScalarField, LyapunovError> {
    let range = f.range();
    let report = classify_neutral(f, g_base, default_tol(range));
    if range > 0.0 {
        let bins = strict_value_bins(f, &report, range / DEFAULT_BIN_COUNT as f64);
        let k = bins.bin_of(spec.a);
        if !bins.is_certified_strict(k) {
            return Err(LyapunovError::NotStrict {
                a: spec.a,
                reason: "no sampled strict value backs the cut level".into(),
            });
        }
    }
    step_core(f, spec, g_theta).map(|o| o.field)
}

/// Staircase approximation of a causal function by a Lyapunov field, one
/// step per slab of height `eps`, cut at a strict value inside each slab
/// and glued at the slab boundaries. With `add_regularizer` the rank
/// potential (scaled by `eps`) is added, buying strict increase outside the
/// recurrent set for a doubled error bound.
pub fn approximate(
    f: &ScalarField,
    eps: f64,
    g_theta: &CausalGraph,
    g_base: &CausalGraph,
    add_regularizer: bool,
    tol: f64,
    bin_width: f64,
) -> Result<(ScalarField, LyapunovReport), LyapunovError> {
    assert!(eps > 0.0, "slab height must be positive");
    let range = f.range();
    let n = f.len();

    let causal_violations = crate::analysis::check_causal(f, g_base, tol);
    if !causal_violations.is_empty() {
        return Err(LyapunovError::NotCausal { violations: causal_violations.len() });
    }

    if range == 0.0 {
        let tau = f.clone();
        let mut report = verify_lyapunov(&tau, g_base, &g_theta.recurrent_set(), DEFAULT_DELTA_0);
        report.sup_error = Some(0.0);
        return Ok((tau, report));
    }

    assert!(
        eps > 2.0 * bin_width,
        "slab height must exceed twice the bin width"
    );
    let report = classify_neutral(f, g_base, tol);
    let bins = strict_value_bins(f, &report, bin_width);
    let strict_centers: Vec<f64> = (0..bins.count())
        .filter(|&k| bins.is_certified_strict(k))
        .map(|k| bins.center(k))
        .collect();

    // Which slabs actually hold vertices, and at which values.
    let slab_of = |value: f64| (value / eps).floor() as i64;
    let mut slabs: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        slabs.entry(slab_of(f.value(v))).or_default().push(v);
    }

    let mut band_plateaus = 0usize;
    let mut fields: BTreeMap<i64, ScalarField> = BTreeMap::new();
    for (&k, members) in &slabs {
        let lo = k as f64 * eps;
        let hi = (k + 1) as f64 * eps;
        if members.iter().all(|&v| f.value(v) == lo) {
            // Boundary-only slab: the glued value is the slab floor itself.
            fields.insert(k, ScalarField::constant(f.grid().clone(), lo));
            continue;
        }
        let mid = lo + 0.5 * eps;
        let mut a_k: Option<f64> = None;
        for &c in &strict_centers {
            if c > lo && c < hi {
                let better = match a_k {
                    None => true,
                    Some(prev) => {
                        let d = (c - mid).abs();
                        let dp = (prev - mid).abs();
                        d < dp || (d == dp && c < prev)
                    }
                };
                if better {
                    a_k = Some(c);
                }
            }
        }
        let Some(a_k) = a_k else {
            return Err(LyapunovError::NoStrictBin { k });
        };
        let outcome = step_core(f, StepSpec::new(lo, a_k, hi), g_theta)?;
        band_plateaus += outcome.band_plateaus;
        fields.insert(k, outcome.field);
    }

    let mut values = vec![0.0; n];
    for v in 0..n {
        values[v] = fields[&slab_of(f.value(v))].value(v);
    }
    let mut tau = ScalarField::new(f.grid().clone(), values);

    if add_regularizer {
        let reg = complete_lyapunov(g_theta);
        let values: Vec<f64> =
            (0..n).map(|v| tau.value(v) + eps * reg.value(v)).collect();
        tau = ScalarField::new(f.grid().clone(), values);
    }

    let sup_error = (0..n).map(|v| (tau.value(v) - f.value(v)).abs()).fold(0.0, f64::max);
    let mut rep = verify_lyapunov(&tau, g_base, &g_theta.recurrent_set(), DEFAULT_DELTA_0);
    rep.sup_error = Some(sup_error);
    rep.band_plateaus = band_plateaus;
    Ok((tau, rep))
}

/// Check a candidate field: nondecreasing along every edge, and strictly
/// increasing (at rate `delta_0` per unit displacement) along edges whose
/// source lies outside `r_set`.
pub fn verify_lyapunov(
    tau: &ScalarField,
    g_base: &CausalGraph,
    r_set: &VertexSet,
    delta_0: f64,
) -> LyapunovReport {
    assert!(delta_0 >= 0.0);
    let n = g_base.vertex_count();
    assert_eq!(tau.len(), n);
    let mut monotone_violations = Vec::new();
    let mut critical = VertexSet::new(n);
    let mut margin: Option<f64> = None;
    for x in 0..n {
        let tx = tau.value(x);
        let outside = !r_set.contains(x);
        for (y, norm) in g_base.out_with_norms(x) {
            let dt = tau.value(y) - tx;
            if dt < 0.0 {
                monotone_violations.push((x, y));
                critical.insert(x);
            }
            if outside {
                let rate = dt / norm;
                if rate < delta_0 {
                    critical.insert(x);
                }
                margin = Some(match margin {
                    None => rate,
                    Some(m) => m.min(rate),
                });
            }
        }
    }
    LyapunovReport { margin, critical, monotone_violations, sup_error: None, band_plateaus: 0 }
}

/// Separable triangular blur of radius `rho` cells: circle factors wrap,
/// open factors truncate the kernel and renormalize. Averaging can destroy
/// Lyapunov margins near the recurrent set, so verify again afterwards.
pub fn smooth_field(tau: &ScalarField, rho: usize) -> ScalarField {
    assert!(rho >= 1, "smoothing radius must be at least one cell");
    let grid = tau.grid().clone();
    let n = grid.len();
    let dim = grid.dim();
    let mut current = tau.values().to_vec();
    let mut mi = vec![0usize; dim];
    for axis in 0..dim {
        let factor = grid.factor(axis);
        let cells = factor.n;
        let mut next = vec![0.0; n];
        for v in 0..n {
            grid.multi_index_into(v, &mut mi);
            let center = mi[axis] as i64;
            let mut acc = 0.0;
            let mut weight = 0.0;
            for j in -(rho as i64)..=(rho as i64) {
                let w = (rho as i64 + 1 - j.abs()) as f64;
                let raw = center + j;
                let idx = if factor.periodic {
                    raw.rem_euclid(cells as i64) as usize
                } else if raw < 0 || raw >= cells as i64 {
                    continue;
                } else {
                    raw as usize
                };
                mi[axis] = idx;
                acc += w * current[grid.vertex_id(&mi)];
                weight += w;
            }
            mi[axis] = center as usize;
            next[v] = acc / weight;
        }
        current = next;
    }
    ScalarField::new(grid, current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal_graph::{CausalGraph, Enlargement, MembershipField};
    use crate::conedsl::{ConeSpec, ScalarExpr};
    use crate::geometry::{GridFactor, ManifoldGrid};

    fn build(grid: &ManifoldGrid, cone: &str, stencil: usize, theta: f64) -> CausalGraph {
        let spec = ConeSpec::parse(cone, grid.dim()).unwrap();
        let m = MembershipField::build(grid, &spec, stencil, Some(64)).unwrap();
        CausalGraph::build(grid, &m, Enlargement::with_theta(theta))
    }

    fn coordinate_field(grid: &ManifoldGrid, expr: &str) -> ScalarField {
        ScalarField::evaluate(grid, &ScalarExpr::parse(expr, grid.dim()).unwrap()).unwrap()
    }

    #[test]
    fn chain_rank_potential_is_zero_one() {
        let grid = ManifoldGrid::new(vec![GridFactor::interval(0.0, 1.0, 2)]).unwrap();
        let g = build(&grid, "v1 >= 0", 1, 0.0);
        let tau = complete_lyapunov(&g);
        assert_eq!(tau.values(), &[0.0, 1.0]);
    }

    #[test]
    fn single_component_gives_constant_potential() {
        let tau_grid = std::f64::consts::TAU;
        let grid = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(0.0, tau_grid * 7.0 / 8.0, 8),
        ])
        .unwrap();
        // Above the diagonal resolution the whole grid is one component.
        let g = build(&grid, "v1 >= 0 && v2 >= 0", 1, 0.8);
        assert_eq!(g.scc().component_count(), 1);
        let tau = complete_lyapunov(&g);
        assert!(tau.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn acyclic_potential_verifies_with_positive_margin() {
        let grid = ManifoldGrid::new(vec![
            GridFactor::interval(0.0, 1.0, 9),
            GridFactor::interval(0.0, 1.0, 9),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= abs(v2)", 1, 0.1);
        let tau = complete_lyapunov(&g);
        let report = verify_lyapunov(&tau, &g, &g.recurrent_set(), 1e-9);
        assert!(report.monotone_violations.is_empty());
        assert!(report.margin.unwrap() > 0.0);
        assert!(report.critical.is_empty());
    }

    #[test]
    fn trapping_closure_is_forward_invariant() {
        let grid = ManifoldGrid::new(vec![
            GridFactor::interval(0.0, 1.0, 9),
            GridFactor::interval(0.0, 1.0, 9),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= abs(v2)", 1, 0.1);
        let n = g.vertex_count();
        let f = coordinate_field(&grid, "x1");
        let seed = VertexSet::from_indices(n, (0..n).filter(|&v| f.value(v) >= 0.5));
        let a = trapping_closure(&g, &seed);
        assert!(seed.is_subset_of(&a));
        for v in a.iter() {
            for &w in g.out(v) {
                assert!(a.contains(w as usize), "edge {v} -> {w} leaves the closure");
            }
        }
        assert!(trapping_closure(&g, &VertexSet::new(n)).is_empty());
    }

    #[test]
    fn winding_grid_traps_everything_once_descent_opens() {
        let tau_grid = std::f64::consts::TAU;
        let grid = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(0.0, tau_grid * 7.0 / 8.0, 8),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= 0 && v2 >= 0", 1, 0.8);
        let f = coordinate_field(&grid, "x2");
        let n = g.vertex_count();
        let top = VertexSet::from_indices(n, (0..n).filter(|&v| f.value(v) >= 4.0));
        assert_eq!(trapping_closure(&g, &top).count(), n);
    }

    #[test]
    fn segment_step_is_a_monotone_staircase() {
        let grid = ManifoldGrid::new(vec![GridFactor::interval(-1.0, 1.0, 21)]).unwrap();
        let g = build(&grid, "v1 >= 0", 1, 0.05);
        let f = coordinate_field(&grid, "x1");
        let tau = step_lyapunov(&f, StepSpec::new(-0.5, 0.0, 0.5), &g, &g).unwrap();
        for v in 0..grid.len() {
            let x = f.value(v);
            if x <= -0.5 {
                assert_eq!(tau.value(v), -0.5);
            } else if x >= 0.5 {
                assert_eq!(tau.value(v), 0.5);
            } else if x >= 0.0 {
                assert!(tau.value(v) > -0.5 && tau.value(v) < 0.5);
            }
        }
        for v in 0..grid.len() - 1 {
            assert!(tau.value(v + 1) >= tau.value(v));
        }
        // Distinct band levels strictly ascend.
        let band: Vec<f64> =
            (0..grid.len()).filter(|&v| f.value(v) >= 0.0 && f.value(v) < 0.5)
                .map(|v| tau.value(v)).collect();
        for w in band.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn winding_field_rejects_every_cut_level() {
        let tau_grid = std::f64::consts::TAU;
        let grid = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(0.0, tau_grid * 7.0 / 8.0, 8),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= 0 && v2 >= 0", 1, 0.05);
        let f = coordinate_field(&grid, "x2");
        let spec = StepSpec::new(1.0, 2.0, 3.0);
        match step_lyapunov(&f, spec, &g, &g) {
            Err(LyapunovError::NotStrict { .. }) => {}
            other => panic!("expected NotStrict, got {other:?}"),
        }
    }

    #[test]
    fn staircase_approximates_time_within_eps() {
        let grid = ManifoldGrid::new(vec![
            GridFactor::interval(0.0, 1.0, 9),
            GridFactor::interval(0.0, 1.0, 9),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= abs(v2)", 1, 0.1);
        let f = coordinate_field(&grid, "x1");
        let eps = 0.3;
        let tol = default_tol(f.range());
        let width = f.range() / 256.0;

        let (tau, report) = approximate(&f, eps, &g, &g, false, tol, width).unwrap();
        assert!(report.sup_error.unwrap() < eps);
        assert!(report.monotone_violations.is_empty());

        let (tau_reg, report_reg) = approximate(&f, eps, &g, &g, true, tol, width).unwrap();
        assert!(report_reg.sup_error.unwrap() < 2.0 * eps);
        assert!(report_reg.monotone_violations.is_empty());
        assert!(report_reg.margin.unwrap() > 0.0, "regularized field is strict");
        assert!(report_reg.critical.is_empty());
        // The regularizer only adds; plateaus of the plain staircase break.
        for v in 0..grid.len() {
            assert!(tau_reg.value(v) >= tau.value(v));
        }
    }

    #[test]
    fn all_neutral_function_has_no_strict_slab() {
        let tau_grid = std::f64::consts::TAU;
        let grid = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(0.0, tau_grid * 7.0 / 8.0, 8),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= 0 && v2 >= 0", 1, 0.05);
        let f = coordinate_field(&grid, "x2");
        let tol = default_tol(f.range());
        let width = f.range() / 256.0;
        match approximate(&f, f.range() / 4.0, &g, &g, false, tol, width) {
            Err(LyapunovError::NoStrictBin { .. }) => {}
            other => panic!("expected NoStrictBin, got {other:?}"),
        }
    }

    #[test]
    fn constant_target_returns_itself() {
        let grid = ManifoldGrid::new(vec![GridFactor::interval(0.0, 1.0, 5)]).unwrap();
        let g = build(&grid, "v1 >= 0", 1, 0.0);
        let f = ScalarField::constant(grid.clone(), 2.5);
        let (tau, report) = approximate(&f, 0.1, &g, &g, false, 0.0, 0.0).unwrap();
        assert!(tau.values().iter().all(|&v| v == 2.5));
        assert_eq!(report.sup_error, Some(0.0));
    }

    #[test]
    fn non_causal_target_is_refused() {
        let grid = ManifoldGrid::new(vec![GridFactor::interval(0.0, 1.0, 5)]).unwrap();
        let g = build(&grid, "v1 >= 0", 1, 0.0);
        let f = coordinate_field(&grid, "-x1");
        match approximate(&f, 0.3, &g, &g, false, 1e-12, f.range() / 256.0) {
            Err(LyapunovError::NotCausal { violations }) => assert!(violations > 0),
            other => panic!("expected NotCausal, got {other:?}"),
        }
    }

    #[test]
    fn vacuous_verification_with_full_recurrent_set() {
        let tau_grid = std::f64::consts::TAU;
        let grid = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(0.0, tau_grid * 7.0 / 8.0, 8),
        ])
        .unwrap();
        let g = build(&grid, "v1 >= 0 && v2 >= 0", 1, 0.0);
        let constant = ScalarField::constant(grid.clone(), 0.0);
        let report = verify_lyapunov(&constant, &g, &VertexSet::full(g.vertex_count()), 1e-6);
        assert!(report.monotone_violations.is_empty());
        assert!(report.critical.is_empty());
        assert_eq!(report.margin, None);
    }

    #[test]
    fn smoothing_preserves_constants_and_interior_linears() {
        let grid = ManifoldGrid::new(vec![
            GridFactor::interval(0.0, 1.0, 17),
            GridFactor::interval(0.0, 1.0, 17),
        ])
        .unwrap();
        let c = ScalarField::constant(grid.clone(), 4.0);
        let sc = smooth_field(&c, 2);
        assert!(sc.values().iter().all(|&v| (v - 4.0).abs() < 1e-12));

        let lin = coordinate_field(&grid, "x1");
        let sl = smooth_field(&lin, 2);
        for i in 2..15 {
            for j in 0..17 {
                let v = grid.vertex_id(&[i, j]);
                assert!((sl.value(v) - lin.value(v)).abs() < 1e-12, "({i}, {j})");
            }
        }
    }

    #[test]
    fn smoothing_wraps_on_circles() {
        let grid = ManifoldGrid::new(vec![GridFactor::circle(8)]).unwrap();
        // A single spike spreads symmetrically across the seam.
        let mut values = vec![0.0; 8];
        values[0] = 1.0;
        let f = ScalarField::new(grid.clone(), values);
        let s = smooth_field(&f, 1);
        assert!((s.value(1) - s.value(7)).abs() < 1e-15);
        assert!(s.value(0) > s.value(1));
        let total: f64 = s.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "mass is conserved on a closed factor");
    }
}
