//! Sampled product manifolds.
//!
//! A manifold is modeled as a product of one dimensional factors, each either
//! a circle (periodic, `hi` identified with `lo`) or a closed interval.
//! Vertices are the grid samples, addressed by a row-major id with the last
//! factor varying fastest. Tangent data is carried by [`Displacement`] values
//! measured in coordinate units, with periodic components reduced to the
//! minimal image.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One factor of the product grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFactor {
    pub periodic: bool,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("factor {index}: need n >= 2 and hi > lo (got lo {lo}, hi {hi}, n {n})")]
    InvalidFactor { index: usize, lo: f64, hi: f64, n: usize },
    #[error("dimension {dim} unsupported (1 through 4)")]
    InvalidDimension { dim: usize },
}

impl GridFactor {
    pub fn circle(n: usize) -> Self {
        Self { periodic: true, lo: 0.0, hi: std::f64::consts::TAU, n }
    }

    pub fn interval(lo: f64, hi: f64, n: usize) -> Self {
        Self { periodic: false, lo, hi, n }
    }

    /// Sample spacing. Periodic factors spread `n` samples over the full
    /// extent; interval factors place samples on both endpoints.
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.n as f64
        } else {
            (self.hi - self.lo) / (self.n - 1) as f64
        }
    }

    pub fn extent(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.lo + i as f64 * self.spacing()
    }

    fn check(&self, index: usize) -> Result<(), GeometryError> {
        if self.n < 2 || !(self.hi > self.lo) || !self.hi.is_finite() || !self.lo.is_finite() {
            return Err(GeometryError::InvalidFactor {
                index,
                lo: self.lo,
                hi: self.hi,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// Coordinate-unit step between two vertices, periodic components reduced to
/// the minimal image. Antisymmetric: swapping endpoints negates `vector`.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    pub vector: Vec<f64>,
    pub norm: f64,
}

impl Displacement {
    pub fn from_vector(vector: Vec<f64>) -> Self {
        let norm = vector.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { vector, norm }
    }

    pub fn unit(&self) -> Vec<f64> {
        if self.norm == 0.0 {
            return vec![0.0; self.vector.len()];
        }
        self.vector.iter().map(|c| c / self.norm).collect()
    }
}

/// Product grid over up to four factors, vertices in row-major order.
#[derive(Debug, Clone)]
pub struct ManifoldGrid {
    factors: Vec<GridFactor>,
    strides: Vec<usize>,
    len: usize,
}

impl ManifoldGrid {
    pub fn new(factors: Vec<GridFactor>) -> Result<Self, GeometryError> {
        let dim = factors.len();
        if dim == 0 || dim > 4 {
            return Err(GeometryError::InvalidDimension { dim });
        }
        for (i, f) in factors.iter().enumerate() {
            f.check(i)?;
        }
        let mut strides = vec![1usize; dim];
        for i in (0..dim - 1).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].n;
        }
        let len = strides[0] * factors[0].n;
        Ok(Self { factors, strides, len })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn factors(&self) -> &[GridFactor] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &GridFactor {
        &self.factors[i]
    }

    pub fn vertex_id(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim());
        idx.iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi_index(&self, id: usize) -> Vec<usize> {
        debug_assert!(id < self.len);
        let mut rest = id;
        self.strides
            .iter()
            .map(|s| {
                let i = rest / s;
                rest %= s;
                i
            })
            .collect()
    }

    pub fn coordinates(&self, id: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.coordinates_into(id, &mut out);
        out
    }

    pub fn multi_index_into(&self, id: usize, out: &mut [usize]) {
        debug_assert!(id < self.len);
        let mut rest = id;
        for (k, s) in self.strides.iter().enumerate() {
            out[k] = rest / s;
            rest %= s;
        }
    }

    pub fn coordinates_into(&self, id: usize, out: &mut [f64]) {
        let mut rest = id;
        for (k, s) in self.strides.iter().enumerate() {
            let i = rest / s;
            rest %= s;
            out[k] = self.factors[k].coordinate(i);
        }
    }

    /// Minimal-image displacement from vertex `from` to vertex `to`.
    pub fn displacement(&self, from: usize, to: usize) -> Displacement {
        let a = self.multi_index(from);
        let b = self.multi_index(to);
        let vector = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let step = b[k] as i64 - a[k] as i64;
                let step = if f.periodic { minimal_image(step, f.n as i64) } else { step };
                step as f64 * f.spacing()
            })
            .collect();
        Displacement::from_vector(vector)
    }

    /// Minimal-image displacement between two coordinate points (not
    /// necessarily grid samples).
    pub fn point_displacement(&self, from: &[f64], to: &[f64]) -> Displacement {
        let vector = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let mut d = to[k] - from[k];
                if f.periodic {
                    let ext = f.extent();
                    d = d.rem_euclid(ext);
                    if d > ext / 2.0 {
                        d -= ext;
                    }
                }
                d
            })
            .collect();
        Displacement::from_vector(vector)
    }

    /// Target vertex for a multi-index offset, or None when an interval
    /// factor would leave its range.
    pub fn offset_target(&self, from: usize, offset: &[i64]) -> Option<usize> {
        let idx = self.multi_index(from);
        let mut id = 0usize;
        for (k, f) in self.factors.iter().enumerate() {
            let raw = idx[k] as i64 + offset[k];
            let i = if f.periodic {
                raw.rem_euclid(f.n as i64)
            } else if raw < 0 || raw >= f.n as i64 {
                return None;
            } else {
                raw
            };
            id += i as usize * self.strides[k];
        }
        Some(id)
    }

    /// All vertices within Chebyshev multi-index distance `s`, excluding the
    /// vertex itself, paired with their minimal-image displacements.
    pub fn stencil_neighbors(&self, v: usize, s: usize) -> Vec<(usize, Displacement)> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashMap::new();
        for offset in stencil_offsets(self.dim(), s) {
            let Some(target) = self.offset_target(v, &offset) else { continue };
            if target == v {
                continue;
            }
            let disp = self.offset_displacement(&offset);
            // With s >= n/2 on a periodic factor two offsets can reach the
            // same vertex; keep the shorter image.
            match seen.entry(target) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(out.len());
                    out.push((target, disp));
                }
                std::collections::hash_map::Entry::Occupied(e) => {
                    let slot: usize = *e.get();
                    if disp.norm < out[slot].1.norm {
                        out[slot].1 = disp;
                    }
                }
            }
        }
        out
    }

    /// Displacement realized by a multi-index offset, minimal image on
    /// periodic factors.
    pub fn offset_displacement(&self, offset: &[i64]) -> Displacement {
        let vector = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let step = if f.periodic { minimal_image(offset[k], f.n as i64) } else { offset[k] };
                step as f64 * f.spacing()
            })
            .collect();
        Displacement::from_vector(vector)
    }
}

/// Reduce a periodic step count to the representative in (-n/2, n/2]
/// (positive on ties so the reduction is deterministic).
fn minimal_image(step: i64, n: i64) -> i64 {
    let mut s = step.rem_euclid(n);
    if 2 * s > n {
        s -= n;
    }
    s
}

/// All nonzero multi-index offsets with Chebyshev norm at most `s`, in
/// lexicographic order.
pub fn stencil_offsets(dim: usize, s: usize) -> Vec<Vec<i64>> {
    let s = s as i64;
    let mut out = Vec::new();
    let mut cur = vec![-s; dim];
    loop {
        if cur.iter().any(|&c| c != 0) {
            out.push(cur.clone());
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < s {
                cur[k] += 1;
                for c in cur.iter_mut().skip(k + 1) {
                    *c = -s;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn circle_spacing_and_count() {
        let g = ManifoldGrid::new(vec![GridFactor::circle(8)]).unwrap();
        assert_eq!(g.len(), 8);
        let h = g.factor(0).spacing();
        assert!((h - std::f64::consts::TAU / 8.0).abs() < 1e-15);
        assert!((h - 0.7853981633974483).abs() < 1e-15);
    }

    #[test]
    fn product_vertex_count() {
        let g = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(-1.0, 1.0, 9),
        ])
        .unwrap();
        assert_eq!(g.len(), 72);
        assert!((g.factor(1).spacing() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn interval_endpoints_are_samples() {
        let g = ManifoldGrid::new(vec![GridFactor::interval(-2.0, 2.0, 33)]).unwrap();
        assert_eq!(g.coordinates(0)[0], -2.0);
        assert_eq!(g.coordinates(32)[0], 2.0);
        assert_eq!(g.coordinates(16)[0], 0.0);
    }

    #[test]
    fn rejects_bad_factors() {
        assert!(matches!(
            ManifoldGrid::new(vec![GridFactor::interval(0.0, 1.0, 1)]),
            Err(GeometryError::InvalidFactor { index: 0, .. })
        ));
        assert!(matches!(
            ManifoldGrid::new(vec![GridFactor::interval(1.0, 1.0, 8)]),
            Err(GeometryError::InvalidFactor { .. })
        ));
        assert!(matches!(
            ManifoldGrid::new(vec![
                GridFactor::circle(4),
                GridFactor::circle(4),
                GridFactor::circle(4),
                GridFactor::circle(4),
                GridFactor::circle(4),
            ]),
            Err(GeometryError::InvalidDimension { dim: 5 })
        ));
    }

    #[test]
    fn open_boundary_clamps_stencil() {
        let g = ManifoldGrid::new(vec![GridFactor::interval(0.0, 1.0, 5)]).unwrap();
        let n = g.stencil_neighbors(0, 1);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].0, 1);
        assert!((n[0].1.vector[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn periodic_stencil_wraps() {
        let g = ManifoldGrid::new(vec![GridFactor::circle(8)]).unwrap();
        let h = g.factor(0).spacing();
        let n = g.stencil_neighbors(0, 1);
        assert_eq!(n.len(), 2);
        let mut targets: Vec<usize> = n.iter().map(|(t, _)| *t).collect();
        targets.sort_unstable();
        assert_eq!(targets, vec![1, 7]);
        for (t, d) in &n {
            let expect = if *t == 1 { h } else { -h };
            assert!((d.vector[0] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn interior_stencil_size_2d() {
        let g = ManifoldGrid::new(vec![
            GridFactor::interval(0.0, 1.0, 9),
            GridFactor::interval(0.0, 1.0, 9),
        ])
        .unwrap();
        let center = g.vertex_id(&[4, 4]);
        assert_eq!(g.stencil_neighbors(center, 2).len(), 24);
    }

    #[test]
    fn displacement_minimal_image() {
        let g = ManifoldGrid::new(vec![GridFactor::circle(8)]).unwrap();
        let h = g.factor(0).spacing();
        // 0 -> 7 is one step backwards, not seven forwards.
        let d = g.displacement(0, 7);
        assert!((d.vector[0] + h).abs() < 1e-15);
    }

    #[test]
    fn point_displacement_wraps() {
        let g = ManifoldGrid::new(vec![
            GridFactor::circle(8),
            GridFactor::interval(0.0, 1.0, 5),
        ])
        .unwrap();
        let tau = std::f64::consts::TAU;
        let d = g.point_displacement(&[tau - 0.1, 0.25], &[0.1, 0.5]);
        assert!((d.vector[0] - 0.2).abs() < 1e-12);
        assert!((d.vector[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn offset_enumeration_counts() {
        assert_eq!(stencil_offsets(1, 1).len(), 2);
        assert_eq!(stencil_offsets(2, 1).len(), 8);
        assert_eq!(stencil_offsets(2, 2).len(), 24);
        assert_eq!(stencil_offsets(3, 2).len(), 124);
    }

    fn small_grid() -> impl Strategy<Value = ManifoldGrid> {
        let factor = (any::<bool>(), 2usize..7).prop_map(|(periodic, n)| GridFactor {
            periodic,
            lo: -1.0,
            hi: 1.0,
            n,
        });
        proptest::collection::vec(factor, 1..=3)
            .prop_map(|fs| ManifoldGrid::new(fs).unwrap())
    }

    proptest! {
        #[test]
        fn index_round_trip(g in small_grid(), seed in any::<u64>()) {
            let id = (seed % g.len() as u64) as usize;
            prop_assert_eq!(g.vertex_id(&g.multi_index(id)), id);
        }

        #[test]
        fn displacement_antisymmetry(g in small_grid(), a in any::<u64>(), b in any::<u64>()) {
            let a = (a % g.len() as u64) as usize;
            let b = (b % g.len() as u64) as usize;
            let fwd = g.displacement(a, b);
            let bwd = g.displacement(b, a);
            for (x, y) in fwd.vector.iter().zip(&bwd.vector) {
                // Skip the ambiguous half-extent image on even periodic factors.
                if (x.abs() - 1.0).abs() < 1e-12 { continue; }
                prop_assert!((x + y).abs() < 1e-12);
            }
        }

        #[test]
        fn stencil_nesting(g in small_grid(), v in any::<u64>()) {
            let v = (v % g.len() as u64) as usize;
            let inner: std::collections::HashSet<usize> =
                g.stencil_neighbors(v, 1).iter().map(|(t, _)| *t).collect();
            let outer: std::collections::HashSet<usize> =
                g.stencil_neighbors(v, 2).iter().map(|(t, _)| *t).collect();
            prop_assert!(inner.is_subset(&outer));
        }
    }
}
