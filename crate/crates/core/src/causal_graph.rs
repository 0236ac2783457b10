//! Directed graphs of discrete causal steps and their reachability theory.
//!
//! A vertex is a grid sample; an edge x -> y means the step from x to y is
//! admitted by the cone field under the active enlargement. Futures are
//! breadth-first closures, recurrence is membership in a nontrivial strongly
//! connected component (or a singular cone), and the causality verdicts are
//! statements about those sets.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::conedsl::{default_sphere_samples, sphere_sample, ConeSpec, EvalError};
use crate::geometry::{stencil_offsets, ManifoldGrid};

/// Angular and spatial fattening of the cone field. `theta` is the admitted
/// angle (radians) around sampled member directions; `r` admits borrowing
/// membership from any vertex within that many grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enlargement {
    pub theta: f64,
    pub r: usize,
}

impl Enlargement {
    /// The unenlarged field.
    pub fn base() -> Self {
        Self { theta: 0.0, r: 0 }
    }

    pub fn with_theta(theta: f64) -> Self {
        Self { theta, r: 0 }
    }

    pub fn contains(&self, other: &Enlargement) -> bool {
        self.theta >= other.theta && self.r >= other.r
    }
}

/// Set of vertex ids, packed 64 per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    blocks: Vec<u64>,
    universe: usize,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        Self { blocks: vec![0; universe.div_ceil(64)], universe }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for b in &mut s.blocks {
            *b = u64::MAX;
        }
        s.trim();
        s
    }

    pub fn from_indices(universe: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(universe);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, id: usize) {
        debug_assert!(id < self.universe);
        self.blocks[id / 64] |= 1 << (id % 64);
    }

    pub fn remove(&mut self, id: usize) {
        self.blocks[id / 64] &= !(1 << (id % 64));
    }

    pub fn contains(&self, id: usize) -> bool {
        debug_assert!(id < self.universe);
        self.blocks[id / 64] >> (id % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(w, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn trim(&mut self) {
        let tail = self.universe % 64;
        if tail != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1 << tail) - 1;
            }
        }
    }
}

/// Reachability direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Plain digraph in compressed sparse rows, both orientations.
#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    out_heads: Vec<u32>,
    out_targets: Vec<u32>,
    in_heads: Vec<u32>,
    in_targets: Vec<u32>,
}

impl Digraph {
    /// Build from an edge list; parallel edges are deduplicated, adjacency
    /// is sorted.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            debug_assert!(u < n && v < n);
            lists[u].push(v as u32);
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Self::from_sorted_lists(lists)
    }

    fn from_sorted_lists(lists: Vec<Vec<u32>>) -> Self {
        let n = lists.len();
        let mut out_heads = Vec::with_capacity(n + 1);
        out_heads.push(0u32);
        let mut out_targets = Vec::new();
        for l in &lists {
            out_targets.extend_from_slice(l);
            out_heads.push(out_targets.len() as u32);
        }
        let mut in_deg = vec![0u32; n];
        for &t in &out_targets {
            in_deg[t as usize] += 1;
        }
        let mut in_heads = vec![0u32; n + 1];
        for v in 0..n {
            in_heads[v + 1] = in_heads[v] + in_deg[v];
        }
        let mut cursor = in_heads.clone();
        let mut in_targets = vec![0u32; out_targets.len()];
        for u in 0..n {
            for &t in &lists[u] {
                let slot = cursor[t as usize];
                in_targets[slot as usize] = u as u32;
                cursor[t as usize] += 1;
            }
        }
        // Sources arrive in increasing u, so each in-list is already sorted.
        Self { n, out_heads, out_targets, in_heads, in_targets }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn out(&self, v: usize) -> &[u32] {
        &self.out_targets[self.out_heads[v] as usize..self.out_heads[v + 1] as usize]
    }

    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.in_targets[self.in_heads[v] as usize..self.in_heads[v + 1] as usize]
    }

    /// Breadth-first closure including the sources.
    pub fn reach(&self, sources: &VertexSet, direction: Direction) -> VertexSet {
        assert!(!sources.is_empty(), "reach needs at least one source");
        let mut seen = sources.clone();
        let mut frontier: Vec<u32> = sources.iter().map(|v| v as u32).collect();
        let mut next = Vec::new();
        while !frontier.is_empty() {
            for &v in &frontier {
                let nbrs = match direction {
                    Direction::Forward => self.out(v as usize),
                    Direction::Backward => self.in_neighbors(v as usize),
                };
                for &w in nbrs {
                    if !seen.contains(w as usize) {
                        seen.insert(w as usize);
                        next.push(w);
                    }
                }
            }
            std::mem::swap(&mut frontier, &mut next);
            next.clear();
        }
        seen
    }

    /// Tarjan's algorithm, iterative. Component ids come out topologically
    /// sorted: every edge of the condensation goes from a lower id to a
    /// higher one.
    pub fn scc(&self) -> SccDecomposition {
        let n = self.n;
        const UNSEEN: u32 = u32::MAX;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0u32; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        let mut emitted = vec![UNSEEN; n];
        let mut emit_count = 0u32;
        let mut next_index = 0u32;
        let mut frames: Vec<(u32, u32)> = Vec::new();

        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root as u32);
            on_stack[root] = true;
            frames.push((root as u32, 0));
            while let Some(frame) = frames.last_mut() {
                let v = frame.0 as usize;
                let out = self.out(v);
                if (frame.1 as usize) < out.len() {
                    let w = out[frame.1 as usize] as usize;
                    frame.1 += 1;
                    if index[w] == UNSEEN {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w as u32);
                        on_stack[w] = true;
                        frames.push((w as u32, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    frames.pop();
                    if let Some(parent) = frames.last() {
                        let p = parent.0 as usize;
                        low[p] = low[p].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().unwrap() as usize;
                            on_stack[w] = false;
                            emitted[w] = emit_count;
                            if w == v {
                                break;
                            }
                        }
                        emit_count += 1;
                    }
                }
            }
        }

        // Tarjan emits sinks first; flip ids so condensation edges ascend.
        let count = emit_count as usize;
        let comp: Vec<u32> = emitted.iter().map(|&e| emit_count - 1 - e).collect();
        let mut sizes = vec![0u32; count];
        for &c in &comp {
            sizes[c as usize] += 1;
        }
        let mut nontrivial: Vec<bool> = sizes.iter().map(|&s| s >= 2).collect();
        let mut cond_edges: Vec<(u32, u32)> = Vec::new();
        for u in 0..n {
            let cu = comp[u];
            for &w in self.out(u) {
                let cw = comp[w as usize];
                if cu == cw {
                    if u as u32 == w {
                        nontrivial[cu as usize] = true;
                    }
                } else {
                    cond_edges.push((cu, cw));
                }
            }
        }
        cond_edges.sort_unstable();
        cond_edges.dedup();
        let mut cond_heads = vec![0u32; count + 1];
        for &(cu, _) in &cond_edges {
            cond_heads[cu as usize + 1] += 1;
        }
        for c in 0..count {
            cond_heads[c + 1] += cond_heads[c];
        }
        let cond_targets: Vec<u32> = cond_edges.iter().map(|&(_, cw)| cw).collect();
        SccDecomposition { comp, count, sizes, nontrivial, cond_heads, cond_targets }
    }
}

/// Strongly connected components with their acyclic condensation.
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    comp: Vec<u32>,
    count: usize,
    sizes: Vec<u32>,
    nontrivial: Vec<bool>,
    cond_heads: Vec<u32>,
    cond_targets: Vec<u32>,
}

impl SccDecomposition {
    /// Component of a vertex. Ids are a topological order of the
    /// condensation (edges ascend).
    pub fn component(&self, v: usize) -> usize {
        self.comp[v] as usize
    }

    pub fn component_count(&self) -> usize {
        self.count
    }

    pub fn size(&self, c: usize) -> usize {
        self.sizes[c] as usize
    }

    /// A component is nontrivial when it carries a cycle: two or more
    /// vertices (self-loops do not occur in causal graphs).
    pub fn is_nontrivial(&self, c: usize) -> bool {
        self.nontrivial[c]
    }

    pub fn any_nontrivial(&self) -> bool {
        self.nontrivial.iter().any(|&b| b)
    }

    pub fn condensation_out(&self, c: usize) -> &[u32] {
        &self.cond_targets[self.cond_heads[c] as usize..self.cond_heads[c + 1] as usize]
    }

    /// Vertices of every nontrivial component.
    pub fn nontrivial_vertices(&self) -> VertexSet {
        let mut set = VertexSet::new(self.comp.len());
        for (v, &c) in self.comp.iter().enumerate() {
            if self.nontrivial[c as usize] {
                set.insert(v);
            }
        }
        set
    }
}

/// Stencil offsets with their displacement geometry, the direction sample
/// used for membership, and per-offset neighbor lists sorted by angular
/// proximity.
#[derive(Debug, Clone)]
pub struct DirectionTable {
    offsets: Vec<Vec<i64>>,
    /// Physical displacement per offset (minimal image); what membership is
    /// evaluated on.
    offset_vectors: Vec<Vec<f64>>,
    offset_norms: Vec<f64>,
    /// All sampled directions: normalized stencil steps first, then the
    /// quasi-uniform sphere sample.
    dir_count: usize,
    /// Per offset: direction indices sorted by descending cosine to the
    /// offset's direction.
    near: Vec<Vec<(f64, u32)>>,
    /// Index pairs of exactly opposite stencil directions.
    antipodes: Vec<(usize, usize)>,
    dirs: Vec<Vec<f64>>,
}

impl DirectionTable {
    pub fn new(grid: &ManifoldGrid, stencil: usize, sphere_count: usize) -> Self {
        let dim = grid.dim();
        let offsets = stencil_offsets(dim, stencil);
        let mut offset_vectors = Vec::with_capacity(offsets.len());
        let mut offset_norms = Vec::with_capacity(offsets.len());
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for o in &offsets {
            let d = grid.offset_displacement(o);
            dirs.push(d.unit());
            offset_norms.push(d.norm);
            offset_vectors.push(d.vector);
        }
        let stencil_len = dirs.len();
        dirs.extend(sphere_sample(dim, sphere_count));

        let mut near = Vec::with_capacity(offsets.len());
        for i in 0..stencil_len {
            let mut row: Vec<(f64, u32)> = dirs
                .iter()
                .enumerate()
                .map(|(j, u)| {
                    let dot: f64 = dirs[i].iter().zip(u).map(|(a, b)| a * b).sum();
                    (dot, j as u32)
                })
                .collect();
            row.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
            near.push(row);
        }

        let mut antipodes = Vec::new();
        for (i, o) in offsets.iter().enumerate() {
            let neg: Vec<i64> = o.iter().map(|c| -c).collect();
            if let Some(j) = offsets.iter().position(|p| *p == neg) {
                if i < j {
                    antipodes.push((i, j));
                }
            }
        }

        Self {
            offsets,
            offset_vectors,
            offset_norms,
            dir_count: dirs.len(),
            near,
            antipodes,
            dirs,
        }
    }

    pub fn stencil_len(&self) -> usize {
        self.offsets.len()
    }

    pub fn dir_count(&self) -> usize {
        self.dir_count
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn offset_vector(&self, i: usize) -> &[f64] {
        &self.offset_vectors[i]
    }

    pub fn offset_norm(&self, i: usize) -> f64 {
        self.offset_norms[i]
    }

    /// Unit vector of any sampled direction (stencil first, then sphere).
    pub fn dir_unit(&self, j: usize) -> &[f64] {
        &self.dirs[j]
    }

    pub fn antipodes(&self) -> &[(usize, usize)] {
        &self.antipodes
    }
}

/// Per-vertex membership bits over the sampled directions, shared by every
/// enlargement of the same scene.
#[derive(Debug, Clone)]
pub struct MembershipField {
    table: DirectionTable,
    stencil: usize,
    words: usize,
    masks: Vec<u64>,
    degenerate: VertexSet,
    singular: VertexSet,
    /// Nonempty cone with no member among the stencil steps: invisible to
    /// the graph at theta = 0.
    thin: VertexSet,
}

impl MembershipField {
    pub fn build(
        grid: &ManifoldGrid,
        spec: &ConeSpec,
        stencil: usize,
        sphere_count: Option<usize>,
    ) -> Result<Self, EvalError> {
        let sphere_count = sphere_count.unwrap_or_else(|| default_sphere_samples(grid.dim()));
        let table = DirectionTable::new(grid, stencil, sphere_count);
        let n = grid.len();
        let dir_count = table.dir_count();
        let words = dir_count.div_ceil(64);
        let mut masks = vec![0u64; n * words];
        let stencil_len = table.stencil_len();

        let failed: Vec<usize> = masks
            .par_chunks_mut(words * 64)
            .enumerate()
            .filter_map(|(chunk, rows)| {
                let mut stack = Vec::new();
                let mut x = vec![0.0; grid.dim()];
                let first = chunk * 64;
                for (row, v) in (first..n.min(first + 64)).enumerate() {
                    grid.coordinates_into(v, &mut x);
                    let bits = &mut rows[row * words..(row + 1) * words];
                    for j in 0..dir_count {
                        let dir: &[f64] = if j < stencil_len {
                            table.offset_vector(j)
                        } else {
                            table.dir_unit(j)
                        };
                        match spec.member_fast(&x, dir, &mut stack) {
                            Ok(true) => bits[j / 64] |= 1 << (j % 64),
                            Ok(false) => {}
                            Err(_) => return Some(v),
                        }
                    }
                }
                None
            })
            .collect();
        if !failed.is_empty() {
            return Err(EvalError);
        }

        let mut degenerate = VertexSet::new(n);
        let mut singular = VertexSet::new(n);
        let mut thin = VertexSet::new(n);
        let tail_bits = dir_count % 64;
        for v in 0..n {
            let row = &masks[v * words..(v + 1) * words];
            let count: u32 = row.iter().map(|w| w.count_ones()).sum();
            if count == 0 {
                degenerate.insert(v);
                continue;
            }
            let full = if tail_bits == 0 {
                row.iter().all(|&w| w == u64::MAX)
            } else {
                row[..words - 1].iter().all(|&w| w == u64::MAX)
                    && row[words - 1] == (1u64 << tail_bits) - 1
            };
            if full {
                singular.insert(v);
            }
            let stencil_member = (0..stencil_len).any(|j| row[j / 64] >> (j % 64) & 1 == 1);
            if !stencil_member {
                thin.insert(v);
            }
        }
        Ok(Self { table, stencil, words, masks, degenerate, singular, thin })
    }

    pub fn table(&self) -> &DirectionTable {
        &self.table
    }

    pub fn stencil(&self) -> usize {
        self.stencil
    }

    pub fn member_bit(&self, v: usize, j: usize) -> bool {
        self.masks[v * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn mask_row(&self, v: usize) -> &[u64] {
        &self.masks[v * self.words..(v + 1) * self.words]
    }

    pub fn is_singular(&self, v: usize) -> bool {
        self.singular.contains(v)
    }

    pub fn is_degenerate(&self, v: usize) -> bool {
        self.degenerate.contains(v)
    }

    pub fn singular_set(&self) -> &VertexSet {
        &self.singular
    }

    pub fn degenerate_set(&self) -> &VertexSet {
        &self.degenerate
    }

    pub fn thin_set(&self) -> &VertexSet {
        &self.thin
    }

    /// Member directions at `v` as indices into the direction table.
    pub fn member_dirs(&self, v: usize) -> Vec<usize> {
        (0..self.table.dir_count()).filter(|&j| self.member_bit(v, j)).collect()
    }
}

/// The discrete causal structure of a scene at one enlargement.
#[derive(Debug)]
pub struct CausalGraph {
    grid: ManifoldGrid,
    enlargement: Enlargement,
    stencil: usize,
    graph: Digraph,
    /// Per out-edge (CSR order): which stencil offset realizes it.
    out_offset_ids: Vec<u16>,
    offsets: Vec<Vec<i64>>,
    offset_norms: Vec<f64>,
    singular: VertexSet,
    thin: VertexSet,
    scc_cache: OnceLock<SccDecomposition>,
}

impl CausalGraph {
    /// Admission rule: x -> y (a stencil step with offset o) is an edge iff
    /// some probe x' within Chebyshev distance r of x satisfies one of
    ///   (a) the step's displacement is a member of the cone at x',
    ///   (b) the cone at x' is singular,
    ///   (c) some sampled member direction at x' lies within angle theta of
    ///       the step's direction.
    pub fn build(grid: &ManifoldGrid, membership: &MembershipField, e: Enlargement) -> Self {
        assert!(e.theta >= 0.0, "enlargement angle must be nonnegative");
        let n = grid.len();
        let table = membership.table();
        let stencil_len = table.stencil_len();
        let cos_theta = if e.theta >= std::f64::consts::PI { -1.0 } else { e.theta.cos() };
        let ball: Vec<Vec<i64>> = if e.r == 0 {
            vec![vec![0; grid.dim()]]
        } else {
            let mut b = vec![vec![0; grid.dim()]];
            b.extend(stencil_offsets(grid.dim(), e.r));
            b
        };

        let per_vertex: Vec<Vec<(u32, u16)>> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut probes: Vec<usize> = Vec::with_capacity(ball.len());
                for b in &ball {
                    if let Some(p) = grid.offset_target(x, b) {
                        probes.push(p);
                    }
                }
                probes.dedup();
                let mut edges: Vec<(u32, u16)> = Vec::new();
                for (o, offset) in table.offsets().iter().enumerate() {
                    let Some(y) = grid.offset_target(x, offset) else { continue };
                    if y == x {
                        continue;
                    }
                    let mut admitted = false;
                    'probe: for &p in &probes {
                        if membership.is_singular(p) || membership.member_bit(p, o) {
                            admitted = true;
                            break 'probe;
                        }
                        if e.theta > 0.0 {
                            let row = membership.mask_row(p);
                            for &(dot, j) in &table.near[o] {
                                if dot < cos_theta {
                                    break;
                                }
                                if row[j as usize / 64] >> (j % 64) & 1 == 1 {
                                    admitted = true;
                                    break 'probe;
                                }
                            }
                        }
                    }
                    if admitted {
                        edges.push((y as u32, o as u16));
                    }
                }
                edges.sort_unstable();
                edges
            })
            .collect();

        let lists: Vec<Vec<u32>> =
            per_vertex.iter().map(|es| es.iter().map(|&(y, _)| y).collect()).collect();
        let out_offset_ids: Vec<u16> =
            per_vertex.iter().flat_map(|es| es.iter().map(|&(_, o)| o)).collect();
        let graph = Digraph::from_sorted_lists(lists);
        debug_assert_eq!(graph.edge_count(), out_offset_ids.len());

        Self {
            grid: grid.clone(),
            enlargement: e,
            stencil: membership.stencil(),
            graph,
            out_offset_ids,
            offsets: table.offsets().to_vec(),
            offset_norms: (0..stencil_len).map(|i| table.offset_norm(i)).collect(),
            singular: membership.singular_set().clone(),
            thin: membership.thin_set().clone(),
            scc_cache: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn enlargement(&self) -> Enlargement {
        self.enlargement
    }

    pub fn stencil(&self) -> usize {
        self.stencil
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn digraph(&self) -> &Digraph {
        &self.graph
    }

    pub fn out(&self, v: usize) -> &[u32] {
        self.graph.out(v)
    }

    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        self.graph.in_neighbors(v)
    }

    /// Out-edges of `v` with the displacement norm of each step.
    pub fn out_with_norms(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.graph.out_heads[v] as usize;
        let hi = self.graph.out_heads[v + 1] as usize;
        (lo..hi).map(move |k| {
            (self.graph.out_targets[k] as usize, self.offset_norms[self.out_offset_ids[k] as usize])
        })
    }

    /// Out-edges of `v` with the stencil offset realizing each step.
    pub fn out_with_offsets(&self, v: usize) -> impl Iterator<Item = (usize, &[i64])> + '_ {
        let lo = self.graph.out_heads[v] as usize;
        let hi = self.graph.out_heads[v + 1] as usize;
        (lo..hi).map(move |k| {
            (
                self.graph.out_targets[k] as usize,
                self.offsets[self.out_offset_ids[k] as usize].as_slice(),
            )
        })
    }

    pub fn singular(&self) -> &VertexSet {
        &self.singular
    }

    /// Vertices whose nonempty cone contains no stencil step (below the
    /// grid's angular resolution).
    pub fn thin_vertices(&self) -> &VertexSet {
        &self.thin
    }

    pub fn reach(&self, sources: &VertexSet, direction: Direction) -> VertexSet {
        self.graph.reach(sources, direction)
    }

    pub fn reach_from(&self, v: usize, direction: Direction) -> VertexSet {
        let sources = VertexSet::from_indices(self.vertex_count(), [v]);
        self.graph.reach(&sources, direction)
    }

    /// Vertices reachable through at least one edge; contains `x` itself
    /// exactly when x lies on a cycle.
    pub fn strict_reach(&self, x: usize) -> VertexSet {
        let mut seeds = VertexSet::new(self.vertex_count());
        for &w in self.graph.out(x) {
            seeds.insert(w as usize);
        }
        if seeds.is_empty() {
            return seeds;
        }
        self.graph.reach(&seeds, Direction::Forward)
    }

    pub fn scc(&self) -> &SccDecomposition {
        self.scc_cache.get_or_init(|| self.graph.scc())
    }

    /// Vertices on cycles, plus singular vertices (no function can increase
    /// across a full tangent space, so they are critical for every Lyapunov
    /// field regardless of cycles).
    pub fn recurrent_set(&self) -> VertexSet {
        let mut set = self.scc().nontrivial_vertices();
        set.union_with(&self.singular);
        set
    }

    pub fn is_acyclic(&self) -> bool {
        !self.scc().any_nontrivial()
    }
}
