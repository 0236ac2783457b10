//! Pointwise cone classification.
//!
//! A cone is sampled on a fixed set of unit directions. No member direction
//! means a degenerate (empty) cone; all directions members means a singular
//! (full) cone. Otherwise the cone is regular exactly when some linear form
//! is positive on every member direction, and the best such form is found
//! through the minimum-norm point of the members' convex hull: iteratively
//! pulling the current candidate toward the worst-scoring member converges
//! to it, and the normalized candidate certifies the margin it achieves.

use thiserror::Error;

use super::directions::sphere_sample;
use super::eval::EvalError;
use super::{ConeClass, ConeSpec, Witness};

pub const DEFAULT_GAMMA_MIN: f64 = 1e-3;

/// Absolute optimality slack for the minimum-norm-point search.
const EPS_OPT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "no separating direction with margin >= {gamma_min} after {iterations} iterations: \
     the sampled cone is not contained in an open half space"
)]
pub struct BorderlineRegular {
    pub iterations: usize,
    pub gamma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Borderline(#[from] BorderlineRegular),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How hard to work on the separating direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginMode {
    /// Stop at the first certificate with margin >= gamma_min. Used by scene
    /// validation, where only the kind matters.
    Certify,
    /// Iterate until the certified margin is within a small relative gap of
    /// the best achievable one.
    Optimal,
}

/// Classify the cone at point `x` on `m` quasi-uniform sphere directions
/// plus the coordinate axes.
pub fn classify_cone_at(spec: &ConeSpec, x: &[f64], m: usize) -> Result<ConeClass, ClassifyError> {
    let dim = spec.dim();
    assert!(m >= 2 * dim, "need at least {} directions", 2 * dim);
    let mut units = sphere_sample(dim, m);
    let mut axis_pairs = Vec::new();
    if dim > 1 {
        for k in 0..dim {
            let mut plus = vec![0.0; dim];
            plus[k] = 1.0;
            let mut minus = vec![0.0; dim];
            minus[k] = -1.0;
            axis_pairs.push((units.len(), units.len() + 1));
            units.push(plus);
            units.push(minus);
        }
    } else {
        axis_pairs.push((0, 1));
    }
    let mut mask = vec![false; units.len()];
    for (u, slot) in units.iter().zip(&mut mask) {
        *slot = spec.member(x, u)?;
    }
    Ok(classify_mask(&units, &mask, &axis_pairs, DEFAULT_GAMMA_MIN, MarginMode::Optimal)?)
}

/// Classify from a precomputed membership mask over `units`.
/// `antipodes` lists index pairs known to be opposite directions; a cone
/// containing both members of a pair can have no separator, so those are
/// rejected without iterating.
pub fn classify_mask(
    units: &[Vec<f64>],
    mask: &[bool],
    antipodes: &[(usize, usize)],
    gamma_min: f64,
    mode: MarginMode,
) -> Result<ConeClass, BorderlineRegular> {
    debug_assert_eq!(units.len(), mask.len());
    let members: Vec<usize> = (0..units.len()).filter(|&i| mask[i]).collect();
    if members.is_empty() {
        return Ok(ConeClass::degenerate());
    }
    if members.len() == units.len() {
        return Ok(ConeClass::singular());
    }
    for &(i, j) in antipodes {
        if mask[i] && mask[j] {
            return Err(BorderlineRegular { iterations: 0, gamma_min });
        }
    }

    let dim = units[0].len();
    let cap = (10.0 / (gamma_min * gamma_min)).ceil() as usize;
    let pts: Vec<&[f64]> = members.iter().map(|&i| units[i].as_slice()).collect();

    // Minimum-norm point of conv(pts), maintained as a convex combination
    // over a small affinely independent corral. Each round pulls in the
    // worst-scoring member and re-solves exactly over the corral's affine
    // hull, shrinking back to the convex hull when a coefficient dips below
    // zero. The certificate at exit is checked directly against every
    // member, so a numerical stall can only make the verdict pessimistic.
    let mut corral: Vec<usize> = vec![0];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut w: Vec<f64> = pts[0].to_vec();
    let mut iterations = 0usize;
    let verdict = loop {
        iterations += 1;
        let norm = dot(&w, &w).sqrt();
        // The minimum norm over the hull bounds every achievable margin,
        // so a short w already refutes gamma_min.
        if norm < gamma_min {
            return Err(BorderlineRegular { iterations, gamma_min });
        }
        let mut worst = f64::MAX;
        let mut worst_at = 0usize;
        for (i, p) in pts.iter().enumerate() {
            let s = dot(&w, p);
            if s < worst {
                worst = s;
                worst_at = i;
            }
        }
        let certified = worst / norm;
        if matches!(mode, MarginMode::Certify) && certified >= gamma_min {
            break certified;
        }
        // w is the projection of the origin iff no member scores below
        // |w|^2 against it.
        if worst >= norm * norm - EPS_OPT {
            break certified;
        }
        if iterations > cap || corral.contains(&worst_at) {
            break certified;
        }
        corral.push(worst_at);
        lambda.push(0.0);
        // Restore w to the convex hull of the corral.
        loop {
            let Some(mu) = affine_min_norm(&pts, &corral, dim) else {
                // Degenerate Gram system; keep the current point.
                break;
            };
            if mu.iter().all(|&c| c >= -1e-12) {
                lambda = mu.iter().map(|&c| c.max(0.0)).collect();
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m < 0.0 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * m;
            }
            let mut k = 0;
            let mut dropped = false;
            while k < corral.len() {
                if lambda[k] <= 1e-12 && corral.len() > 1 {
                    corral.remove(k);
                    lambda.remove(k);
                    dropped = true;
                } else {
                    k += 1;
                }
            }
            if !dropped {
                break;
            }
        }
        let total: f64 = lambda.iter().sum();
        if total < 1e-9 {
            // Numerical collapse; restart from the worst member alone.
            corral = vec![worst_at];
            lambda = vec![1.0];
        } else {
            for l in &mut lambda {
                *l /= total;
            }
        }
        for c in &mut w {
            *c = 0.0;
        }
        for (l, &i) in lambda.iter().zip(&corral) {
            for k in 0..dim {
                w[k] += l * pts[i][k];
            }
        }
    };
    if verdict >= gamma_min {
        let norm = dot(&w, &w).sqrt();
        let p: Vec<f64> = w.iter().map(|c| c / norm).collect();
        return Ok(ConeClass::regular(Witness { p, margin: verdict }));
    }
    Err(BorderlineRegular { iterations, gamma_min })
}

/// Minimum-norm point of the affine hull of the corral, returned as affine
/// coefficients; None when the bordered Gram system is numerically singular.
fn affine_min_norm(pts: &[&[f64]], corral: &[usize], dim: usize) -> Option<Vec<f64>> {
    let k = corral.len();
    let n = k + 1;
    // Bordered system: minimize mu' G mu subject to sum(mu) = 1.
    let mut m = vec![0.0f64; n * n];
    let mut rhs = vec![0.0f64; n];
    rhs[0] = 1.0;
    for j in 0..k {
        m[j + 1] = 1.0;
        m[(j + 1) * n] = 1.0;
        for i in 0..k {
            let mut g = 0.0;
            for c in 0..dim {
                g += pts[corral[i]][c] * pts[corral[j]][c];
            }
            m[(i + 1) * n + (j + 1)] = g;
        }
    }
    solve_dense(&mut m, &mut rhs, n)?;
    Some(rhs[1..].to_vec())
}

/// Gaussian elimination with partial pivoting on a small dense system;
/// solution is written into `rhs`.
fn solve_dense(m: &mut [f64], rhs: &mut [f64], n: usize) -> Option<()> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| {
            m[a * n + col].abs().partial_cmp(&m[b * n + col].abs()).unwrap()
        })?;
        if m[pivot * n + col].abs() < 1e-13 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            rhs.swap(col, pivot);
        }
        let diag = m[col * n + col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[row * n + j] -= f * m[col * n + j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for col in 0..n {
        rhs[col] /= m[col * n + col];
    }
    Some(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Membership must agree across rescalings of the tangent vector.
#[derive(Debug, Clone)]
pub struct HomogeneityReport {
    pub ok: bool,
    /// (point, direction, scale) triples where membership flipped.
    pub counterexamples: Vec<(Vec<f64>, Vec<f64>, f64)>,
}

pub fn validate_homogeneity(
    spec: &ConeSpec,
    points: &[Vec<f64>],
    dirs: &[Vec<f64>],
) -> HomogeneityReport {
    const SCALES: [f64; 2] = [0.5, 2.0];
    let mut counterexamples = Vec::new();
    'outer: for x in points {
        for v in dirs {
            let base = spec.member(x, v).unwrap_or(false);
            for s in SCALES {
                let scaled: Vec<f64> = v.iter().map(|c| c * s).collect();
                if spec.member(x, &scaled).unwrap_or(false) != base {
                    counterexamples.push((x.clone(), v.clone(), s));
                    if counterexamples.len() >= 16 {
                        break 'outer;
                    }
                }
            }
        }
    }
    HomogeneityReport { ok: counterexamples.is_empty(), counterexamples }
}

/// Spot-check convexity at `x`: normalized midpoints of random member pairs
/// should again be members. Returns the offending pairs (warn-level; nearly
/// antipodal pairs are skipped as directionless).
pub fn convexity_spot_check(
    spec: &ConeSpec,
    x: &[f64],
    member_units: &[Vec<f64>],
    pairs: usize,
    seed: u64,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, EvalError> {
    if member_units.len() < 2 {
        return Ok(Vec::new());
    }
    let mut state = seed | 1;
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state.wrapping_mul(0x2545_f491_4f6c_dd1d)
    };
    let mut violations = Vec::new();
    for _ in 0..pairs {
        let i = (next() % member_units.len() as u64) as usize;
        let j = (next() % member_units.len() as u64) as usize;
        if i == j {
            continue;
        }
        let u = &member_units[i];
        let w = &member_units[j];
        let mid: Vec<f64> = u.iter().zip(w).map(|(a, b)| a + b).collect();
        let norm = dot(&mid, &mid).sqrt();
        if norm < 1e-9 {
            continue;
        }
        let mid: Vec<f64> = mid.iter().map(|c| c / norm).collect();
        if !spec.member(x, &mid)? {
            violations.push((u.clone(), w.clone()));
            if violations.len() >= 16 {
                break;
            }
        }
    }
    Ok(violations)
}
