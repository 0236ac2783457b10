//! Deterministic quasi-uniform unit-direction samples per dimension.

/// Default sample counts; chosen so neighboring samples are a few degrees
/// apart, well below the angular enlargements the graphs use.
pub fn default_sphere_samples(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 256,
        3 => 1024,
        _ => 4096,
    }
}

/// `m` quasi-uniform unit vectors in dimension `dim` (1 through 4). The
/// sample is a pure function of its arguments.
pub fn sphere_sample(dim: usize, m: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..m)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(m),
        4 => gaussian_sphere(4, m),
        _ => panic!("dimension {dim} unsupported"),
    }
}

fn fibonacci_sphere(m: usize) -> Vec<Vec<f64>> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..m)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = std::f64::consts::TAU * (k as f64 / golden).fract();
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Normalized Gaussian vectors from a fixed-seed generator; the rotation
/// invariance of the Gaussian makes the sample uniform on the sphere.
fn gaussian_sphere(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(0x51ab_35e3_9c1d_f00d);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let v: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        out.push(v.into_iter().map(|c| c / norm).collect());
    }
    out
}

struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed, spare: None }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn next_unit(&mut self) -> f64 {
        // 53 uniform bits in (0, 1].
        ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        let u = self.next_unit();
        let v = self.next_unit();
        let r = (-2.0 * u.ln()).sqrt();
        let a = std::f64::consts::TAU * v;
        self.spare = Some(r * a.sin());
        r * a.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_units(sample: &[Vec<f64>], dim: usize) {
        for u in sample {
            assert_eq!(u.len(), dim);
            let norm: f64 = u.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_are_unit_and_sized() {
        check_units(&sphere_sample(1, 2), 1);
        let s2 = sphere_sample(2, 256);
        assert_eq!(s2.len(), 256);
        check_units(&s2, 2);
        let s3 = sphere_sample(3, 1024);
        assert_eq!(s3.len(), 1024);
        check_units(&s3, 3);
        let s4 = sphere_sample(4, 512);
        assert_eq!(s4.len(), 512);
        check_units(&s4, 4);
    }

    #[test]
    fn deterministic() {
        assert_eq!(sphere_sample(4, 64), sphere_sample(4, 64));
        assert_eq!(sphere_sample(3, 128), sphere_sample(3, 128));
    }

    /// Every direction should have a sample within a modest angle; this is
    /// what bounds the classification error.
    #[test]
    fn covering_resolution() {
        let s3 = sphere_sample(3, 1024);
        let probes = sphere_sample(3, 257);
        for p in &probes {
            let best = s3
                .iter()
                .map(|u| u.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::MIN, f64::max);
            assert!(best.acos() < 0.12, "gap {} rad", best.acos());
        }
    }

    #[test]
    fn octant_balance_2d() {
        let s2 = sphere_sample(2, 256);
        let upper = s2.iter().filter(|u| u[1] > 0.0).count();
        assert!((120..=136).contains(&upper));
    }
}
