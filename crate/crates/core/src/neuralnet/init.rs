use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Fills `out` with draws from N(0, sqrt(2 / fan_in)).
pub fn he_normal_fill<R: Rng + ?Sized>(fan_in: usize, out: &mut [f64], rng: &mut R) {
    normal_fill((2.0 / fan_in.max(1) as f64).sqrt(), out, rng);
}

/// Fills `out` with draws from U(-l, l), `l = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform_fill<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, out: &mut [f64], rng: &mut R) {
    let limit = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
    for v in out {
        *v = rng.random_range(-limit..limit);
    }
}

/// A `rows x cols` row-major matrix (`rows >= cols`) with orthonormal columns,
/// from Gram-Schmidt on standard normal draws.
pub fn orthogonal_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    assert!(rows >= cols, "need rows >= cols for orthonormal columns");
    let mut m = vec![0.0; rows * cols];
    normal_fill(1.0, &mut m, rng);
    for c in 0..cols {
        for prev in 0..c {
            let proj: f64 = (0..rows).map(|r| m[r * cols + c] * m[r * cols + prev]).sum();
            for r in 0..rows {
                m[r * cols + c] -= proj * m[r * cols + prev];
            }
        }
        let norm = (0..rows).map(|r| m[r * cols + c].powi(2)).sum::<f64>().sqrt();
        for r in 0..rows {
            m[r * cols + c] /= norm;
        }
    }
    m
}

fn normal_fill<R: Rng + ?Sized>(sd: f64, out: &mut [f64], rng: &mut R) {
    let dist = Normal::new(0.0, sd).expect("finite positive deviation");
    for v in out {
        *v = dist.sample(rng);
    }
}

/// `count` He-normal draws for a layer with `fan_in` inputs, reproducible per seed.
pub fn he_normal_init(fan_in: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; count];
    he_normal_fill(fan_in, &mut out, &mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sd(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    }

    #[test]
    fn deviation_follows_fan_in() {
        let a = he_normal_init(2, 100_000, 1);
        assert!((sd(&a) - 1.0).abs() < 0.02);
        let b = he_normal_init(200, 100_000, 2);
        assert!((sd(&b) - 0.1).abs() < 0.002);
        assert_eq!(he_normal_init(200, 50, 5), he_normal_init(200, 50, 5));
        assert_ne!(he_normal_init(200, 50, 5), he_normal_init(200, 50, 6));
    }

    #[test]
    fn orthogonal_columns_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (rows, cols) = (24, 6);
        let m = orthogonal_columns(rows, cols, &mut rng);
        for a in 0..cols {
            for b in 0..cols {
                let d: f64 = (0..rows).map(|r| m[r * cols + a] * m[r * cols + b]).sum();
                assert!((d - f64::from(u8::from(a == b))).abs() < 1e-12);
            }
        }
    }
}
