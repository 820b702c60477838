//! Reproducible point sets: seeded uniform clouds in a disc and Halton-based
//! unit vectors in `C^d`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::Point;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_CLOUD_SIZE: usize = 50;
pub const DEFAULT_CLOUD_RADIUS: f64 = 0.9;

/// `count` points uniformly distributed (by area) in `|z| <= radius`.
pub fn disc_cloud(seed: u64, count: usize, radius: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
            Complex64::from_polar(radius * u.sqrt(), theta)
        })
        .collect()
}

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= k).all(|&p| !k.is_multiple_of(p)) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// `count` unit vectors in `C^dim`: Halton points in `[0,1)^{2 dim}` mapped to
/// complex Gaussians by Box-Muller, then normalized.
pub fn halton_unit_vectors(dim: usize, count: usize) -> Vec<Vec<Complex64>> {
    let bases = primes(2 * dim);
    (1..=count as u64)
        .filter_map(|i| {
            let v: Vec<Complex64> = (0..dim)
                .map(|d| {
                    let u1 = halton(i, bases[2 * d]).max(f64::MIN_POSITIVE);
                    let u2 = halton(i, bases[2 * d + 1]);
                    Complex64::from_polar((-2.0 * u1.ln()).sqrt(), 2.0 * PI * u2)
                })
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (norm > 0.0).then(|| v.into_iter().map(|z| z / norm).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloud_is_reproducible_and_bounded() {
        let a = disc_cloud(7, 50, 0.9);
        assert_eq!(a, disc_cloud(7, 50, 0.9));
        assert_ne!(a, disc_cloud(8, 50, 0.9));
        assert!(a.iter().all(|z| z.norm() <= 0.9));
    }

    #[test]
    fn halton_base_two() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert_eq!(halton(5, 3), 2.0 / 3.0 + 1.0 / 9.0);
    }

    #[test]
    fn unit_vectors_are_normalized() {
        let vs = halton_unit_vectors(3, 256);
        assert_eq!(vs.len(), 256);
        for v in vs {
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
