use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{check_order, Domain, Kernel, Point};
use crate::error::Result;

type DerivFn = dyn Fn(Point, Point, usize, usize) -> Result<Complex64> + Send + Sync;

/// Kernel given by a caller-supplied derivative evaluator `(z, w, p, q) -> d^p dbar^q K(z, w)`.
///
/// Orders above [`ClosedFormKernel::MAX_ORDER`] are refused rather than
/// approximated. The evaluator takes off-diagonal arguments because
/// normalization at a point needs `d^p K(z, zeta)` with `z != zeta`.
#[derive(Clone)]
pub struct ClosedFormKernel {
    domain: Domain,
    f: Arc<DerivFn>,
}

impl fmt::Debug for ClosedFormKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormKernel")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

fn falling(n: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j as f64))
}

fn binomial(n: usize, k: usize) -> f64 {
    falling(n as f64, k) / falling(k as f64, k)
}

impl ClosedFormKernel {
    pub const MAX_ORDER: usize = 2;

    pub fn new<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(Point, Point, usize, usize) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            domain,
            f: Arc::new(f),
        }
    }

    /// `scale * (1 - z conj(w))^(-s)` on the disc. `s = 1, scale = 1/2pi` is the
    /// Szego kernel and `s = 2, scale = 1/pi` the Bergman kernel.
    pub fn disc_power(s: f64, scale: f64) -> Self {
        Self::new(Domain::Disc, move |z, w, p, q| {
            let u = z * w.conj();
            // g^{(j)}(u) for g(u) = (1 - u)^{-s}
            let g = |j: usize| (1.0 - u).powf(-s - j as f64) * (0..j).fold(1.0, |a, i| a * (s + i as f64));
            // d^p_z gives conj(w)^p g^{(p)}(u); then Leibniz in conj(w).
            let mut total = Complex64::new(0.0, 0.0);
            for k in 0..=q.min(p) {
                let wpow = w.conj().powi((p - k) as i32) * falling(p as f64, k);
                total += wpow * z.powi((q - k) as i32) * g(p + q - k) * binomial(q, k);
            }
            Ok(total * scale)
        })
    }
}

impl Kernel for ClosedFormKernel {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn max_jet_order(&self) -> Option<usize> {
        Some(Self::MAX_ORDER)
    }

    fn deriv(&self, z: Point, w: Point, p: usize, q: usize) -> Result<Complex64> {
        check_order(Some(Self::MAX_ORDER), p, q)?;
        self.domain.check(z)?;
        self.domain.check(w)?;
        (self.f)(z, w, p, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::kernel::SeriesKernel;

    #[test]
    fn power_kernels_match_series() {
        let z = Point::new(0.3, -0.2);
        let w = Point::new(-0.1, 0.45);
        let pairs = [
            (ClosedFormKernel::disc_power(1.0, 1.0), SeriesKernel::geometric(200)),
            (ClosedFormKernel::disc_power(2.0, 1.0), SeriesKernel::bergman_type(200)),
        ];
        for (closed, series) in pairs.iter() {
            for p in 0..=2 {
                for q in 0..=2 {
                    let a = closed.deriv(z, w, p, q).unwrap();
                    let b = series.deriv(z, w, p, q).unwrap();
                    assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{p} {q}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn refuses_third_order() {
        let k = ClosedFormKernel::disc_power(1.0, 1.0);
        assert_eq!(
            k.mixed_deriv(Point::new(0.0, 0.0), 3, 0),
            Err(Error::UnsupportedJetOrder { p: 3, q: 0, max: 2 })
        );
    }
}
