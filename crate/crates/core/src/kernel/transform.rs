use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::series::CoeffWindow;
use super::{ClosedFormKernel, Domain, Kernel, Point, SeriesKernel, SeriesKind};
use crate::error::{Error, Result};
use crate::mobius::DiscAutomorphism;

/// `(1 - z conj(w)) K(z, w)` for a disc kernel, kept as a signed coefficient series.
///
/// The coefficients are `b_0 = a_0`, `b_n = a_n - a_{n-1}` over the window of
/// `K`; the single term `-a_N (z conj w)^{N+1}` produced by the truncation edge
/// is dropped, consistent with the tail tolerance of the source kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct TildeKernel {
    window: CoeffWindow,
    all_nonnegative: bool,
}

impl TildeKernel {
    pub fn coeffs(&self) -> &[f64] {
        &self.window.coeffs
    }

    pub fn b(&self, n: usize) -> Option<f64> {
        self.window.coeffs.get(n).copied()
    }

    pub fn all_nonnegative(&self) -> bool {
        self.all_nonnegative
    }

    /// Most negative coefficient and its index, if any coefficient is negative.
    pub fn most_negative(&self) -> Option<(usize, f64)> {
        self.window
            .coeffs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, b)| b < 0.0)
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

impl Kernel for TildeKernel {
    fn domain(&self) -> Domain {
        Domain::Disc
    }

    fn max_jet_order(&self) -> Option<usize> {
        None
    }

    fn deriv(&self, z: Point, w: Point, p: usize, q: usize) -> Result<Complex64> {
        Domain::Disc.check(z)?;
        Domain::Disc.check(w)?;
        self.window.sum(z, w, p, q)
    }
}

pub fn tilde_kernel(kernel: &SeriesKernel) -> Result<TildeKernel> {
    if kernel.kind() != SeriesKind::DiscDiagonal {
        return Err(Error::InvalidKernel(
            "the tilde transform is defined for disc kernels only".into(),
        ));
    }
    let a = kernel.coeffs();
    let coeffs: Vec<f64> = (0..a.len())
        .map(|n| if n == 0 { a[0] } else { a[n] - a[n - 1] })
        .collect();
    let all_nonnegative = coeffs.iter().all(|&b| b >= 0.0);
    Ok(TildeKernel {
        window: CoeffWindow { n_min: 0, coeffs },
        all_nonnegative,
    })
}

/// Radii of the circles around the center on which non-vanishing is sampled.
const NORMALIZATION_RADII: [f64; 2] = [0.05, 0.1];
const NORMALIZATION_SAMPLES: usize = 10;

fn binomial(n: usize, k: usize) -> f64 {
    match (n, k) {
        (_, 0) => 1.0,
        (n, k) if k == n => 1.0,
        (2, 1) => 2.0,
        _ => unreachable!("orders above 2 are refused earlier"),
    }
}

/// Derivatives `g, g', g''` of `g = 1 / K(., center)` at `z`.
fn reciprocal_derivs(kernel: &dyn Kernel, z: Point, center: Point) -> Result<[Complex64; 3]> {
    let k0 = kernel.deriv(z, center, 0, 0)?;
    let k1 = kernel.deriv(z, center, 1, 0)?;
    let k2 = kernel.deriv(z, center, 2, 0)?;
    let g = k0.inv();
    Ok([g, -k1 * g * g, 2.0 * k1 * k1 * g * g * g - k2 * g * g])
}

/// `K(zeta, zeta) K(z, w) / (K(z, zeta) conj(K(w, zeta)))`, the kernel normalized at `zeta`.
///
/// Non-vanishing of `K(., zeta)` is sampled on two small circles around
/// `zeta`; points of the circles outside the domain are skipped.
pub fn normalize_at(kernel: Arc<dyn Kernel>, center: Point) -> Result<ClosedFormKernel> {
    let domain = kernel.domain();
    domain.check(center)?;
    let k_cc = kernel.eval(center, center)?.re;
    if !(k_cc > 0.0) {
        return Err(Error::DegenerateKernel { value: k_cc });
    }
    for &radius in NORMALIZATION_RADII.iter() {
        for j in 0..NORMALIZATION_SAMPLES {
            let z = center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / NORMALIZATION_SAMPLES as f64);
            if !domain.contains(z) {
                continue;
            }
            let v = kernel.eval(z, center)?.norm();
            let scale = (kernel.eval(z, z)?.re * k_cc).sqrt();
            if !(v > 1e-8 * scale) {
                return Err(Error::KernelVanishesNearCenter { value: v });
            }
        }
    }
    let inner = kernel;
    Ok(ClosedFormKernel::new(domain, move |z, w, p, q| {
        let gz = reciprocal_derivs(inner.as_ref(), z, center)?;
        let gw = reciprocal_derivs(inner.as_ref(), w, center)?;
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..=p {
            for j in 0..=q {
                let kij = inner.deriv(z, w, i, j)?;
                total += kij * gz[p - i] * gw[q - j].conj() * (binomial(p, i) * binomial(q, j));
            }
        }
        Ok(total * k_cc)
    }))
}

/// `L(z, w) = K(psi(z), psi(w))` with `psi` the inverse of `phi_a(z) = (z - a)/(1 - conj(a) z)`.
pub fn mobius_pullback(kernel: Arc<dyn Kernel>, a: Point) -> Result<ClosedFormKernel> {
    if kernel.domain() != Domain::Disc {
        return Err(Error::InvalidKernel("Moebius pullback needs a disc kernel".into()));
    }
    let phi = DiscAutomorphism::new(a)?;
    Ok(ClosedFormKernel::new(Domain::Disc, move |z, w, p, q| {
        // Faa di Bruno up to second order: b[p][i] multiplies the i-th derivative of K.
        let chain = |x: Point| {
            let (d1, d2) = phi.inverse_derivatives(x);
            let zero = Complex64::new(0.0, 0.0);
            [
                [Complex64::new(1.0, 0.0), zero, zero],
                [zero, d1, zero],
                [zero, d2, d1 * d1],
            ]
        };
        let (bz, bw) = (chain(z), chain(w));
        let (u, v) = (phi.inverse(z), phi.inverse(w));
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..=p {
            for j in 0..=q {
                let coef = bz[p][i] * bw[q][j].conj();
                if coef != Complex64::new(0.0, 0.0) {
                    total += coef * kernel.deriv(u, v, i, j)?;
                }
            }
        }
        Ok(total)
    }))
}
