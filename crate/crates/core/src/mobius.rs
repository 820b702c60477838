//! Automorphisms of the unit disc, `phi_a(z) = (z - a) / (1 - conj(a) z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscAutomorphism {
    center: Complex64,
}

impl DiscAutomorphism {
    /// The automorphism sending `center` to the origin.
    pub fn new(center: Complex64) -> Result<Self> {
        let modulus = center.norm();
        if !(modulus < 1.0) {
            return Err(Error::CenterOutsideDisc { modulus });
        }
        Ok(Self { center })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z - self.center) / (1.0 - self.center.conj() * z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = 1.0 - self.center.conj() * z;
        (1.0 - self.center.norm_sqr()) / (d * d)
    }

    pub fn inverse(&self, z: Complex64) -> Complex64 {
        (z + self.center) / (1.0 + self.center.conj() * z)
    }

    /// First two derivatives of the inverse map at `z`.
    pub fn inverse_derivatives(&self, z: Complex64) -> (Complex64, Complex64) {
        let a_bar = self.center.conj();
        let s = 1.0 - self.center.norm_sqr();
        let d = 1.0 + a_bar * z;
        let d1 = s / (d * d);
        let d2 = -2.0 * a_bar * s / (d * d * d);
        (d1, d2)
    }

    /// Taylor coefficients at 0 of the inverse map, `len` terms.
    pub fn inverse_taylor(&self, len: usize) -> Vec<Complex64> {
        // (z + a)/(1 + a_bar z) = a + (1 - |a|^2) sum_{k>=1} (-a_bar)^{k-1} z^k
        let a = self.center;
        let s = 1.0 - a.norm_sqr();
        let mut out = Vec::with_capacity(len);
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 0..len {
            if k == 0 {
                out.push(a);
            } else {
                out.push(pow * s);
                pow *= -a.conj();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let phi = DiscAutomorphism::new(Complex64::new(0.3, -0.4)).unwrap();
        let z = Complex64::new(-0.2, 0.5);
        assert!((phi.inverse(phi.apply(z)) - z).norm() < 1e-15);
        assert!(phi.apply(phi.center()).norm() < 1e-16);
    }

    #[test]
    fn derivative_at_center() {
        let a = Complex64::new(0.5, 0.0);
        let phi = DiscAutomorphism::new(a).unwrap();
        assert!((phi.derivative(a).norm() - 1.0 / 0.75).abs() < 1e-14);
    }

    #[test]
    fn inverse_derivatives_match_finite_differences() {
        let phi = DiscAutomorphism::new(Complex64::new(0.2, 0.6)).unwrap();
        let z = Complex64::new(0.1, -0.3);
        let h = 1e-5;
        let fd1 = (phi.inverse(z + h) - phi.inverse(z - h)) / (2.0 * h);
        let fd2 = (phi.inverse(z + h) - 2.0 * phi.inverse(z) + phi.inverse(z - h)) / (h * h);
        let (d1, d2) = phi.inverse_derivatives(z);
        assert!((d1 - fd1).norm() < 1e-9);
        assert!((d2 - fd2).norm() < 1e-5);
    }

    #[test]
    fn taylor_series_sums_to_inverse() {
        let phi = DiscAutomorphism::new(Complex64::new(-0.3, 0.2)).unwrap();
        let z = Complex64::new(0.25, 0.1);
        let coeffs = phi.inverse_taylor(80);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        for c in coeffs {
            sum += c * zk;
            zk *= z;
        }
        assert!((sum - phi.inverse(z)).norm() < 1e-14);
    }

    #[test]
    fn rejects_boundary_center() {
        assert!(DiscAutomorphism::new(Complex64::new(1.0, 0.0)).is_err());
    }
}
