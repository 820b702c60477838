use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Domain, Kernel, Point, TAIL_TOLERANCE};
use crate::error::{Error, Result};

/// Default truncation: `0..=200` on the disc, `-200..=200` on the annulus.
pub const DEFAULT_N_MAX: i64 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    DiscDiagonal,
    AnnulusLaurent,
}

/// Falling factorial `n (n-1) ... (n-k+1)`; valid for negative `n` as well.
fn falling(n: i64, k: usize) -> f64 {
    (0..k as i64).fold(1.0, |acc, j| acc * (n - j) as f64)
}

/// Coefficient window `sum_{n = n_min}^{n_min + len - 1} c_n z^n conj(w)^n`
/// with term-wise differentiation and a geometric estimate of the truncation tail.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CoeffWindow {
    pub n_min: i64,
    pub coeffs: Vec<f64>,
}

impl CoeffWindow {
    pub fn n_max(&self) -> i64 {
        self.n_min + self.coeffs.len() as i64 - 1
    }

    fn term(&self, idx: usize, z: Point, w: Point, p: usize, q: usize) -> Complex64 {
        let n = self.n_min + idx as i64;
        let f = falling(n, p) * falling(n, q);
        if f == 0.0 || self.coeffs[idx] == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let zp = z.powi((n - p as i64) as i32);
        let wq = w.conj().powi((n - q as i64) as i32);
        zp * wq * (self.coeffs[idx] * f)
    }

    fn term_magnitude(&self, idx: usize, rz: f64, rw: f64, p: usize, q: usize) -> f64 {
        let n = self.n_min + idx as i64;
        let f = (falling(n, p) * falling(n, q)).abs();
        if f == 0.0 || self.coeffs[idx] == 0.0 {
            return 0.0;
        }
        self.coeffs[idx].abs() * f * rz.powi((n - p as i64) as i32) * rw.powi((n - q as i64) as i32)
    }

    /// Geometric estimate of the neglected terms beyond one end of the window.
    /// The decay rate is read off block sums of the last `2h` terms, so that
    /// isolated zero or irregular coefficients do not spoil it.
    fn tail_estimate(&self, upper: bool, rz: f64, rw: f64, p: usize, q: usize) -> f64 {
        let len = self.coeffs.len();
        let h = (len / 2).clamp(1, 8);
        let mag = |k: usize| {
            let idx = if upper { len - 1 - k } else { k };
            self.term_magnitude(idx, rz, rw, p, q)
        };
        let near: Vec<f64> = (0..h).map(mag).collect();
        let far: f64 = (h..2 * h).map(mag).sum();
        let near_sum: f64 = near.iter().sum();
        if near_sum == 0.0 {
            return 0.0;
        }
        let ratio = if far == 0.0 {
            // Fall back to the bare geometric factor of the monomials.
            let rho = rz * rw;
            if upper { rho } else { 1.0 / rho }
        } else {
            (near_sum / far).powf(1.0 / h as f64)
        };
        let last = near.iter().fold(0.0f64, |m, &v| m.max(v));
        geometric_tail(last, ratio)
    }

    pub fn sum(&self, z: Point, w: Point, p: usize, q: usize) -> Result<Complex64> {
        let len = self.coeffs.len();
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for idx in 0..len {
            let t = self.term(idx, z, w, p, q);
            scale += t.norm();
            total += t;
        }
        let (rz, rw) = (z.norm(), w.norm());
        let mut tail = 0.0;
        if len >= 2 {
            tail += self.tail_estimate(true, rz, rw, p, q);
            if self.n_min < 0 {
                tail += self.tail_estimate(false, rz, rw, p, q);
            }
        }
        let limit = TAIL_TOLERANCE * scale;
        if tail > limit {
            return Err(Error::TruncationTailTooLarge { tail, limit });
        }
        Ok(total)
    }
}

fn geometric_tail(last: f64, ratio: f64) -> f64 {
    if last == 0.0 {
        0.0
    } else if ratio >= 1.0 || !ratio.is_finite() {
        f64::INFINITY
    } else {
        last * ratio / (1.0 - ratio)
    }
}

/// Diagonal kernel `K(z, w) = sum a_n z^n conj(w)^n` over a finite window of
/// strictly positive coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesKernel {
    kind: SeriesKind,
    window: CoeffWindow,
    inner_radius: Option<f64>,
}

fn validate_coeffs(coeffs: &[f64], n_min: i64) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::InvalidKernel("empty truncation window".into()));
    }
    for (i, &a) in coeffs.iter().enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "coefficient a_{} = {} is not a positive finite number",
                n_min + i as i64,
                a
            )));
        }
    }
    Ok(())
}

impl SeriesKernel {
    /// Disc kernel with coefficients `a_0, a_1, ...`.
    pub fn disc(coeffs: Vec<f64>) -> Result<Self> {
        validate_coeffs(&coeffs, 0)?;
        Ok(Self {
            kind: SeriesKind::DiscDiagonal,
            window: CoeffWindow { n_min: 0, coeffs },
            inner_radius: None,
        })
    }

    pub fn disc_from_fn(n_max: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::disc((0..=n_max).map(f).collect())
    }

    /// `a_n = 1`: the Hardy-space kernel without the `1/2pi` factor.
    pub fn geometric(n_max: usize) -> Self {
        Self::disc(vec![1.0; n_max + 1]).expect("positive coefficients")
    }

    /// `a_n = n + 1`: the Bergman kernel up to the factor `1/pi`.
    pub fn bergman_type(n_max: usize) -> Self {
        Self::disc_from_fn(n_max, |n| (n + 1) as f64).expect("positive coefficients")
    }

    /// Laurent kernel on the annulus `inner_radius < |z| < 1`; `coeffs[i]` is `a_{n_min + i}`.
    pub fn annulus(inner_radius: f64, n_min: i64, coeffs: Vec<f64>) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius < 1.0) {
            return Err(Error::InvalidKernel(format!(
                "inner radius {inner_radius} not in (0, 1)"
            )));
        }
        validate_coeffs(&coeffs, n_min)?;
        Ok(Self {
            kind: SeriesKind::AnnulusLaurent,
            window: CoeffWindow { n_min, coeffs },
            inner_radius: Some(inner_radius),
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn n_min(&self) -> i64 {
        self.window.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.window.n_max()
    }

    pub fn inner_radius(&self) -> Option<f64> {
        self.inner_radius
    }

    /// Coefficients of the window, starting at `n_min`.
    pub fn coeffs(&self) -> &[f64] {
        &self.window.coeffs
    }

    pub fn coeff(&self, n: i64) -> Option<f64> {
        let idx = n - self.window.n_min;
        if idx < 0 {
            return None;
        }
        self.window.coeffs.get(idx as usize).copied()
    }

    /// Iterator over `(n, a_n)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n_min = self.window.n_min;
        self.window
            .coeffs
            .iter()
            .enumerate()
            .map(move |(i, &a)| (n_min + i as i64, a))
    }
}

impl Kernel for SeriesKernel {
    fn domain(&self) -> Domain {
        match self.kind {
            SeriesKind::DiscDiagonal => Domain::Disc,
            SeriesKind::AnnulusLaurent => Domain::Annulus {
                inner_radius: self.inner_radius.unwrap_or(0.0),
            },
        }
    }

    fn max_jet_order(&self) -> Option<usize> {
        None
    }

    fn deriv(&self, z: Point, w: Point, p: usize, q: usize) -> Result<Complex64> {
        let domain = self.domain();
        domain.check(z)?;
        domain.check(w)?;
        self.window.sum(z, w, p, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelJet;

    fn pt(x: f64) -> Point {
        Point::new(x, 0.0)
    }

    #[test]
    fn geometric_at_origin() {
        let k = SeriesKernel::geometric(200);
        assert_eq!(k.eval(pt(0.0), pt(0.0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn geometric_at_half() {
        let k = SeriesKernel::geometric(200);
        let v = k.eval(pt(0.5), pt(0.5)).unwrap();
        assert!((v.re - 4.0 / 3.0).abs() < 1e-14 && v.im == 0.0);
    }

    #[test]
    fn annulus_matches_double_window_sum() {
        let r: f64 = 0.5;
        let coeff = |n: i64| 1.0 / (2.0 * std::f64::consts::PI * (1.0 + r.powi(2 * n as i32 + 1)));
        let narrow: Vec<f64> = (-60..=60).map(coeff).collect();
        let k = SeriesKernel::annulus(r, -60, narrow).unwrap();
        // oracle: direct summation over twice the window
        let z = pt(0.7);
        let oracle: f64 = (-120..=120).map(|n| coeff(n) * 0.49f64.powi(n as i32)).sum();
        let v = k.eval(z, z).unwrap();
        assert!((v.re - oracle).abs() < 1e-13 * oracle);
    }

    #[test]
    fn mixed_derivatives_at_origin() {
        let g = SeriesKernel::geometric(200);
        assert_eq!(g.mixed_deriv(pt(0.0), 1, 1).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(g.mixed_deriv(pt(0.0), 1, 0).unwrap(), Complex64::new(0.0, 0.0));
        let b = SeriesKernel::bergman_type(200);
        assert_eq!(b.mixed_deriv(pt(0.0), 1, 1).unwrap(), Complex64::new(2.0, 0.0));
        // a_2 * 2! * 2! = 12
        assert_eq!(b.mixed_deriv(pt(0.0), 2, 2).unwrap(), Complex64::new(12.0, 0.0));
    }

    #[test]
    fn jets_at_origin() {
        let j = KernelJet::compute(&SeriesKernel::geometric(200), pt(0.0), 1).unwrap();
        assert_eq!(j.values, crate::linalg::real_diag(&[1.0, 1.0]));
        let j = KernelJet::compute(&SeriesKernel::bergman_type(200), pt(0.0), 1).unwrap();
        assert_eq!(j.values, crate::linalg::real_diag(&[1.0, 2.0]));
    }

    #[test]
    fn rejects_points_near_boundary() {
        let k = SeriesKernel::geometric(200);
        assert!(matches!(
            k.eval(pt(0.99), pt(0.0)),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn short_window_reports_large_tail() {
        let k = SeriesKernel::geometric(20);
        assert!(matches!(
            k.eval(pt(0.9), pt(0.9)),
            Err(Error::TruncationTailTooLarge { .. })
        ));
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        assert!(SeriesKernel::disc(vec![1.0, 0.0]).is_err());
        assert!(SeriesKernel::disc(vec![]).is_err());
        assert!(SeriesKernel::annulus(1.5, 0, vec![1.0]).is_err());
    }

    #[test]
    fn annulus_domain_excludes_hole() {
        let k = SeriesKernel::annulus(0.5, -5, vec![1.0; 11]).unwrap();
        assert!(k.eval(pt(0.4), pt(0.7)).is_err());
    }
}
