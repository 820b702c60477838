//! Curvature of the line bundle defined by a kernel, curvature matrices of
//! sampled metric frames, and the Moebius transformation rule.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{mobius_pullback, Kernel, Point};
use crate::linalg::{self, CMatrix};
use crate::mobius::DiscAutomorphism;

/// Finite-difference step of [`curvature_scalar_fd`]; a second level at half
/// this step is combined by Richardson extrapolation.
pub const FD_STEP: f64 = 1e-4;

/// The disc bound `-(1 - |w|^2)^{-2}`, attained by the backward shift.
pub fn extremal_bound(w: Point) -> f64 {
    let s = 1.0 - w.norm_sqr();
    -1.0 / (s * s)
}

/// `-(J00 J11 - |J01|^2) / J00^2`, i.e. `-d dbar log K(w, w)`.
pub fn curvature_scalar<K: Kernel + ?Sized>(kernel: &K, w: Point) -> Result<f64> {
    let jet = kernel.jet(w, 1)?;
    let j00 = jet.get(0, 0).re;
    if !(j00 > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateKernel { value: j00 });
    }
    Ok(-jet.first_order_minor() / (j00 * j00))
}

fn log_diag<K: Kernel + ?Sized>(kernel: &K, x: f64, y: f64) -> Result<f64> {
    let z = Point::new(x, y);
    let v = kernel.eval(z, z)?.re;
    if !(v > 0.0) {
        return Err(Error::DegenerateKernel { value: v });
    }
    Ok(v.ln())
}

fn laplacian<K: Kernel + ?Sized>(kernel: &K, w: Point, h: f64) -> Result<f64> {
    let c = log_diag(kernel, w.re, w.im)?;
    let sum = log_diag(kernel, w.re + h, w.im)?
        + log_diag(kernel, w.re - h, w.im)?
        + log_diag(kernel, w.re, w.im + h)?
        + log_diag(kernel, w.re, w.im - h)?;
    Ok((sum - 4.0 * c) / (h * h))
}

/// Curvature from central differences of `log K(z, z)`: `d dbar = Laplacian / 4`.
pub fn curvature_scalar_fd<K: Kernel + ?Sized>(kernel: &K, w: Point) -> Result<f64> {
    let coarse = laplacian(kernel, w, FD_STEP)?;
    let fine = laplacian(kernel, w, FD_STEP / 2.0)?;
    Ok(-(4.0 * fine - coarse) / 3.0 / 4.0)
}

/// Metric `h` of a holomorphic frame at a point of `C^m`, with first and mixed
/// second derivatives: `dh[i] = d_i h`, `ddh[i][j] = dbar_j d_i h`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricFrameSample {
    pub center: Vec<Point>,
    pub h: CMatrix,
    pub dh: Vec<CMatrix>,
    pub ddh: Vec<Vec<CMatrix>>,
}

impl MetricFrameSample {
    /// The rank-one frame of a scalar kernel at `w`, read off its first-order jet.
    pub fn from_kernel<K: Kernel + ?Sized>(kernel: &K, w: Point) -> Result<Self> {
        let jet = kernel.jet(w, 1)?;
        let one = |v| CMatrix::from_element(1, 1, v);
        Ok(Self {
            center: vec![w],
            h: one(jet.get(0, 0)),
            dh: vec![one(jet.get(1, 0))],
            ddh: vec![vec![one(jet.get(1, 1))]],
        })
    }

    pub fn dim(&self) -> usize {
        self.dh.len()
    }

    pub fn rank(&self) -> usize {
        self.h.nrows()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let (m, n) = (self.dim(), self.rank());
        if m == 0 || n == 0 || self.h.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "metric is {}x{} with {} derivative directions",
                self.h.nrows(),
                self.h.ncols(),
                m
            )));
        }
        if self.ddh.len() != m || self.ddh.iter().any(|row| row.len() != m) {
            return Err(Error::DimensionMismatch("ddh must be an m x m family".into()));
        }
        let square = |a: &CMatrix| a.nrows() == n && a.ncols() == n;
        if !self.dh.iter().all(square) || !self.ddh.iter().flatten().all(square) {
            return Err(Error::DimensionMismatch(format!("all blocks must be {n}x{n}")));
        }
        let scale = linalg::max_abs(&self.h).max(1.0);
        let asym = linalg::asymmetry(&self.h);
        if asym > 1e-10 * scale {
            return Err(Error::NonHermitianInput { asymmetry: asym });
        }
        for i in 0..m {
            for j in 0..m {
                let d = linalg::max_abs(&(&self.ddh[i][j] - self.ddh[j][i].adjoint()));
                let s = linalg::max_abs(&self.ddh[i][j]).max(1.0);
                if d > 1e-10 * s {
                    return Err(Error::NonHermitianInput { asymmetry: d });
                }
            }
        }
        Ok(())
    }

    /// Congruence by `h^{-1/2}`, after which `h = I`.
    pub fn normalized(&self) -> Result<Self> {
        self.validate()?;
        let s = linalg::inverse_sqrt(&self.h)?;
        let conj = |a: &CMatrix| &s * a * &s;
        Ok(Self {
            center: self.center.clone(),
            h: CMatrix::identity(self.rank(), self.rank()),
            dh: self.dh.iter().map(conj).collect(),
            ddh: self.ddh.iter().map(|row| row.iter().map(conj).collect()).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureMatrix {
    pub m: usize,
    pub n: usize,
    /// `blocks[i][j]` is the `(i, j)` curvature block in a frame normalized at the point.
    pub blocks: Vec<Vec<CMatrix>>,
    /// `mn x mn` matrix whose block `(i, j)` is `blocks[j][i]`; Hermitian, and
    /// negative definite for contractive tuples.
    pub assembled: CMatrix,
}

impl CurvatureMatrix {
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.assembled)
    }

    /// The scalar curvature when `m = n = 1`.
    pub fn scalar(&self) -> Option<f64> {
        (self.m == 1 && self.n == 1).then(|| self.assembled[(0, 0)].re)
    }
}

/// `-(dbar_j d_i h - (dbar_j h)(d_i h))` for each block, in a frame with `h(w) = I`.
pub fn curvature_matrix(frame: &MetricFrameSample) -> Result<CurvatureMatrix> {
    let f = frame.normalized()?;
    let (m, n) = (f.dim(), f.rank());
    let mut blocks = vec![vec![CMatrix::zeros(n, n); m]; m];
    let mut assembled = CMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            let b = -(&f.ddh[i][j] - f.dh[j].adjoint() * &f.dh[i]);
            linalg::set_block(&mut assembled, j * n, i * n, &b);
            blocks[i][j] = b;
        }
    }
    Ok(CurvatureMatrix {
        m,
        n,
        blocks,
        assembled,
    })
}

/// `|K_L(phi_a(z)) - K_K(z) |phi_a'(z)|^{-2}|` where `L` is the pullback of `K` by `phi_a^{-1}`.
pub fn mobius_rule_check(kernel: Arc<dyn Kernel>, a: Point, z: Point) -> Result<f64> {
    let phi = DiscAutomorphism::new(a)?;
    let pulled = mobius_pullback(kernel.clone(), a)?;
    let lhs = curvature_scalar(&pulled, phi.apply(z))?;
    let rhs = curvature_scalar(kernel.as_ref(), z)? / phi.derivative(z).norm_sqr();
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SeriesKernel;

    fn p(x: f64) -> Point {
        Point::new(x, 0.0)
    }

    fn scalar_frame(h: f64, dh: f64, ddh: f64) -> MetricFrameSample {
        let one = |v| CMatrix::from_element(1, 1, linalg::c(v, 0.0));
        MetricFrameSample {
            center: vec![p(0.0)],
            h: one(h),
            dh: vec![one(dh)],
            ddh: vec![vec![one(ddh)]],
        }
    }

    #[test]
    fn backward_shift_curvature() {
        let k = SeriesKernel::geometric(200);
        assert!((curvature_scalar(&k, p(0.0)).unwrap() + 1.0).abs() < 1e-15);
        let v = curvature_scalar(&k, p(0.5)).unwrap();
        assert!((v + 1.0 / 0.5625).abs() < 1e-13);
    }

    #[test]
    fn bergman_curvature_at_origin() {
        // -d dbar log (1 - |z|^2)^{-2} at 0 is -2
        let k = SeriesKernel::bergman_type(200);
        assert!((curvature_scalar(&k, p(0.0)).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn finite_differences_agree() {
        let g = SeriesKernel::geometric(200);
        let v = curvature_scalar_fd(&g, p(0.3)).unwrap();
        assert!((v + 1.0 / (0.91f64 * 0.91)).abs() < 1e-6);
        let b = SeriesKernel::bergman_type(200);
        assert!((curvature_scalar_fd(&b, p(0.0)).unwrap() + 2.0).abs() < 1e-6);
    }

    #[test]
    fn frame_formula_collapses() {
        let c = curvature_matrix(&scalar_frame(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(c.scalar(), Some(-1.0));
        let one = CMatrix::from_element(1, 1, linalg::c(0.0, 0.0));
        let f = MetricFrameSample {
            center: vec![p(0.0), p(0.0)],
            h: CMatrix::identity(1, 1),
            dh: vec![one.clone(), one.clone()],
            ddh: vec![
                vec![CMatrix::identity(1, 1), one.clone()],
                vec![one, CMatrix::identity(1, 1)],
            ],
        };
        let c = curvature_matrix(&f).unwrap();
        assert_eq!(c.assembled, -CMatrix::identity(2, 2));
    }

    #[test]
    fn frame_from_kernel_matches_scalar() {
        let k = SeriesKernel::geometric(200);
        let c = curvature_matrix(&MetricFrameSample::from_kernel(&k, p(0.5)).unwrap()).unwrap();
        let s = curvature_scalar(&k, p(0.5)).unwrap();
        assert!((c.scalar().unwrap() - s).abs() < 1e-10 * s.abs());
    }

    #[test]
    fn singular_metric_is_refused() {
        assert_eq!(
            curvature_matrix(&scalar_frame(0.0, 0.0, 1.0)),
            Err(Error::SingularMetric)
        );
    }

    #[test]
    fn mobius_rule_examples() {
        let g: Arc<dyn Kernel> = Arc::new(SeriesKernel::geometric(200));
        assert_eq!(mobius_rule_check(g.clone(), p(0.0), p(0.3)).unwrap(), 0.0);
        assert!(mobius_rule_check(g, p(0.4), p(0.4)).unwrap() < 1e-6);
        let b: Arc<dyn Kernel> = Arc::new(SeriesKernel::bergman_type(200));
        assert!(mobius_rule_check(b, p(0.3), p(0.0)).unwrap() < 1e-6);
    }
}
