//! Caratheodory norms of matricial tangent vectors on the ball and the
//! polydisc, and the curvature inequalities they bound.
//!
//! A tangent vector at a point of `C^m` is a stack `V = (V_1, ..., V_m)` with
//! `V_i` in `C^n`, i.e. an `m x n` matrix whose row `i` is `V_i`. The flat
//! index of `V_i(k)` is `i * n + k`, matching the block layout of
//! [`CurvatureMatrix::assembled`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::curvature::{curvature_scalar, CurvatureMatrix};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, Point};
use crate::linalg::{self, CMatrix, CVector};
use crate::mobius::DiscAutomorphism;
use crate::sampling::halton_unit_vectors;

/// Number of low-discrepancy directions tried by [`generalized_ci_check`] by default.
pub const DEFAULT_SAMPLES: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct MatricialTangent {
    m: usize,
    n: usize,
    /// `m x n`, row `i` is `V_i`.
    v: CMatrix,
}

impl MatricialTangent {
    pub fn new(blocks: &[Vec<Complex64>]) -> Result<Self> {
        let m = blocks.len();
        let n = blocks.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch("tangent vector needs at least one non-empty block".into()));
        }
        if let Some(i) = blocks.iter().position(|b| b.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "block {i} has length {} but block 0 has length {n}",
                blocks[i].len()
            )));
        }
        if blocks.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::DimensionMismatch("tangent vector has non-finite entries".into()));
        }
        Ok(Self {
            m,
            n,
            v: CMatrix::from_fn(m, n, |i, k| blocks[i][k]),
        })
    }

    /// Reads a flat vector of length `m n` in block order.
    pub fn from_flat(m: usize, n: usize, flat: &[Complex64]) -> Result<Self> {
        if flat.len() != m * n || m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "flat vector of length {} does not split into {m} blocks of length {n}",
                flat.len()
            )));
        }
        let blocks: Vec<Vec<Complex64>> = flat.chunks(n).map(<[Complex64]>::to_vec).collect();
        Self::new(&blocks)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, i: usize) -> Vec<Complex64> {
        self.v.row(i).iter().copied().collect()
    }

    pub fn flat(&self) -> Vec<Complex64> {
        (0..self.m).flat_map(|i| self.block(i)).collect()
    }

    pub fn hs_norm(&self) -> f64 {
        self.v.norm()
    }

    /// `D V` for an `m x m` derivative `D` acting on each column.
    pub fn push_forward(&self, d: &CMatrix) -> Result<Self> {
        if d.nrows() != self.m || d.ncols() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "derivative is {}x{}, tangent has {} blocks",
                d.nrows(),
                d.ncols(),
                self.m
            )));
        }
        Ok(Self {
            m: self.m,
            n: self.n,
            v: d * &self.v,
        })
    }
}

fn inner(z: &[Complex64], a: &[Complex64]) -> Complex64 {
    z.iter().zip(a).map(|(x, y)| x * y.conj()).sum()
}

fn sq_norm(z: &[Complex64]) -> f64 {
    z.iter().map(|x| x.norm_sqr()).sum()
}

/// The involutive automorphism of the unit ball exchanging `a` and 0,
/// `phi_a(z) = (a - P z - s Q z) / (1 - <z, a>)` with `s = sqrt(1 - |a|^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallAutomorphism {
    a: Vec<Complex64>,
    /// `P + s Q`.
    linear: CMatrix,
}

impl BallAutomorphism {
    pub fn new(a: &[Complex64]) -> Result<Self> {
        let norm = sq_norm(a).sqrt();
        if !(norm < 1.0) {
            return Err(Error::PointOutsideBall { norm });
        }
        let m = a.len();
        let s = (1.0 - norm * norm).sqrt();
        let col = CVector::from_column_slice(a);
        let p = if norm > 0.0 {
            (&col * col.adjoint()).unscale(norm * norm)
        } else {
            CMatrix::zeros(m, m)
        };
        let q = CMatrix::identity(m, m) - &p;
        Ok(Self {
            a: a.to_vec(),
            linear: p + q.scale(s),
        })
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        let d = Complex64::new(1.0, 0.0) - inner(z, &self.a);
        let lz = &self.linear * CVector::from_column_slice(z);
        self.a.iter().zip(lz.iter()).map(|(a, l)| (a - l) / d).collect()
    }

    /// Complex Jacobian at `z`.
    pub fn derivative(&self, z: &[Complex64]) -> CMatrix {
        let d = Complex64::new(1.0, 0.0) - inner(z, &self.a);
        let zc = CVector::from_column_slice(z);
        let num = CVector::from_column_slice(&self.a) - &self.linear * zc;
        let a_row = CVector::from_column_slice(&self.a).adjoint();
        -&self.linear / d + num * a_row / (d * d)
    }
}

/// Caratheodory norm on the unit ball of `C^m`.
pub fn cara_norm_ball(v: &MatricialTangent, z: &[Complex64]) -> Result<f64> {
    if z.len() != v.m() {
        return Err(Error::DimensionMismatch(format!("point in C^{} but {} blocks", z.len(), v.m())));
    }
    let phi = BallAutomorphism::new(z)?;
    Ok(v.push_forward(&phi.derivative(z))?.hs_norm())
}

/// Caratheodory norm on the unit polydisc of `C^m`.
pub fn cara_norm_polydisc(v: &MatricialTangent, z: &[Complex64]) -> Result<f64> {
    if z.len() != v.m() {
        return Err(Error::DimensionMismatch(format!("point in C^{} but {} blocks", z.len(), v.m())));
    }
    let max_modulus = z.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    if !(max_modulus < 1.0) {
        return Err(Error::PointOutsidePolydisc { max_modulus });
    }
    let mut best = 0.0f64;
    for (j, zj) in z.iter().enumerate() {
        let d = DiscAutomorphism::new(*zj)?.derivative(*zj).norm();
        best = best.max(d * sq_norm(&v.block(j)).sqrt());
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentDomain {
    Ball,
    Polydisc,
}

impl TangentDomain {
    pub fn norm(&self, v: &MatricialTangent, z: &[Complex64]) -> Result<f64> {
        match self {
            TangentDomain::Ball => cara_norm_ball(v, z),
            TangentDomain::Polydisc => cara_norm_polydisc(v, z),
        }
    }

    /// Hermitian `G` with `V^* G V >= C(V)^2`, and equality on the ball.
    fn gram_surrogate(&self, z: &[Complex64], n: usize) -> Result<CMatrix> {
        let m = z.len();
        let d = match self {
            TangentDomain::Ball => BallAutomorphism::new(z)?.derivative(z),
            TangentDomain::Polydisc => {
                let mut d = CMatrix::zeros(m, m);
                for (j, zj) in z.iter().enumerate() {
                    d[(j, j)] = DiscAutomorphism::new(*zj)?.derivative(*zj);
                }
                d
            }
        };
        let dd = d.adjoint() * d;
        Ok(CMatrix::from_fn(m * n, m * n, |r, c| {
            if r % n == c % n {
                dd[(r / n, c / n)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CiVerdict {
    pub pass: bool,
    /// Largest `<K V, V> + C(V)^2` over the tested unit vectors.
    pub worst_margin: f64,
    pub worst_vector: Vec<Complex64>,
    pub tested: usize,
    /// `lambda_max(K + G)`, the supremum of the margin on the ball.
    pub exact_margin: Option<f64>,
}

/// Tests `<K V, V> <= -C(V)^2` on low-discrepancy unit vectors, the
/// eigenvectors of the curvature and of the curvature plus the Caratheodory
/// Gram form, and the coordinate vectors.
pub fn generalized_ci_check(
    curvature: &CurvatureMatrix,
    domain: TangentDomain,
    w: &[Complex64],
    samples: usize,
    tol: f64,
) -> Result<CiVerdict> {
    let (m, n) = (curvature.m, curvature.n);
    let k = &curvature.assembled;
    if w.len() != m || k.nrows() != m * n || k.ncols() != m * n {
        return Err(Error::DimensionMismatch(format!(
            "curvature is {}x{} for m = {m}, n = {n}, point has {} coordinates",
            k.nrows(),
            k.ncols(),
            w.len()
        )));
    }
    let dim = m * n;
    let g = domain.gram_surrogate(w, n)?;
    let (_, k_vecs) = linalg::hermitian_eigen(k);
    let (sum_vals, sum_vecs) = linalg::hermitian_eigen(&(k + &g));

    let mut candidates = halton_unit_vectors(dim, samples);
    for vecs in [&k_vecs, &sum_vecs] {
        candidates.extend(vecs.column_iter().map(|c| c.iter().copied().collect()));
    }
    candidates.extend((0..dim).map(|i| {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[i] = Complex64::new(1.0, 0.0);
        e
    }));

    let mut worst = f64::NEG_INFINITY;
    let mut worst_vector = Vec::new();
    for v in &candidates {
        let col = CVector::from_column_slice(v);
        let quad = (col.adjoint() * k * &col)[(0, 0)].re;
        let c = domain.norm(&MatricialTangent::from_flat(m, n, v)?, w)?;
        let margin = quad + c * c;
        if margin > worst {
            worst = margin;
            worst_vector = v.clone();
        }
    }
    Ok(CiVerdict {
        pass: worst <= tol,
        worst_margin: worst,
        worst_vector,
        tested: candidates.len(),
        exact_margin: (domain == TangentDomain::Ball).then(|| *sum_vals.last().unwrap()),
    })
}

/// Szego kernel of the unit disc on the diagonal, `1 / (2 pi (1 - |w|^2))`.
pub fn disc_szego(w: Point) -> f64 {
    1.0 / (2.0 * PI * (1.0 - w.norm_sqr()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanarCiVerdict {
    pub pass: bool,
    pub curvature: f64,
    pub szego: f64,
    /// `-K - 4 pi^2 S^2`; this is the tested quantity.
    pub slack_with4pi2: f64,
    /// `-K - S^2`.
    pub slack_without4pi2: f64,
}

/// `-K(w) >= 4 pi^2 S(w, w)^2`, i.e. `d dbar log K >= 4 pi^2 S^2`.
pub fn planar_ci_check<K: Kernel + ?Sized>(kernel: &K, w: Point, szego: f64, tol: f64) -> Result<PlanarCiVerdict> {
    let curvature = curvature_scalar(kernel, w)?;
    let slack = -curvature - 4.0 * PI * PI * szego * szego;
    Ok(PlanarCiVerdict {
        pass: slack >= -tol,
        curvature,
        szego,
        slack_with4pi2: slack,
        slack_without4pi2: -curvature - szego * szego,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SeriesKernel;
    use crate::linalg::c;

    fn tangent(blocks: &[&[f64]]) -> MatricialTangent {
        let b: Vec<Vec<Complex64>> = blocks.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
        MatricialTangent::new(&b).unwrap()
    }

    fn scalar_curvature(value: f64) -> CurvatureMatrix {
        CurvatureMatrix {
            m: 1,
            n: 1,
            blocks: vec![vec![CMatrix::from_element(1, 1, c(value, 0.0))]],
            assembled: CMatrix::from_element(1, 1, c(value, 0.0)),
        }
    }

    #[test]
    fn ball_norm_examples() {
        let zero2 = [c(0.0, 0.0); 2];
        assert_eq!(cara_norm_ball(&tangent(&[&[1.0], &[0.0]]), &zero2).unwrap(), 1.0);
        assert_eq!(cara_norm_ball(&tangent(&[&[1.0, 1.0], &[1.0, 1.0]]), &zero2).unwrap(), 2.0);
        let v = cara_norm_ball(&tangent(&[&[1.0]]), &[c(0.5, 0.0)]).unwrap();
        assert!((v - 1.0 / 0.75).abs() < 1e-15);
        assert!(matches!(
            cara_norm_ball(&tangent(&[&[1.0], &[0.0]]), &[c(0.8, 0.0), c(0.0, 0.6)]),
            Err(Error::PointOutsideBall { .. })
        ));
    }

    #[test]
    fn polydisc_norm_examples() {
        let zero2 = [c(0.0, 0.0); 2];
        assert_eq!(cara_norm_polydisc(&tangent(&[&[1.0, 0.0], &[0.0, 1.0]]), &zero2).unwrap(), 1.0);
        assert_eq!(cara_norm_polydisc(&tangent(&[&[1.0, 0.0], &[0.0, 3.0]]), &zero2).unwrap(), 3.0);
        let v = cara_norm_polydisc(&tangent(&[&[1.0], &[1.0]]), &[c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((v - 1.0 / 0.75).abs() < 1e-15);
        assert!(matches!(
            cara_norm_polydisc(&tangent(&[&[1.0], &[1.0]]), &[c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::PointOutsidePolydisc { .. })
        ));
    }

    #[test]
    fn ball_automorphism_is_involutive() {
        let a = [c(0.3, -0.1), c(0.2, 0.4)];
        let phi = BallAutomorphism::new(&a).unwrap();
        let z = [c(-0.2, 0.1), c(0.5, 0.3)];
        let back = phi.apply(&phi.apply(&z));
        assert!(back.iter().zip(&z).all(|(x, y)| (x - y).norm() < 1e-14));
        assert!(phi.apply(&a).iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn ball_derivative_matches_difference_quotient() {
        let phi = BallAutomorphism::new(&[c(0.3, -0.1), c(0.2, 0.4)]).unwrap();
        let z = [c(-0.2, 0.1), c(0.1, 0.3)];
        let d = phi.derivative(&z);
        let h = 1e-6;
        for j in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let (fp, fm) = (phi.apply(&zp), phi.apply(&zm));
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - d[(i, j)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn generalized_ci_examples() {
        let w = [c(0.0, 0.0)];
        let r = generalized_ci_check(&scalar_curvature(-1.0), TangentDomain::Ball, &w, 16, 1e-12).unwrap();
        assert!(r.pass);
        assert!(r.worst_margin.abs() < 1e-15);
        let r = generalized_ci_check(&scalar_curvature(-2.0), TangentDomain::Ball, &w, 16, 1e-12).unwrap();
        assert!(r.pass);
        assert!((r.worst_margin + 1.0).abs() < 1e-15);
        let r = generalized_ci_check(&scalar_curvature(-0.5), TangentDomain::Polydisc, &w, 16, 1e-12).unwrap();
        assert!(!r.pass);
        assert!((r.worst_margin - 0.5).abs() < 1e-15);
    }

    #[test]
    fn generalized_ci_rejects_mismatched_point() {
        let r = generalized_ci_check(&scalar_curvature(-1.0), TangentDomain::Ball, &[c(0.0, 0.0); 2], 4, 1e-12);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn planar_examples() {
        let w = c(0.6, 0.2);
        let g = planar_ci_check(&SeriesKernel::geometric(200), w, disc_szego(w), 1e-10).unwrap();
        assert!(g.pass && g.slack_with4pi2.abs() < 1e-11);
        let b = planar_ci_check(&SeriesKernel::bergman_type(400), w, disc_szego(w), 1e-10).unwrap();
        let expected = (1.0 - w.norm_sqr()).powi(-2);
        assert!((b.slack_with4pi2 - expected).abs() < 1e-10 * expected);
        let b0 = planar_ci_check(&SeriesKernel::bergman_type(200), c(0.0, 0.0), disc_szego(c(0.0, 0.0)), 1e-10).unwrap();
        assert!((b0.slack_with4pi2 - 1.0).abs() < 1e-14);
        assert!((b0.slack_without4pi2 - (2.0 - 1.0 / (4.0 * PI * PI))).abs() < 1e-14);
    }
}
