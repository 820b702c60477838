//! Canonical form of the local operator on the second-order joint kernel.
//!
//! The jet Gram matrix `G` is the Gram matrix of `(gamma, d_1 gamma, ..., d_m gamma)`
//! in block order; `P` is the upper-triangular change of basis produced by
//! Gram-Schmidt, so that `P P^* = G^{-1}`. In the orthonormal basis each
//! `N_l` has a single non-zero block `t_l` in its first block row.

use crate::curvature::{curvature_matrix, MetricFrameSample};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, Point};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;

/// Largest condition number accepted before extracting `t`.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Tolerance for the identity leading block and the structural checks.
const STRUCTURE_TOL: f64 = 1e-12;

/// `(m+1)n x (m+1)n` Gram matrix of the frame and its first derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct JetGram {
    pub m: usize,
    pub n: usize,
    pub g: CMatrix,
}

impl JetGram {
    /// Wraps an explicit Gram matrix; the leading block is normalized to the identity.
    pub fn from_matrix(m: usize, n: usize, g: CMatrix) -> Result<Self> {
        let size = (m + 1) * n;
        if m == 0 || n == 0 || g.nrows() != size || g.ncols() != size {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix of size {}x{} for m = {m}, n = {n}",
                g.nrows(),
                g.ncols()
            )));
        }
        let asym = linalg::asymmetry(&g);
        if asym > 1e-10 * linalg::max_abs(&g).max(1.0) {
            return Err(Error::NonHermitianInput { asymmetry: asym });
        }
        let s = linalg::inverse_sqrt(&linalg::block(&g, 0, 0, n, n)).map_err(|_| Error::SingularGram)?;
        let mut d = CMatrix::zeros(size, size);
        for k in 0..=m {
            linalg::set_block(&mut d, k * n, k * n, &s);
        }
        let mut g = &d * g * &d;
        linalg::set_block(&mut g, 0, 0, &CMatrix::identity(n, n));
        let g = linalg::hermitian_part(&g);
        if linalg::cholesky_upper(&g).is_err() {
            return Err(Error::SingularGram);
        }
        Ok(Self { m, n, g })
    }

    /// Assembles `G` from a metric frame: `G(0, 0) = h`, `G(0, j) = d_j h`,
    /// `G(i, j) = dbar_i d_j h` in block coordinates `1..=m`.
    pub fn from_frame(frame: &MetricFrameSample) -> Result<Self> {
        frame.validate()?;
        let (m, n) = (frame.dim(), frame.rank());
        let mut g = CMatrix::zeros((m + 1) * n, (m + 1) * n);
        linalg::set_block(&mut g, 0, 0, &frame.h);
        for j in 0..m {
            linalg::set_block(&mut g, 0, (j + 1) * n, &frame.dh[j]);
            linalg::set_block(&mut g, (j + 1) * n, 0, &frame.dh[j].adjoint());
            for i in 0..m {
                linalg::set_block(&mut g, (i + 1) * n, (j + 1) * n, &frame.ddh[j][i]);
            }
        }
        Self::from_matrix(m, n, g)
    }
}

/// Jet Gram of a scalar kernel (`n = 1`). Only `m = 1` is available from a
/// scalar kernel; larger `m` must come through [`JetGram::from_matrix`].
pub fn jet_gram<K: Kernel + ?Sized>(kernel: &K, w: Point, m: usize) -> Result<JetGram> {
    if m != 1 {
        return Err(Error::DimensionMismatch(format!(
            "a scalar kernel yields a jet Gram with m = 1, not {m}"
        )));
    }
    JetGram::from_frame(&MetricFrameSample::from_kernel(kernel, w)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperatorForm {
    pub m: usize,
    pub n: usize,
    /// Upper triangular, `P P^* = G^{-1}`, leading block exactly the identity.
    pub p: CMatrix,
    /// `P^{-1}`.
    pub q: CMatrix,
    /// `t_l`, each `n x mn`.
    pub t_blocks: Vec<CMatrix>,
    /// `t_1, ..., t_m` stacked, `mn x mn`.
    pub t: CMatrix,
    /// Lower-right `mn x mn` block of `G^{-1}`.
    pub r: CMatrix,
    /// `N_l` in the orthonormal basis.
    pub nilpotents: Vec<CMatrix>,
    /// `||t t^* - R|| / ||R||`.
    pub tt_residual: f64,
}

impl LocalOperatorForm {
    /// `f(T)` restricted to the joint kernel, for `f` with value `f_value` and gradient `gradient`.
    pub fn function_of(&self, f_value: Complex64, gradient: &[Complex64]) -> Result<CMatrix> {
        function_of_local(&self.t_blocks, f_value, gradient)
    }
}

fn nilpotent(n: usize, t_l: &CMatrix) -> CMatrix {
    let size = n + t_l.ncols();
    let mut out = CMatrix::zeros(size, size);
    linalg::set_block(&mut out, 0, n, t_l);
    out
}

pub fn canonical_form(gram: &JetGram) -> Result<LocalOperatorForm> {
    let (m, n) = (gram.m, gram.n);
    let size = (m + 1) * n;
    let mn = m * n;
    let lead = linalg::block(&gram.g, 0, 0, n, n);
    if linalg::max_abs(&(lead - CMatrix::identity(n, n))) > STRUCTURE_TOL {
        return Err(Error::NormalizationMissing);
    }
    let mut g = gram.g.clone();
    linalg::set_block(&mut g, 0, 0, &CMatrix::identity(n, n));
    for i in 0..n {
        for j in n..size {
            g[(j, i)] = g[(i, j)].conj();
        }
    }

    let q = linalg::cholesky_upper(&g)?;
    let cond = linalg::condition_number(&g);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    let p = linalg::invert_upper(&q)?;
    let r = linalg::block(&linalg::inverse(&g)?, n, n, mn, mn);

    let mut t_blocks = Vec::with_capacity(m);
    let mut nilpotents = Vec::with_capacity(m);
    let scale = linalg::max_abs(&p).max(1.0) * linalg::max_abs(&q).max(1.0);
    for l in 0..m {
        // N_l maps d_l gamma to gamma and kills everything else.
        let mut nv = CMatrix::zeros(size, size);
        linalg::set_block(&mut nv, 0, (l + 1) * n, &CMatrix::identity(n, n));
        let nu = &q * nv * &p;
        let below = linalg::max_abs(&linalg::block(&nu, n, 0, mn, size));
        let left = linalg::max_abs(&linalg::block(&nu, 0, 0, n, n));
        if below.max(left) > STRUCTURE_TOL * scale {
            return Err(Error::DegenerateJet(format!(
                "N_{} leaves block structure (defect {:e})",
                l + 1,
                below.max(left)
            )));
        }
        let t_l = linalg::block(&nu, 0, n, n, mn);
        nilpotents.push(nilpotent(n, &t_l));
        t_blocks.push(t_l);
    }
    let mut t = CMatrix::zeros(mn, mn);
    for (l, t_l) in t_blocks.iter().enumerate() {
        linalg::set_block(&mut t, l * n, 0, t_l);
    }
    let r_norm = linalg::spectral_norm(&r);
    let tt_residual = linalg::spectral_norm(&(&t * t.adjoint() - &r)) / r_norm;
    if !(tt_residual <= 1e-8) {
        return Err(Error::DegenerateJet(format!(
            "t t^* differs from R by {tt_residual:e} (relative)"
        )));
    }
    Ok(LocalOperatorForm {
        m,
        n,
        p,
        q,
        t_blocks,
        t,
        r,
        nilpotents,
        tt_residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtIdentity {
    /// `t t^*`.
    pub tt: CMatrix,
    /// `(-K)^{-1}` from the curvature matrix.
    pub inverse_neg_curvature: CMatrix,
    /// Spectral norm of the difference.
    pub residual: f64,
    pub scale: f64,
}

impl TtIdentity {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// Compares `t t^*` with the inverse of minus the curvature matrix of the same frame.
pub fn verify_tt_identity_frame(frame: &MetricFrameSample) -> Result<TtIdentity> {
    let form = canonical_form(&JetGram::from_frame(frame)?)?;
    let curvature = curvature_matrix(frame)?;
    let inverse_neg_curvature = linalg::inverse(&(-&curvature.assembled))?;
    let tt = &form.t * form.t.adjoint();
    let residual = linalg::spectral_norm(&(&tt - &inverse_neg_curvature));
    let scale = linalg::spectral_norm(&inverse_neg_curvature);
    Ok(TtIdentity {
        tt,
        inverse_neg_curvature,
        residual,
        scale,
    })
}

pub fn verify_tt_identity<K: Kernel + ?Sized>(kernel: &K, w: Point, m: usize) -> Result<TtIdentity> {
    if m != 1 {
        return Err(Error::DimensionMismatch(format!(
            "a scalar kernel yields a frame with m = 1, not {m}"
        )));
    }
    verify_tt_identity_frame(&MetricFrameSample::from_kernel(kernel, w)?)
}

/// `[[f I, sum_j d_j f t_j], [0, f I]]`.
pub fn function_of_local(t_blocks: &[CMatrix], f_value: Complex64, gradient: &[Complex64]) -> Result<CMatrix> {
    if gradient.len() != t_blocks.len() || t_blocks.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "gradient of length {} for {} blocks",
            gradient.len(),
            t_blocks.len()
        )));
    }
    let (n, mn) = (t_blocks[0].nrows(), t_blocks[0].ncols());
    if t_blocks.iter().any(|t| t.nrows() != n || t.ncols() != mn) {
        return Err(Error::DimensionMismatch("t blocks differ in shape".into()));
    }
    let mut top = CMatrix::zeros(n, mn);
    for (t, &df) in t_blocks.iter().zip(gradient) {
        top += t * df;
    }
    let size = n + mn;
    let mut out = CMatrix::identity(size, size) * f_value;
    linalg::set_block(&mut out, 0, n, &top);
    Ok(out)
}
