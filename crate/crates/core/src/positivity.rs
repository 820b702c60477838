//! Positive semidefiniteness tests and the weighted-shift criteria:
//! contractivity through the tilde kernel, hyponormality, 2-hypercontractivity
//! and Gram decrease.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{tilde_kernel, Kernel, Point, SeriesKernel};
use crate::linalg::{self, CMatrix};

/// Relative tolerance used when a caller does not pick one.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub pass: bool,
    pub min_eigenvalue: f64,
    /// Spectral norm of the tested matrix.
    pub norm: f64,
    /// The eigenvalue threshold actually applied, `-tol * max(1, norm)`.
    pub threshold: f64,
}

/// Passes iff the smallest eigenvalue is at least `-tol * max(1, ||G||)`.
pub fn psd_check(gram: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    if gram.nrows() != gram.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            gram.nrows(),
            gram.ncols()
        )));
    }
    let values = linalg::hermitian_eigenvalues(gram);
    let norm = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let asym = linalg::asymmetry(gram);
    if asym > tol * norm.max(1.0) {
        return Err(Error::NonHermitianInput { asymmetry: asym });
    }
    let min_eigenvalue = values.first().copied().unwrap_or(0.0);
    let threshold = -tol * norm.max(1.0);
    Ok(PsdVerdict {
        pass: min_eigenvalue >= threshold,
        min_eigenvalue,
        norm,
        threshold,
    })
}

/// Gram matrix `[K(z_j, z_i)]` of the kernel functions at `points`.
pub fn kernel_gram<K: Kernel + ?Sized>(kernel: &K, points: &[Point]) -> Result<CMatrix> {
    let n = points.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = kernel.eval(points[j], points[i])?;
        }
    }
    Ok(g)
}

/// Shift weights `w_n = sqrt(a_n / a_{n+1})` with their source coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSequence {
    pub weights: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl WeightSequence {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidKernel("need at least two coefficients".into()));
        }
        if let Some(i) = coeffs.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidKernel(format!("a_{i} = {} is not positive", coeffs[i])));
        }
        let weights = coeffs.windows(2).map(|p| (p[0] / p[1]).sqrt()).collect();
        Ok(Self { weights, coeffs })
    }

    /// Coefficients normalized by `a_0 = 1`, `a_{n+1} = a_n / w_n^2`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidKernel(format!("w_{i} = {} is not positive", weights[i])));
        }
        let mut coeffs = Vec::with_capacity(weights.len() + 1);
        coeffs.push(1.0);
        for (n, w) in weights.iter().enumerate() {
            coeffs.push(coeffs[n] / (w * w));
        }
        Self::from_coeffs(coeffs)
    }

    pub fn from_kernel(kernel: &SeriesKernel) -> Result<Self> {
        if kernel.n_min() != 0 || kernel.inner_radius().is_some() {
            return Err(Error::InvalidKernel("weight sequences come from disc kernels".into()));
        }
        Self::from_coeffs(kernel.coeffs().to_vec())
    }

    pub fn kernel(&self) -> SeriesKernel {
        SeriesKernel::disc(self.coeffs.clone()).expect("validated coefficients")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `||z^n||^2 = 1 / a_n` in the space with kernel `sum a_n z^n conj(w)^n`.
    pub fn monomial_norm_sq(&self, n: usize) -> f64 {
        1.0 / self.coeffs[n]
    }

    /// Index of the first weight above `1 + tol`.
    pub fn first_non_contractive(&self, tol: f64) -> Option<usize> {
        self.weights.iter().position(|&w| w > 1.0 + tol)
    }
}

/// Outcome of a sequence test: the first failing index and the most negative
/// margin seen (positive margins mean the inequality holds strictly).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SequenceVerdict {
    pub pass: bool,
    pub first_failure: Option<usize>,
    pub worst_margin: f64,
}

fn sequence_verdict(margins: impl Iterator<Item = (f64, f64)>) -> SequenceVerdict {
    let mut first_failure = None;
    let mut worst = f64::INFINITY;
    for (n, (margin, allowance)) in margins.enumerate() {
        worst = worst.min(margin);
        if margin < -allowance && first_failure.is_none() {
            first_failure = Some(n);
        }
    }
    SequenceVerdict {
        pass: first_failure.is_none(),
        first_failure,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionVerdict {
    pub pass: bool,
    /// `b_n >= -tol * max(1, a_n)` for all `n`.
    pub coefficient_pass: bool,
    /// Most negative tilde coefficient `(n, b_n)`.
    pub most_negative: Option<(usize, f64)>,
    /// PSD test of the tilde-kernel Gram on the sample points.
    pub gram: PsdVerdict,
}

/// Contractivity of the adjoint shift, decided by positivity of the tilde kernel.
pub fn contraction_check(kernel: &SeriesKernel, sample_points: &[Point], tol: f64) -> Result<ContractionVerdict> {
    let tilde = tilde_kernel(kernel)?;
    let a = kernel.coeffs();
    let coefficient_pass = tilde
        .coeffs()
        .iter()
        .zip(a)
        .all(|(&b, &an)| b >= -tol * an.max(1.0));
    let gram = psd_check(&kernel_gram(&tilde, sample_points)?, tol)?;
    Ok(ContractionVerdict {
        pass: coefficient_pass && gram.pass,
        coefficient_pass,
        most_negative: tilde.most_negative(),
        gram,
    })
}

/// Hyponormality of the shift: the weights must be non-decreasing.
pub fn hyponormal_check(ws: &WeightSequence, tol: f64) -> SequenceVerdict {
    sequence_verdict(ws.weights.windows(2).map(|w| (w[1] - w[0], tol)))
}

/// `1/a_n - 2/a_{n+1} + 1/a_{n+2} >= 0`, i.e. `||f||^2 - 2||zf||^2 + ||z^2 f||^2 >= 0` on monomials.
pub fn two_hypercontraction_check(ws: &WeightSequence, tol: f64) -> Result<SequenceVerdict> {
    if let Some(n) = ws.first_non_contractive(tol) {
        return Err(Error::NotAContraction(format!("w_{n} = {} > 1", ws.weights[n])));
    }
    let inv: Vec<f64> = ws.coeffs.iter().map(|a| 1.0 / a).collect();
    Ok(sequence_verdict(inv.windows(3).map(|x| {
        (x[0] - 2.0 * x[1] + x[2], tol * (x[0] + 2.0 * x[1] + x[2]))
    })))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GramDecreaseVerdict {
    pub pass: bool,
    /// `G_v = G_Av` within tolerance.
    pub equality: bool,
    pub difference: PsdVerdict,
}

/// `G_Av <= G_v` in the PSD order, which holds for all vector families iff `A` is a contraction.
pub fn gram_decrease_check(g_v: &CMatrix, g_av: &CMatrix, tol: f64) -> Result<GramDecreaseVerdict> {
    if g_v.shape() != g_av.shape() {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrices of shapes {:?} and {:?}",
            g_v.shape(),
            g_av.shape()
        )));
    }
    let diff = g_v - g_av;
    let difference = psd_check(&diff, tol)?;
    let scale = linalg::max_abs(g_v).max(1.0);
    Ok(GramDecreaseVerdict {
        pass: difference.pass,
        equality: linalg::max_abs(&diff) <= tol * scale,
        difference,
    })
}
