//! Points of equality in the curvature inequality for weighted shifts.
//!
//! For a disc kernel `K` with contractive adjoint shift, `F = K~(w,w)^2 d dbar log K~`
//! is non-negative and vanishes exactly where the curvature meets
//! `-(1 - |w|^2)^{-2}`. The uniqueness pipeline replays, step by step, the
//! argument that extremality at one point of a 2-hypercontraction forces the
//! backward shift.

use serde::Serialize;

use crate::curvature::{curvature_scalar, extremal_bound};
use crate::error::{Error, Result};
use crate::kernel::{tilde_kernel, Kernel, KernelJet, Point, SeriesKernel, TildeKernel};
use crate::linalg::{self, CMatrix};
use crate::mobius::DiscAutomorphism;
use crate::positivity::{gram_decrease_check, hyponormal_check, psd_check, two_hypercontraction_check, WeightSequence};
use num_complex::Complex64;

/// `|F_K(zeta)| <= EXTREMAL_TOL * K~(zeta, zeta)^2` counts as equality.
pub const EXTREMAL_TOL: f64 = 1e-9;

/// Weights within this distance of 1 are treated as those of the backward shift.
pub const WEIGHT_TOL: f64 = 1e-8;

/// Default number of Taylor coefficients kept in the transformed pipeline.
pub const DEFAULT_TRUNCATION: usize = 150;

/// Tolerance of the individual pipeline steps.
pub const PIPELINE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    ExtremalEverywhere,
    ExtremalAtZeroOnly,
    NotExtremal,
}

/// How `K~_zeta` and `dbar K~_zeta` fail (or not) to be independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DependenceKind {
    /// `dbar K~_zeta = 0`.
    DerivativeVanishes,
    /// `dbar K~_zeta` is a non-zero multiple of `K~_zeta`.
    Proportional,
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dependence {
    pub dependent: bool,
    pub kind: DependenceKind,
    /// `J00 J11 - |J01|^2`.
    pub minor: f64,
    /// `J00 J11`.
    pub scale: f64,
}

fn checked_tilde(kernel: &SeriesKernel) -> Result<TildeKernel> {
    let tilde = tilde_kernel(kernel)?;
    for (n, (&b, &a)) in tilde.coeffs().iter().zip(kernel.coeffs()).enumerate() {
        if b < -1e-10 * a.max(1.0) {
            return Err(Error::NotAContraction(format!("tilde coefficient b_{n} = {b:e} is negative")));
        }
    }
    Ok(tilde)
}

fn tilde_jet(kernel: &SeriesKernel, zeta: Point) -> Result<KernelJet> {
    checked_tilde(kernel)?.jet(zeta, 1)
}

/// `K~(zeta, zeta)^2 d dbar log K~ (zeta)`, computed as the first-order minor of the tilde jet.
pub fn fk_value(kernel: &SeriesKernel, zeta: Point) -> Result<f64> {
    Ok(tilde_jet(kernel, zeta)?.first_order_minor())
}

/// Equality test for the curvature inequality at `zeta`, relative to `K~(zeta, zeta)^2`.
pub fn is_extremal_at(kernel: &SeriesKernel, zeta: Point) -> Result<bool> {
    let jet = tilde_jet(kernel, zeta)?;
    let j00 = jet.get(0, 0).re;
    Ok(jet.first_order_minor().abs() <= EXTREMAL_TOL * j00 * j00)
}

/// Cauchy-Schwarz equality test on a first-order jet.
pub fn dependence_from_jet(jet: &KernelJet, tol: f64) -> Dependence {
    let (j00, j11) = (jet.get(0, 0).re, jet.get(1, 1).re);
    let minor = jet.first_order_minor();
    let scale = j00 * j11;
    let dependent = minor <= tol * scale;
    let kind = if j11 <= tol * j00 {
        DependenceKind::DerivativeVanishes
    } else if dependent {
        DependenceKind::Proportional
    } else {
        DependenceKind::Independent
    };
    Dependence {
        dependent,
        kind,
        minor,
        scale,
    }
}

/// Linear dependence of `K~_zeta` and `dbar K~_zeta`.
pub fn dependence_test(kernel: &SeriesKernel, zeta: Point, tol: f64) -> Result<Dependence> {
    Ok(dependence_from_jet(&tilde_jet(kernel, zeta)?, tol))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub point: Point,
    pub curvature: f64,
    pub extremal_bound: f64,
    pub fk_value: f64,
    /// `EXTREMAL_TOL * K~(zeta, zeta)^2`.
    pub fk_tolerance: f64,
    pub classification: Classification,
    /// All weights equal 1 within [`WEIGHT_TOL`].
    pub equivalent_to_backward_shift: bool,
    pub dependence: DependenceKind,
}

pub fn classify_shift(ws: &WeightSequence, zeta: Point) -> Result<ExtremalityReport> {
    if let Some(n) = ws.first_non_contractive(WEIGHT_TOL) {
        return Err(Error::NotAContraction(format!("w_{n} = {} > 1", ws.weights[n])));
    }
    let kernel = ws.kernel();
    let jet = tilde_jet(&kernel, zeta)?;
    let j00 = jet.get(0, 0).re;
    let fk = jet.first_order_minor();
    let fk_tolerance = EXTREMAL_TOL * j00 * j00;
    let extremal = fk.abs() <= fk_tolerance;
    let classification = match (extremal, zeta.norm() > 0.0) {
        (false, _) => Classification::NotExtremal,
        (true, true) => Classification::ExtremalEverywhere,
        (true, false) => {
            if hyponormal_check(ws, WEIGHT_TOL).pass {
                Classification::ExtremalEverywhere
            } else {
                Classification::ExtremalAtZeroOnly
            }
        }
    };
    Ok(ExtremalityReport {
        point: zeta,
        curvature: curvature_scalar(&kernel, zeta)?,
        extremal_bound: extremal_bound(zeta),
        fk_value: fk,
        fk_tolerance,
        classification,
        equivalent_to_backward_shift: ws.weights.iter().all(|w| (w - 1.0).abs() <= WEIGHT_TOL),
        dependence: dependence_from_jet(&jet, EXTREMAL_TOL).kind,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineStep {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub point: Point,
    pub truncation_order: usize,
    /// Change of the transformed Taylor block when the coefficient window is cut to three quarters.
    pub truncation_residual: f64,
    pub steps: Vec<PipelineStep>,
    /// Density of polynomials in the transformed space is assumed, not checked.
    pub density_assumed: bool,
}

struct Steps(Vec<PipelineStep>);

impl Steps {
    fn check(&mut self, name: &str, passed: bool, detail: String) -> Result<()> {
        self.0.push(PipelineStep {
            name: name.to_string(),
            passed,
            detail: detail.clone(),
        });
        if passed {
            Ok(())
        } else {
            Err(Error::HypothesisFailed {
                step: name.to_string(),
                detail,
            })
        }
    }
}

/// Taylor coefficients `p[n][i]` of `psi^n` for `n < count`, `i < order`.
fn taylor_powers(psi: &[Complex64], count: usize, order: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(count);
    let mut current = vec![zero; order];
    current[0] = Complex64::new(1.0, 0.0);
    for _ in 0..count {
        let next: Vec<Complex64> = (0..order)
            .map(|i| (0..=i).map(|k| current[k] * psi[i - k]).sum())
            .collect();
        out.push(std::mem::replace(&mut current, next));
    }
    out
}

/// Taylor matrix at the origin of `K(psi(z), psi(w))` normalized at 0, from the first `count` coefficients.
fn transformed_taylor(coeffs: &[f64], powers: &[Vec<Complex64>], count: usize, order: usize) -> Result<CMatrix> {
    // rows sqrt(a_n) p_n, so that C = rows^T conj(rows)
    let rows = CMatrix::from_fn(count, order, |n, i| powers[n][i] * coeffs[n].sqrt());
    let c = rows.transpose() * rows.map(|z| z.conj());
    let c00 = c[(0, 0)];
    if !(c00.re > 0.0) {
        return Err(Error::DegenerateKernel { value: c00.re });
    }
    // g = 1 / L(., 0) as a power series
    let mut g = vec![Complex64::new(0.0, 0.0); order];
    g[0] = c00.inv();
    for k in 1..order {
        let s: Complex64 = (1..=k).map(|j| c[(j, 0)] * g[k - j]).sum();
        g[k] = -s / c00;
    }
    let toeplitz = CMatrix::from_fn(order, order, |i, k| if k <= i { g[i - k] } else { Complex64::new(0.0, 0.0) });
    Ok(&toeplitz * c * toeplitz.adjoint() * c00)
}

/// Lower-triangular truncation of the shift, `A e_n = w_n e_{n+1}`.
fn shift_matrix(weights: &[f64], size: usize) -> CMatrix {
    CMatrix::from_fn(size, size, |i, j| {
        if i == j + 1 {
            Complex64::new(weights[j], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Leading `order x order` block of `I - 2 B^*B + B^{*2} B^2` for `B = phi_zeta(A)`,
/// with `B` computed on a larger window so that the block is accurate.
fn transformed_two_hyper(ws: &WeightSequence, zeta: Point, order: usize) -> Result<(CMatrix, CMatrix)> {
    let extra = (1e-17f64.ln() / zeta.norm().ln()).ceil() as usize + 2;
    let size = order + extra;
    if ws.len() < size {
        return Err(Error::TruncationInsufficient {
            residual: zeta.norm().powi((ws.len().saturating_sub(order)) as i32),
            order,
        });
    }
    let a = shift_matrix(&ws.weights, size);
    let id = CMatrix::identity(size, size);
    let resolvent = linalg::inverse(&(&id - &a * zeta.conj()))?;
    let b = (&a - &id * zeta) * resolvent;
    let x = b.columns(0, order).into_owned();
    let y = &b * &x;
    let id_t = CMatrix::identity(order, order);
    let contraction = &id_t - x.adjoint() * &x;
    let two_hyper = &id_t - (x.adjoint() * &x) * Complex64::new(2.0, 0.0) + y.adjoint() * &y;
    Ok((contraction, two_hyper))
}

/// Replays the uniqueness argument on a weighted shift. At `zeta = 0` the
/// normalized Taylor matrix is `diag(a_n / a_0)`; otherwise the kernel is
/// pulled back by the disc automorphism moving `zeta` to 0 and renormalized,
/// keeping `truncation` Taylor coefficients.
pub fn uniqueness_pipeline_check(ws: &WeightSequence, zeta: Point, truncation: usize) -> Result<PipelineReport> {
    let tol = PIPELINE_TOL;
    let mut steps = Steps(Vec::new());
    let kernel = ws.kernel();

    let worst = ws.weights.iter().fold(0.0f64, |a, &w| a.max(w));
    let contractive = ws.first_non_contractive(WEIGHT_TOL).is_none() && checked_tilde(&kernel).is_ok();
    steps.check("contraction", contractive, format!("largest weight {worst}"))?;

    let hyper = two_hypercontraction_check(ws, tol)?;
    let detail = match hyper.first_failure {
        Some(n) => {
            let inv = |k: usize| 1.0 / ws.coeffs[k];
            format!("1/a_{n} - 2/a_{} + 1/a_{} = {:e}", n + 1, n + 2, inv(n) - 2.0 * inv(n + 1) + inv(n + 2))
        }
        None => format!("smallest margin {:e}", hyper.worst_margin),
    };
    steps.check("two_hypercontraction", hyper.pass, detail)?;

    let jet = tilde_jet(&kernel, zeta)?;
    let j00 = jet.get(0, 0).re;
    let fk = jet.first_order_minor();
    steps.check(
        "extremal_at_point",
        fk.abs() <= EXTREMAL_TOL * j00 * j00,
        format!("F_K = {fk:e}"),
    )?;

    let (order, residual, c) = if zeta.norm() == 0.0 {
        let order = truncation.min(ws.coeffs.len());
        let a0 = ws.coeffs[0];
        let diag: Vec<f64> = ws.coeffs[..order].iter().map(|a| a / a0).collect();
        (order, 0.0, linalg::real_diag(&diag))
    } else {
        let order = truncation;
        let (contraction, two_hyper) = transformed_two_hyper(ws, zeta, order)?;
        let c_ok = psd_check(&contraction, tol)?;
        let h_ok = psd_check(&two_hyper, tol)?;
        steps.check(
            "transformed_two_hypercontraction",
            c_ok.pass && h_ok.pass,
            format!(
                "min eigenvalues {:e} (contraction), {:e} (2-hypercontraction)",
                c_ok.min_eigenvalue, h_ok.min_eigenvalue
            ),
        )?;
        let phi = DiscAutomorphism::new(zeta)?;
        let n = ws.coeffs.len();
        let powers = taylor_powers(&phi.inverse_taylor(order), n, order);
        let full = transformed_taylor(&ws.coeffs, &powers, n, order)?;
        let partial = transformed_taylor(&ws.coeffs, &powers, 3 * n / 4, order)?;
        let residual = linalg::max_abs(&(&full - &partial));
        if !(residual <= tol) {
            return Err(Error::TruncationInsufficient { residual, order });
        }
        (order, residual, full)
    };
    if order < 3 {
        return Err(Error::TruncationInsufficient {
            residual: f64::INFINITY,
            order,
        });
    }

    let first_col = (1..order).fold(0.0f64, |m, i| m.max(c[(i, 0)].norm()));
    steps.check(
        "normalization",
        (c[(0, 0)] - 1.0).norm() <= tol && first_col <= tol,
        format!("C(0,0) = {}, max |C(i,0)| = {first_col:e}", c[(0, 0)].re),
    )?;
    steps.check(
        "unit_vectors",
        (c[(1, 1)] - 1.0).norm() <= tol,
        format!("||V0||^2 = {}, ||V1||^2 = {}", c[(0, 0)].re, c[(1, 1)].re),
    )?;

    let mut shifted = CMatrix::zeros(order, order);
    shifted
        .view_mut((1, 1), (order - 1, order - 1))
        .copy_from(&c.view((0, 0), (order - 1, order - 1)));
    let d = &c - shifted;
    let d_psd = psd_check(&linalg::hermitian_part(&d), tol)?;
    let row = (0..order).fold(0.0f64, |m, j| m.max(d[(1, j)].norm()));
    steps.check(
        "kernel_gram_decrease",
        d_psd.pass && row <= tol,
        format!("min eigenvalue {:e}, row 1 of difference {row:e}", d_psd.min_eigenvalue),
    )?;

    let m = linalg::inverse(&linalg::hermitian_part(&c))?;
    let m = linalg::hermitian_part(&m);
    let k = order - 1;
    let g_v = linalg::block(&m, 0, 0, k, k);
    let g_av = linalg::block(&m, 1, 1, k, k);
    let decrease = gram_decrease_check(&g_v, &g_av, tol)?;
    steps.check(
        "monomial_gram_decrease",
        decrease.pass,
        format!("min eigenvalue {:e}, equality {}", decrease.difference.min_eigenvalue, decrease.equality),
    )?;

    let diag_dev = (0..order).fold(0.0f64, |acc, i| acc.max((m[(i, i)] - 1.0).norm()));
    steps.check(
        "unit_monomials",
        diag_dev <= tol,
        format!("max | ||z^n||^2 - 1 | = {diag_dev:e}"),
    )?;
    let off = linalg::max_abs(&(&m - CMatrix::identity(order, order)));
    steps.check("orthonormal_monomials", off <= tol, format!("max |<z^j, z^i> - delta| = {off:e}"))?;

    let spread = ws.weights.iter().fold(0.0f64, |acc, w| acc.max((w - 1.0).abs()));
    steps.check(
        "backward_shift",
        spread <= WEIGHT_TOL,
        format!("max |w_n - 1| = {spread:e}"),
    )?;

    Ok(PipelineReport {
        point: zeta,
        truncation_order: order,
        truncation_residual: residual,
        steps: steps.0,
        density_assumed: true,
    })
}
