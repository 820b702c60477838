//! Reproducing kernels: series and closed-form representations, mixed
//! derivatives, jets, and the kernel transforms used by the curvature and
//! extremality machinery.
//!
//! Derivative convention: [`Kernel::deriv`]`(z, w, p, q)` is
//! `d^p/dz^p d^q/d(conj w)^q K(z, w)`, holomorphic in the first slot and
//! anti-holomorphic in the second. On the diagonal this gives the jet entries
//! `J[p][q] = <dbar^q K_w, dbar^p K_w>`.

mod closed_form;
mod series;
mod spec;
mod transform;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub use closed_form::ClosedFormKernel;
pub use series::{SeriesKernel, SeriesKind, DEFAULT_N_MAX};
pub use spec::{CoeffRule, KernelSpec};
pub use transform::{mobius_pullback, normalize_at, tilde_kernel, TildeKernel};

/// A point of the complex plane.
pub type Point = Complex64;

/// Distance kept from every boundary circle when checking admissibility.
pub const BOUNDARY_MARGIN: f64 = 0.02;

/// Relative size of the truncation tail tolerated by series evaluation.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// The unit disc.
    Disc,
    /// The annulus `inner_radius < |z| < 1`.
    Annulus { inner_radius: f64 },
}

impl Domain {
    pub fn contains(&self, z: Point) -> bool {
        let m = z.norm();
        if !m.is_finite() {
            return false;
        }
        match *self {
            Domain::Disc => m < 1.0 - BOUNDARY_MARGIN,
            Domain::Annulus { inner_radius } => {
                m > inner_radius + BOUNDARY_MARGIN && m < 1.0 - BOUNDARY_MARGIN
            }
        }
    }

    pub fn check(&self, z: Point) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::PointOutsideDomain {
                re: z.re,
                im: z.im,
                domain: self.to_string(),
            })
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disc => write!(f, "disc |z| < {}", 1.0 - BOUNDARY_MARGIN),
            Domain::Annulus { inner_radius } => write!(
                f,
                "annulus {} < |z| < {}",
                inner_radius + BOUNDARY_MARGIN,
                1.0 - BOUNDARY_MARGIN
            ),
        }
    }
}

/// A (possibly indefinite) Hermitian kernel function with computable mixed derivatives.
pub trait Kernel: Send + Sync {
    fn domain(&self) -> Domain;

    /// Highest supported derivative order in each slot; `None` when unbounded.
    fn max_jet_order(&self) -> Option<usize>;

    /// `d^p/dz^p d^q/d(conj w)^q K(z, w)`.
    fn deriv(&self, z: Point, w: Point, p: usize, q: usize) -> Result<Complex64>;

    fn eval(&self, z: Point, w: Point) -> Result<Complex64> {
        self.deriv(z, w, 0, 0)
    }

    /// Diagonal mixed derivative `d^p dbar^q K(w, w)`.
    fn mixed_deriv(&self, w: Point, p: usize, q: usize) -> Result<Complex64> {
        self.deriv(w, w, p, q)
    }

    fn jet(&self, w: Point, order: usize) -> Result<KernelJet> {
        KernelJet::compute(self, w, order)
    }
}

impl<K: Kernel + ?Sized> Kernel for std::sync::Arc<K> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn max_jet_order(&self) -> Option<usize> {
        (**self).max_jet_order()
    }
    fn deriv(&self, z: Point, w: Point, p: usize, q: usize) -> Result<Complex64> {
        (**self).deriv(z, w, p, q)
    }
}

pub(crate) fn check_order(max: Option<usize>, p: usize, q: usize) -> Result<()> {
    match max {
        Some(m) if p > m || q > m => Err(Error::UnsupportedJetOrder { p, q, max: m }),
        _ => Ok(()),
    }
}

/// Matrix of diagonal mixed derivatives `J[p][q] = d^p dbar^q K(w, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelJet {
    pub center: Point,
    pub order: usize,
    pub values: CMatrix,
}

impl KernelJet {
    pub fn compute<K: Kernel + ?Sized>(kernel: &K, w: Point, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::UnsupportedJetOrder {
                p: order,
                q: order,
                max: kernel.max_jet_order().unwrap_or(usize::MAX),
            });
        }
        check_order(kernel.max_jet_order(), order, order)?;
        let n = order + 1;
        let mut values = CMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                values[(p, q)] = kernel.deriv(w, w, p, q)?;
            }
        }
        Ok(Self {
            center: w,
            order,
            values,
        })
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.values[(p, q)]
    }

    /// `J00 J11 - |J01|^2`, the Cauchy-Schwarz defect of `K_w` and `dbar K_w`.
    pub fn first_order_minor(&self) -> f64 {
        self.get(0, 0).re * self.get(1, 1).re - self.get(0, 1).norm_sqr()
    }

    pub fn is_positive_semidefinite(&self, rel_tol: f64) -> bool {
        let vals = linalg::hermitian_eigenvalues(&self.values);
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        vals.first().is_none_or(|&lo| lo >= -rel_tol * scale)
    }
}
