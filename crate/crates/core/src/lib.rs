//! Curvature invariants of reproducing-kernel Hilbert spaces and numerical
//! checks of the associated curvature inequalities.

pub mod annulus;
pub mod caratheodory;
pub mod curvature;
pub mod error;
pub mod extremality;
pub mod kernel;
pub mod linalg;
pub mod local_operator;
pub mod mobius;
pub mod positivity;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use kernel::{Domain, Kernel, KernelJet, Point, SeriesKernel};
