#![allow(dead_code)]

use proptest::prelude::*;
use rkhs_core::positivity::WeightSequence;
use rkhs_core::{Point, SeriesKernel};

pub const N_MAX: usize = 200;

/// Contractive weights `w_k^2 = 1 - u_k min(0.7, beta / (k + 1))`; the
/// coefficients grow at most polynomially, so the kernel lives on the whole disc.
pub fn contractive_weights(beta: f64, u: &[f64]) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(k, &x)| (1.0 - x * (beta / (k + 1) as f64).min(0.7)).sqrt())
        .collect()
}

pub fn contractive_shift() -> impl Strategy<Value = WeightSequence> {
    (0.0f64..3.0, prop::collection::vec(0.0f64..1.0, N_MAX))
        .prop_map(|(beta, u)| WeightSequence::from_weights(contractive_weights(beta, &u)).unwrap())
}

pub fn contractive_kernel() -> impl Strategy<Value = SeriesKernel> {
    contractive_shift().prop_map(|ws| ws.kernel())
}

/// Points with modulus at most `radius`.
pub fn point_in(radius: f64) -> impl Strategy<Value = Point> {
    (0.0f64..1.0, 0.0f64..std::f64::consts::TAU)
        .prop_map(move |(s, t)| Point::from_polar(radius * s.sqrt(), t))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
