//! Gauss-Legendre rules, adaptive bisection on top of them, and the periodic
//! trapezoid rule used for boundary fluxes.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]`; nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const ADAPTIVE_ORDER: usize = 20;
const MAX_DEPTH: usize = 40;

/// Adaptive Gauss-Legendre integration: an interval is accepted when the rule
/// on it agrees with the sum over its two halves to relative `rel_tol`, or to
/// `rel_tol` times its proportional share of the whole integral.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let rule = GaussLegendre::new(ADAPTIVE_ORDER);
    let whole = rule.integrate(&f, a, b);
    let share = whole.abs() / (b - a).abs();
    let mut total = 0.0;
    let mut stack = vec![(a, b, whole, 0usize)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&f, lo, mid);
        let right = rule.integrate(&f, mid, hi);
        let refined = left + right;
        if !refined.is_finite() {
            return Err(Error::QuadratureFailure { a: lo, b: hi });
        }
        if (refined - est).abs() <= rel_tol * refined.abs().max(share * (hi - lo).abs()) {
            total += refined;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure { a: lo, b: hi });
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

/// Trapezoid rule for a `2 pi`-periodic function on `nodes` equispaced points.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, nodes: usize) -> f64 {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes).map(|k| f(k as f64 * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the limit for five nodes
        let v = rule.integrate(&|x: f64| x.powi(8) + x.powi(3), 0.0, 2.0);
        assert!((v - (2f64.powi(9) / 9.0 + 4.0)).abs() < 1e-12);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn known_nodes() {
        let rule = GaussLegendre::new(2);
        assert!((rule.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(rule.weights.iter().all(|w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // int_{1/2}^1 rho^401 d rho
        let v = adaptive(|x| x.powi(401), 0.5, 1.0, 1e-12).unwrap();
        let exact = (1.0 - 0.5f64.powi(402)) / 402.0;
        assert!((v - exact).abs() < 1e-12 * exact);
        let v = adaptive(|x: f64| (40.0 * x).cos() * x.exp(), 0.0, 3.0, 1e-12).unwrap();
        // oracle: antiderivative e^x (cos 40x + 40 sin 40x) / 1601
        let anti = |x: f64| x.exp() * ((40.0 * x).cos() + 40.0 * (40.0 * x).sin()) / 1601.0;
        assert!((v - (anti(3.0) - anti(0.0))).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_non_finite() {
        assert!(adaptive(|x| 1.0 / x, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn trapezoid_on_trigonometric_polynomial() {
        let v = periodic_trapezoid(|t| 1.0 + t.cos().powi(2), 64);
        assert!((v - 3.0 * PI).abs() < 1e-13);
    }
}
