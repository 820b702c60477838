mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use rkhs_core::curvature::{curvature_scalar, curvature_scalar_fd, extremal_bound, mobius_rule_check};
use rkhs_core::kernel::{mobius_pullback, normalize_at, tilde_kernel};
use rkhs_core::mobius::DiscAutomorphism;
use rkhs_core::{Kernel, Point, SeriesKernel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_hermitian(k in contractive_kernel(), z in point_in(0.9), w in point_in(0.9)) {
        let (a, b) = (k.eval(z, w).unwrap(), k.eval(w, z).unwrap());
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        prop_assert!(k.eval(z, z).unwrap().re > 0.0);
    }

    #[test]
    fn jet_matches_difference_quotients(k in contractive_kernel(), z in point_in(0.8), w in point_in(0.8)) {
        let h = 1e-5;
        let dz = (k.eval(z + h, w).unwrap() - k.eval(z - h, w).unwrap()) / (2.0 * h);
        let d = k.deriv(z, w, 1, 0).unwrap();
        prop_assert!((dz - d).norm() <= 1e-6 * d.norm().max(1.0));
        // conj-derivative in w: the series depends on conj(w) only
        let dw = (k.eval(z, w + h).unwrap() - k.eval(z, w - h).unwrap()) / (2.0 * h);
        let dbar = k.deriv(z, w, 0, 1).unwrap();
        prop_assert!((dw - dbar).norm() <= 1e-6 * dbar.norm().max(1.0));
    }

    #[test]
    fn tilde_coefficients_telescope(k in contractive_kernel()) {
        let t = tilde_kernel(&k).unwrap();
        let mut partial = 0.0;
        for (n, b) in t.coeffs().iter().enumerate() {
            partial += b;
            prop_assert!(rel_err(partial, k.coeffs()[n]) <= 1e-12);
        }
        prop_assert!(t.all_nonnegative());
    }

    #[test]
    fn tilde_kernel_is_one_minus_zw_times_kernel(k in contractive_kernel(), z in point_in(0.7), w in point_in(0.7)) {
        let t = tilde_kernel(&k).unwrap();
        let lhs = t.eval(z, w).unwrap();
        let rhs = (1.0 - z * w.conj()) * k.eval(z, w).unwrap();
        // the dropped last term is a_N (z conj w)^N, negligible at |zw| <= 0.49
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn normalization_is_idempotent(k in contractive_kernel(), c in point_in(0.5), z in point_in(0.6), w in point_in(0.6)) {
        let once = Arc::new(normalize_at(Arc::new(k), c).unwrap());
        let twice = normalize_at(once.clone(), c).unwrap();
        let a = once.eval(z, w).unwrap();
        prop_assert!((a - twice.eval(z, w).unwrap()).norm() <= 1e-10 * a.norm().max(1.0));
        prop_assert!((once.eval(z, c).unwrap() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn curvature_is_negative_and_below_bound(k in contractive_kernel(), w in point_in(0.9)) {
        let c = curvature_scalar(&k, w).unwrap();
        prop_assert!(c < 0.0);
        prop_assert!(c <= extremal_bound(w) + 1e-8);
    }

    #[test]
    fn curvature_agrees_with_finite_differences(k in contractive_kernel(), w in point_in(0.8)) {
        let exact = curvature_scalar(&k, w).unwrap();
        let fd = curvature_scalar_fd(&k, w).unwrap();
        prop_assert!(rel_err(fd, exact) <= 1e-5, "{} vs {}", fd, exact);
    }

    #[test]
    fn mobius_covariance(k in contractive_kernel(), a in point_in(0.6), z in point_in(0.6)) {
        let r = mobius_rule_check(Arc::new(k.clone()), a, z).unwrap();
        prop_assert!(r <= 1e-6 * curvature_scalar(&k, z).unwrap().abs().max(1.0));
    }

    #[test]
    fn pullback_evaluates_kernel_at_preimages(k in contractive_kernel(), a in point_in(0.5), z in point_in(0.5), w in point_in(0.5)) {
        let phi = DiscAutomorphism::new(a).unwrap();
        let pulled = mobius_pullback(Arc::new(k.clone()), a).unwrap();
        let direct = k.eval(phi.inverse(z), phi.inverse(w)).unwrap();
        prop_assert!((pulled.eval(z, w).unwrap() - direct).norm() <= 1e-12 * direct.norm().max(1.0));
    }
}

#[test]
fn backward_shift_curvature_is_extremal_on_a_dense_grid() {
    let k = SeriesKernel::geometric(N_MAX);
    for i in 0..=90 {
        let w = Point::from_polar(i as f64 / 100.0, i as f64);
        let c = curvature_scalar(&k, w).unwrap();
        assert!(rel_err(c, extremal_bound(w)) <= 1e-10);
    }
}
