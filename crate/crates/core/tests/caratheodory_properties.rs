use num_complex::Complex64;
use proptest::prelude::*;
use rkhs_core::caratheodory::{cara_norm_ball, cara_norm_polydisc, BallAutomorphism, MatricialTangent};
use rkhs_core::linalg::CMatrix;
use rkhs_core::mobius::DiscAutomorphism;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

/// A point of the open ball in `C^m` with norm at most `radius`.
fn ball_point(m: usize, radius: f64) -> impl Strategy<Value = Vec<Complex64>> {
    (prop::collection::vec(complex(), m), 0.0f64..1.0).prop_map(move |(v, s)| {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        v.into_iter().map(|z| z * (radius * s / n)).collect()
    })
}

fn tangent(m: usize, n: usize) -> impl Strategy<Value = MatricialTangent> {
    prop::collection::vec(complex(), m * n).prop_map(move |v| MatricialTangent::from_flat(m, n, &v).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..4, 1usize..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ball_norm_is_automorphism_invariant(
        (z, b, v) in dims().prop_flat_map(|(m, n)| (ball_point(m, 0.8), ball_point(m, 0.8), tangent(m, n))),
    ) {
        let phi = BallAutomorphism::new(&b).unwrap();
        let moved = v.push_forward(&phi.derivative(&z)).unwrap();
        let lhs = cara_norm_ball(&moved, &phi.apply(&z)).unwrap();
        let rhs = cara_norm_ball(&v, &z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn polydisc_norm_is_automorphism_invariant(
        z in prop::collection::vec(complex().prop_map(|c| c * 0.6), 3),
        b in prop::collection::vec(complex().prop_map(|c| c * 0.6), 3),
        v in tangent(3, 2),
    ) {
        let phis: Vec<DiscAutomorphism> = b.iter().map(|&c| DiscAutomorphism::new(c).unwrap()).collect();
        let d = CMatrix::from_fn(3, 3, |i, j| if i == j { phis[i].derivative(z[i]) } else { 0.0.into() });
        let image: Vec<Complex64> = z.iter().zip(&phis).map(|(&x, p)| p.apply(x)).collect();
        let lhs = cara_norm_polydisc(&v.push_forward(&d).unwrap(), &image).unwrap();
        let rhs = cara_norm_polydisc(&v, &z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn zero_block_leaves_ball_norm_at_origin_unchanged(v in tangent(2, 3)) {
        let mut blocks: Vec<Vec<Complex64>> = (0..2).map(|i| v.block(i)).collect();
        blocks.push(vec![Complex64::new(0.0, 0.0); 3]);
        let grown = MatricialTangent::new(&blocks).unwrap();
        let zero = |m| vec![Complex64::new(0.0, 0.0); m];
        prop_assert_eq!(cara_norm_ball(&grown, &zero(3)).unwrap(), cara_norm_ball(&v, &zero(2)).unwrap());
    }

    #[test]
    fn ball_and_polydisc_agree_in_one_variable(v in tangent(1, 3), z in complex().prop_map(|c| c * 0.7)) {
        let a = cara_norm_ball(&v, &[z]).unwrap();
        let b = cara_norm_polydisc(&v, &[z]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

