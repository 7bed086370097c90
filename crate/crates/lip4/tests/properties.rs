//! Property tests for the structural invariants: transform norms, algebraic
//! identities, container round-trips, bound ordering.

use num_complex::Complex64;
use proptest::prelude::*;

use lip4::dense::gram_rescaled;
use lip4::linalg::{dft2, svd, ComplexMatrix, RealTensor4};
use lip4::lipk;

fn complex_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), r * c).prop_map(
            move |parts| {
                let entries = parts
                    .into_iter()
                    .map(|(re, im)| Complex64::new(re, im))
                    .collect();
                ComplexMatrix::new(r, c, entries).expect("finite by construction")
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_for_unnormalized_dft2(m in complex_matrix(12, 12).prop_filter("square", |m| m.rows() == m.cols())) {
        let n = m.rows() as f64;
        let y = dft2(&m).unwrap();
        let lhs = y.frobenius_norm();
        let rhs = n * m.frobenius_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn matmul_is_associative(
        a in complex_matrix(5, 4),
        b_cols in 1usize..5,
        c_cols in 1usize..5,
        seed in 0u64..1000,
    ) {
        let b = lip4::synth::gaussian_complex_matrix(a.cols(), b_cols, seed);
        let c = lip4::synth::gaussian_complex_matrix(b_cols, c_cols, seed + 1);
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        let scale = left.frobenius_norm().max(1.0);
        prop_assert!(left.sub(&right).unwrap().frobenius_norm() <= 1e-12 * scale);
    }

    #[test]
    fn frobenius_is_schatten_two(m in complex_matrix(8, 8)) {
        let r = svd(&m).unwrap();
        let schatten: f64 = r.singular_values.iter().map(|s| s * s).sum::<f64>().sqrt();
        let frob = m.frobenius_norm();
        prop_assert!((schatten - frob).abs() <= 1e-10 * frob.max(1.0));
    }

    #[test]
    fn gram_trace_upper_bounds_and_decreases(m in complex_matrix(8, 6)) {
        let sigma1 = svd(&m).unwrap().spectral_norm();
        let rep = gram_rescaled(&m, 8);
        for w in rep.trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        for b in &rep.trace {
            prop_assert!(*b >= sigma1 - 1e-9 * sigma1);
        }
    }

    #[test]
    fn lipk_round_trip_is_bit_exact(
        dims in (1usize..4, 1usize..4, 1usize..5, 1usize..5),
        seed in 0u64..1000,
    ) {
        let len = dims.0 * dims.1 * dims.2 * dims.3;
        let entries = lip4::synth::standard_normal(len, seed);
        let tensor = RealTensor4::new(dims, entries).unwrap();
        let back = lipk::from_bytes(&lipk::to_bytes(&tensor)).unwrap();
        prop_assert_eq!(tensor.dims(), back.dims());
        for (a, b) in tensor.entries().iter().zip(back.entries()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
