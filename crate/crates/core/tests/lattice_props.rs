mod common;

use common::*;
use kpell::lattice::{is_reduced, lll_reduce_with_transform, lower_bound_c1_delta, LatticeBasis};
use kpell::Error;
use proptest::prelude::*;
use rug::Integer;

fn big_int() -> impl Strategy<Value = Integer> {
    // Up to 16 limbs, about 308 digits.
    (any::<bool>(), prop::collection::vec(any::<u64>(), 0..=16)).prop_map(|(neg, limbs)| {
        let v = Integer::from_digits(&limbs, rug::integer::Order::Lsf);
        if neg {
            -v
        } else {
            v
        }
    })
}

fn big_basis() -> impl Strategy<Value = LatticeBasis> {
    prop::collection::vec(prop::collection::vec(big_int(), 3), 3)
        .prop_filter_map("singular", |cols| LatticeBasis::from_columns(cols).ok())
}

fn small_basis() -> impl Strategy<Value = Small> {
    prop::array::uniform3(prop::array::uniform3(-20i64..=20))
        .prop_filter("singular or costly", |m| det3(m) != 0 && enumeration_size(m, min_column_sq(m)) < 2e6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reduction_is_unimodular_and_reduced(b in big_basis()) {
        let out = lll_reduce_with_transform(&b).unwrap();
        prop_assert!(is_reduced(&out.basis));
        prop_assert!(is_unimodular(&out.transform));
        prop_assert_eq!(apply(&b, &out.transform), out.basis.columns().to_vec());
        prop_assert_eq!(out.basis.determinant().abs(), b.determinant().abs());
    }

    #[test]
    fn first_vector_within_lll_factor(m in small_basis()) {
        let b = basis_from_columns(&m).unwrap();
        let red = lll_reduce_with_transform(&b).unwrap().basis;
        let first = red.norm_sq(0).to_i128().unwrap();
        let lambda = shortest_sq(&m, min_column_sq(&m));
        // ||b_1||^2 <= 2^(n-1) lambda_1^2 with n = 3
        prop_assert!(lambda <= first && first <= 4 * lambda, "lambda {} first {}", lambda, first);
    }

    #[test]
    fn delta_below_true_distance(m in small_basis(), y in prop::array::uniform3(-60i64..=60)) {
        let b = basis_from_columns(&m).unwrap();
        let red = lll_reduce_with_transform(&b).unwrap().basis;
        let target: Vec<Integer> = y.iter().map(|&v| Integer::from(v)).collect();
        let radius = y.iter().map(|&v| i128::from(v) * i128::from(v)).sum::<i128>();
        let dist = distance_sq(&m, y, radius);
        match lower_bound_c1_delta(&red, &target) {
            Ok(d) if d.in_lattice => prop_assert_eq!(dist, 0),
            Ok(d) => prop_assert!(d.delta_sq <= dist, "delta^2 {} > dist^2 {}", d.delta_sq, dist),
            Err(Error::IncreaseC(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn oracle_sanity() {
    let m: Small = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    assert_eq!(shortest_sq(&m, 1), 1);
    assert_eq!(distance_sq(&m, [3, -4, 5], 50), 0);
    let m: Small = [[2, 0, 0], [0, 2, 0], [0, 0, 2]];
    assert_eq!(distance_sq(&m, [1, 1, 1], 3), 3);
    assert_eq!(det3(&[[1, 2, 3], [0, 1, 4], [5, 6, 0]]), 1);
}
