//! Brute-force lattice oracles shared by the integration targets.
//!
//! Enumeration runs over coefficient vectors of the *input* basis, bounded
//! through the adjugate: for `v = B x`, `|x_i| <= ||adj(B)_i|| ||v|| / |det B|`.

#![allow(dead_code)]

use kpell::lattice::LatticeBasis;
use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};
use rug::Integer;

pub type Small = [[i64; 3]; 3];

pub fn basis_from_columns(cols: &Small) -> Option<LatticeBasis> {
    LatticeBasis::from_columns(cols.iter().map(|c| c.iter().map(|&v| Integer::from(v)).collect()).collect()).ok()
}

pub fn det3(m: &Small) -> i64 {
    // m[j] is column j; the determinant is the same for the transpose.
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[1][0] * (m[0][1] * m[2][2] - m[0][2] * m[2][1])
        + m[2][0] * (m[0][1] * m[1][2] - m[0][2] * m[1][1])
}

/// Rows of the adjugate of the column matrix, as f64.
#[allow(clippy::needless_range_loop)]
fn adjugate_rows(m: &Small) -> [[f64; 3]; 3] {
    // a[i][r] is entry r of column i
    let a = |r: usize, c: usize| m[c][r] as f64;
    let mut adj = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            adj[i][j] = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
        }
    }
    adj
}

fn coefficient_bounds(m: &Small, radius: f64) -> [i64; 3] {
    let det = det3(m).unsigned_abs() as f64;
    let adj = adjugate_rows(m);
    let mut out = [0; 3];
    for i in 0..3 {
        let row = adj[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        out[i] = (row * radius / det).floor() as i64 + 1;
    }
    out
}

fn combo(m: &Small, x: [i64; 3]) -> [i128; 3] {
    let mut v = [0i128; 3];
    for (j, col) in m.iter().enumerate() {
        for r in 0..3 {
            v[r] += i128::from(x[j]) * i128::from(col[r]);
        }
    }
    v
}

fn norm_sq(v: [i128; 3]) -> i128 {
    v.iter().map(|a| a * a).sum()
}

/// Number of coefficient vectors the enumeration would visit.
pub fn enumeration_size(m: &Small, radius_sq: i128) -> f64 {
    coefficient_bounds(m, (radius_sq as f64).sqrt()).iter().map(|b| (2 * b + 1) as f64).product()
}

/// `lambda_1^2`, given any `radius_sq >= lambda_1^2`.
pub fn shortest_sq(m: &Small, radius_sq: i128) -> i128 {
    let b = coefficient_bounds(m, (radius_sq as f64).sqrt());
    let mut best = i128::MAX;
    for x0 in -b[0]..=b[0] {
        for x1 in -b[1]..=b[1] {
            for x2 in -b[2]..=b[2] {
                if x0 == 0 && x1 == 0 && x2 == 0 {
                    continue;
                }
                best = best.min(norm_sq(combo(m, [x0, x1, x2])));
            }
        }
    }
    best
}

/// Squared distance from `y` to the lattice, given any `radius_sq` at least that large.
pub fn distance_sq(m: &Small, y: [i64; 3], radius_sq: i128) -> i128 {
    // Enumerate x with ||Bx - y|| <= R around a rational centre z = B^-1 y.
    let det = det3(m) as f64;
    let adj = adjugate_rows(m);
    let radius = (radius_sq as f64).sqrt();
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for i in 0..3 {
        let z = (0..3).map(|j| adj[i][j] * y[j] as f64).sum::<f64>() / det;
        let row = adj[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = row * radius / det.abs() + 1.0;
        lo[i] = (z - w).floor() as i64;
        hi[i] = (z + w).ceil() as i64;
    }
    let mut best = i128::MAX;
    for x0 in lo[0]..=hi[0] {
        for x1 in lo[1]..=hi[1] {
            for x2 in lo[2]..=hi[2] {
                let v = combo(m, [x0, x1, x2]);
                let d = [v[0] - i128::from(y[0]), v[1] - i128::from(y[1]), v[2] - i128::from(y[2])];
                best = best.min(norm_sq(d));
            }
        }
    }
    best
}

pub fn min_column_sq(m: &Small) -> i128 {
    m.iter().map(|c| norm_sq([c[0].into(), c[1].into(), c[2].into()])).min().unwrap()
}

pub fn to_small(b: &LatticeBasis) -> Small {
    let mut out = [[0i64; 3]; 3];
    for (j, col) in b.columns().iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            out[j][r] = v.to_i64().expect("small entries stay small");
        }
    }
    out
}

pub fn rng() -> TestRng {
    TestRng::deterministic_rng(RngAlgorithm::ChaCha)
}

pub fn uniform(rng: &mut TestRng, lo: i64, hi: i64) -> i64 {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64
}

/// A nonsingular basis with entries in `[-bound, bound]` whose enumeration stays cheap.
pub fn random_small_basis(rng: &mut TestRng, bound: i64) -> Small {
    loop {
        let mut m = [[0i64; 3]; 3];
        for col in m.iter_mut() {
            for v in col.iter_mut() {
                *v = uniform(rng, -bound, bound);
            }
        }
        if det3(&m) != 0 && enumeration_size(&m, min_column_sq(&m)) < 2e6 {
            return m;
        }
    }
}

/// A random integer with up to `digits` decimal digits, sign included.
pub fn random_big(rng: &mut TestRng, digits: u32) -> Integer {
    let len = 1 + (rng.next_u64() % u64::from(digits)) as u32;
    let mut v = Integer::new();
    for _ in 0..len {
        v = v * 10u32 + (rng.next_u64() % 10) as u32;
    }
    if rng.next_u64() & 1 == 1 {
        -v
    } else {
        v
    }
}

/// Column-matrix determinant of `transform` is a unit.
pub fn is_unimodular(t: &[Vec<Integer>]) -> bool {
    let cols = t.to_vec();
    match LatticeBasis::from_columns(cols) {
        Ok(b) => {
            let d = b.determinant();
            d == 1 || d == -1
        }
        Err(_) => false,
    }
}

/// `basis * transform`, column by column.
pub fn apply(basis: &LatticeBasis, t: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let n = basis.dim();
    t.iter()
        .map(|coef| {
            (0..n)
                .map(|r| {
                    let mut s = Integer::new();
                    for (j, c) in coef.iter().enumerate() {
                        s += Integer::from(c * &basis.column(j)[r]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}
