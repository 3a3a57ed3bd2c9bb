//! Integral LLL (Cohen, Algorithm 2.6.7) with Lovász constant 3/4.
//!
//! Works with the Gram determinants `d_i` and the integers
//! `lambda_{i,j} = d_{j+1} mu_{i,j}`, so no rational arithmetic is needed.
//! Indices are zero-based; `d[i+1]` is the Gram determinant of the first
//! `i+1` vectors and `d[0] = 1`.

use rug::ops::DivRounding;
use rug::Integer;

use super::{dot, LatticeBasis};
use crate::error::{domain, Result};

/// Reduced basis together with the unimodular transform `reduced = basis * transform`.
#[derive(Debug, Clone)]
pub struct LllOutput {
    pub basis: LatticeBasis,
    /// Column `j` holds the coordinates of reduced vector `j` in the input basis.
    pub transform: Vec<Vec<Integer>>,
    pub swaps: u64,
}

struct State {
    b: Vec<Vec<Integer>>,
    h: Vec<Vec<Integer>>,
    d: Vec<Integer>,
    lam: Vec<Vec<Integer>>,
    swaps: u64,
}

/// Nearest integer to `num / den` for `den > 0`, ties rounded up.
fn round_div(num: &Integer, den: &Integer) -> Integer {
    let twice = Integer::from(num * 2u32) + den;
    twice.div_floor(Integer::from(den * 2u32))
}

fn axpy(target: &mut [Integer], q: &Integer, source: &[Integer]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= Integer::from(q * s);
    }
}

impl State {
    /// Size-reduces `b_k` against `b_l`.
    fn red(&mut self, k: usize, l: usize) {
        let twice = Integer::from(self.lam[k][l].abs_ref()) * 2u32;
        if twice <= self.d[l + 1] {
            return;
        }
        let q = round_div(&self.lam[k][l], &self.d[l + 1]);
        let (bl, hl) = (self.b[l].clone(), self.h[l].clone());
        axpy(&mut self.b[k], &q, &bl);
        axpy(&mut self.h[k], &q, &hl);
        self.lam[k][l] -= Integer::from(&q * &self.d[l + 1]);
        for i in 0..l {
            let t = Integer::from(&q * &self.lam[l][i]);
            self.lam[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, k_max: usize) {
        self.swaps += 1;
        self.b.swap(k, k - 1);
        self.h.swap(k, k - 1);
        for j in 0..k.saturating_sub(1) {
            let t = std::mem::take(&mut self.lam[k][j]);
            self.lam[k][j] = std::mem::replace(&mut self.lam[k - 1][j], t);
        }
        let lam = self.lam[k][k - 1].clone();
        // B = (d_{k-1} d_{k+1} + lambda^2) / d_k in the one-based numbering of d.
        let big_b =
            (Integer::from(&self.d[k - 1] * &self.d[k + 1]) + Integer::from(lam.square_ref())).div_exact(&self.d[k]);
        for i in k + 1..=k_max {
            let t = self.lam[i][k].clone();
            let new_ik =
                (Integer::from(&self.d[k + 1] * &self.lam[i][k - 1]) - Integer::from(&lam * &t)).div_exact(&self.d[k]);
            let new_ik1 = (Integer::from(&big_b * &t) + Integer::from(&lam * &new_ik)).div_exact(&self.d[k + 1]);
            self.lam[i][k] = new_ik;
            self.lam[i][k - 1] = new_ik1;
        }
        self.d[k] = big_b;
    }

    /// Lovász test in integer form: swap when `4 d_{k+1} d_{k-1} < 3 d_k^2 - 4 lambda^2`.
    fn needs_swap(&self, k: usize) -> bool {
        let lhs = Integer::from(&self.d[k + 1] * &self.d[k - 1]) * 4u32;
        let rhs = Integer::from(self.d[k].square_ref()) * 3u32 - Integer::from(self.lam[k][k - 1].square_ref()) * 4u32;
        lhs < rhs
    }
}

pub fn lll_reduce(basis: &LatticeBasis) -> Result<LatticeBasis> {
    Ok(lll_reduce_with_transform(basis)?.basis)
}

pub fn lll_reduce_with_transform(basis: &LatticeBasis) -> Result<LllOutput> {
    let n = basis.dim();
    let identity: Vec<Vec<Integer>> =
        (0..n).map(|j| (0..n).map(|i| Integer::from(u32::from(i == j))).collect()).collect();
    let mut st = State {
        b: basis.columns().to_vec(),
        h: identity,
        d: vec![Integer::new(); n + 1],
        lam: vec![vec![Integer::new(); n]; n],
        swaps: 0,
    };
    st.d[0] = Integer::from(1);
    st.d[1] = dot(&st.b[0], &st.b[0]);
    if st.d[1] == 0 {
        return domain("basis vectors are linearly dependent");
    }
    let mut k = 1;
    let mut k_max = 0;
    while k < n {
        if k > k_max {
            k_max = k;
            for j in 0..=k {
                let mut u = dot(&st.b[k], &st.b[j]);
                for i in 0..j {
                    u = (Integer::from(&st.d[i + 1] * &u) - Integer::from(&st.lam[k][i] * &st.lam[j][i]))
                        .div_exact(&st.d[i]);
                }
                if j < k {
                    st.lam[k][j] = u;
                } else {
                    if u == 0 {
                        return domain("basis vectors are linearly dependent");
                    }
                    st.d[k + 1] = u;
                }
            }
        }
        loop {
            st.red(k, k - 1);
            if st.needs_swap(k) {
                st.swap(k, k_max);
                k = (k - 1).max(1);
            } else {
                break;
            }
        }
        for l in (0..k.saturating_sub(1)).rev() {
            st.red(k, l);
        }
        k += 1;
    }
    Ok(LllOutput { basis: LatticeBasis::from_columns_unchecked(st.b), transform: st.h, swaps: st.swaps })
}

#[cfg(test)]
mod tests {
    use super::super::is_reduced;
    use super::*;

    fn basis(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::from_rows(rows.iter().map(|r| r.iter().map(|&v| Integer::from(v)).collect()).collect()).unwrap()
    }

    fn apply(b: &LatticeBasis, t: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
        let n = b.dim();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let mut s = Integer::new();
                        for (l, coeff) in t[j].iter().enumerate() {
                            s += Integer::from(&b.column(l)[i] * coeff);
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_is_fixed() {
        let b = basis(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(lll_reduce(&b).unwrap(), b);
    }

    #[test]
    fn shear_two_by_two() {
        // columns (1,0), (10,1)
        let b = basis(&[&[1, 10], &[0, 1]]);
        let r = lll_reduce(&b).unwrap();
        assert!(is_reduced(&r));
        let mut norms: Vec<_> = (0..2).map(|j| r.norm_sq(j)).collect();
        norms.sort();
        assert_eq!(norms, vec![Integer::from(1), Integer::from(1)]);
    }

    #[test]
    fn transform_is_unimodular_and_consistent() {
        let b = basis(&[&[1, 0, 0], &[0, 1, 0], &[123_456_789, -987_654_321, 555_555_555]]);
        let out = lll_reduce_with_transform(&b).unwrap();
        assert!(is_reduced(&out.basis));
        assert_eq!(apply(&b, &out.transform), out.basis.columns().to_vec());
        let t = LatticeBasis::from_columns(out.transform.clone()).unwrap();
        assert_eq!(Integer::from(t.determinant().abs_ref()), 1);
        assert_eq!(Integer::from(out.basis.determinant().abs_ref()), Integer::from(b.determinant().abs_ref()));
    }

    #[test]
    fn classic_example() {
        // Cohen's example: rows give columns (1,1,1), (-1,0,2), (3,5,6)
        let b = basis(&[&[1, -1, 3], &[1, 0, 5], &[1, 2, 6]]);
        let r = lll_reduce(&b).unwrap();
        assert!(is_reduced(&r));
        assert_eq!(r.determinant().abs(), b.determinant().abs());
        let shortest = (0..3).map(|j| r.norm_sq(j)).min().unwrap();
        assert!(shortest <= 3);
    }

    #[test]
    fn rejects_dependent() {
        let cols = vec![
            vec![Integer::from(1), Integer::from(2), Integer::from(3)],
            vec![Integer::from(2), Integer::from(4), Integer::from(6)],
            vec![Integer::from(0), Integer::from(0), Integer::from(1)],
        ];
        let b = LatticeBasis::from_columns_unchecked(cols);
        assert!(lll_reduce(&b).is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_div(&Integer::from(7), &Integer::from(2)), 4);
        assert_eq!(round_div(&Integer::from(-7), &Integer::from(2)), -3);
        assert_eq!(round_div(&Integer::from(5), &Integer::from(3)), 2);
        assert_eq!(round_div(&Integer::from(-5), &Integer::from(3)), -2);
    }
}
