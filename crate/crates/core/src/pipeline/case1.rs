//! Orders `k <= 1400`: reduce the Matveev bounds on `ell` and `m` with
//! approximation lattices built from `log alpha`, `log 10` and `log(9 f_k(alpha)/...)`.

use std::borrow::Cow;

use rug::Integer;

use super::checkpoint::{CellKey, Checkpoint};
use super::sweep::{sweep, StageCells};
use crate::algebraic::{dominant_root, ln_int, weight_from_root, Enclosure};
use crate::error::{domain, Result};
use crate::lattice::{reduce_linear_form, CellReduction, LinearFormProblem, RetryPolicy};

pub const STAGE_ELL: &str = "case1-ell";
pub const STAGE_M: &str = "case1-m";

/// Digits for `c3` and `c4`; they only enter through logarithms.
const CONST_DIGITS: u32 = 60;

/// `log alpha(k)`, `log(9 f_k(alpha))` and `log 10` at one precision.
#[derive(Debug, Clone)]
pub struct OrderConstants {
    k: u32,
    digits: u32,
    log_alpha: Enclosure,
    log_nine_f: Enclosure,
    ln10: Enclosure,
}

impl OrderConstants {
    pub fn new(k: u32, digits: u32) -> Result<Self> {
        let root = dominant_root(k, digits)?;
        let weight = weight_from_root(&root)?;
        Ok(Self {
            k,
            digits,
            log_alpha: root.alpha().ln()?,
            log_nine_f: weight.value().mul_integer(&Integer::from(9)).ln()?,
            ln10: ln_int(10, digits),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn log_alpha(&self) -> &Enclosure {
        &self.log_alpha
    }

    pub fn log_nine_f(&self) -> &Enclosure {
        &self.log_nine_f
    }

    /// These constants if they carry at least `digits`, else a fresh computation.
    fn at(&self, digits: u32) -> Result<Cow<'_, Self>> {
        if digits <= self.digits {
            Ok(Cow::Borrowed(self))
        } else {
            Ok(Cow::Owned(Self::new(self.k, digits)?))
        }
    }
}

/// All `(d1, d2)` with `1 <= d1 <= 9`, `0 <= d2 <= 9`, `d1 != d2`.
pub fn digit_pairs() -> Vec<(u8, u8)> {
    (1..=9u8).flat_map(|d1| (0..=9u8).filter(move |&d2| d2 != d1).map(move |d2| (d1, d2))).collect()
}

/// `lo, lo + stride, ...` with `hi` always included.
pub fn strided(lo: u32, hi: u32, stride: u32) -> Vec<u32> {
    if lo > hi {
        return Vec::new();
    }
    let mut v: Vec<u32> = (lo..=hi).step_by(stride.max(1) as usize).collect();
    if v.last() != Some(&hi) {
        v.push(hi);
    }
    v
}

/// `d1 10^ell - (d1 - d2)`, the leading block of the palindrome.
pub fn leading_block(ell: u32, d1: u8, d2: u8) -> Integer {
    Integer::from(Integer::u_pow_u(10, ell)) * u32::from(d1) - (i32::from(d1) - i32::from(d2))
}

fn problem(label: String, c: &Integer, n_coeff: &Integer) -> LinearFormProblem {
    LinearFormProblem {
        label,
        c: c.clone(),
        c3: Enclosure::from_int(17, CONST_DIGITS),
        c4: ln_int(10, CONST_DIGITS),
        x: vec![n_coeff.clone(); 3],
    }
}

/// Constants sized for every `C` the retry policy may reach.
pub fn constants_for(k: u32, c: &Integer, policy: &RetryPolicy) -> Result<OrderConstants> {
    OrderConstants::new(k, policy.max_digits(c))
}

/// One `(k, d1)` cell of the `ell` reduction:
/// `|n log alpha - (2 ell + m) log 10 + log(9 f_k / d1)| < 17 / 10^ell`.
pub fn case1_ell_cell(
    consts: &OrderConstants,
    d1: u8,
    n_coeff: &Integer,
    c: &Integer,
    policy: &RetryPolicy,
) -> Result<CellReduction> {
    if !(1..=9).contains(&d1) {
        return domain(format!("d1 must be in 1..=9, got {d1}"));
    }
    let key = CellKey::new(STAGE_ELL, Some(consts.k), d1, None, None);
    reduce_linear_form(&problem(key.label(), c, n_coeff), policy, |digits| {
        let cs = consts.at(digits)?;
        let eta3 = &cs.log_nine_f - &ln_int(i64::from(d1), digits);
        Ok((vec![cs.log_alpha.clone(), -&cs.ln10, eta3], None))
    })
}

/// One `(k, ell, d1, d2)` cell of the `m` reduction:
/// `|n log alpha - (ell + m) log 10 + log(9 f_k / (d1 10^ell - (d1 - d2)))| < 17 / 10^m`.
pub fn case1_m_cell(
    consts: &OrderConstants,
    ell: u32,
    d1: u8,
    d2: u8,
    n_coeff: &Integer,
    c: &Integer,
    policy: &RetryPolicy,
) -> Result<CellReduction> {
    if !(1..=9).contains(&d1) || d2 > 9 || d1 == d2 || ell == 0 {
        return domain(format!("need 1 <= d1 <= 9, d2 <= 9, d1 != d2, ell >= 1; got d1={d1}, d2={d2}, ell={ell}"));
    }
    let key = CellKey::new(STAGE_M, Some(consts.k), d1, Some(d2), Some(ell));
    let block = leading_block(ell, d1, d2);
    reduce_linear_form(&problem(key.label(), c, n_coeff), policy, |digits| {
        let cs = consts.at(digits)?;
        let eta3 = &cs.log_nine_f - &Enclosure::from_integer(&block, digits).ln()?;
        Ok((vec![cs.log_alpha.clone(), -&cs.ln10, eta3], None))
    })
}

fn check_orders(ks: &[u32]) -> Result<()> {
    if let Some(k) = ks.iter().find(|&&k| k < 2) {
        return domain(format!("order k must be at least 2, got {k}"));
    }
    Ok(())
}

/// The `ell` reduction over every `(k, d1)`.
pub fn case1_reduce_ell(
    ks: &[u32],
    d1s: &[u8],
    n_coeff: &Integer,
    c: &Integer,
    policy: &RetryPolicy,
    checkpoint: Option<&Checkpoint>,
) -> Result<StageCells> {
    check_orders(ks)?;
    let groups: Vec<(u32, Vec<u8>)> = ks.iter().map(|&k| (k, d1s.to_vec())).collect();
    sweep(
        &groups,
        checkpoint,
        |&k| constants_for(k, c, policy),
        |&k, &d1| CellKey::new(STAGE_ELL, Some(k), d1, None, None),
        |consts, _, &d1| case1_ell_cell(consts, d1, n_coeff, c, policy),
    )
}

/// `(ell, d1, d2)` within one order.
type MCell = (u32, u8, u8);

/// The `m` reduction over every `(k, ell, d1, d2)`.
pub fn case1_reduce_m(
    ks: &[u32],
    ells: &[u32],
    pairs: &[(u8, u8)],
    n_coeff: &Integer,
    c: &Integer,
    policy: &RetryPolicy,
    checkpoint: Option<&Checkpoint>,
) -> Result<StageCells> {
    check_orders(ks)?;
    let cells: Vec<MCell> = ells.iter().flat_map(|&ell| pairs.iter().map(move |&(d1, d2)| (ell, d1, d2))).collect();
    let groups: Vec<(u32, Vec<MCell>)> = ks.iter().map(|&k| (k, cells.clone())).collect();
    sweep(
        &groups,
        checkpoint,
        |&k| constants_for(k, c, policy),
        |&k, &(ell, d1, d2)| CellKey::new(STAGE_M, Some(k), d1, Some(d2), Some(ell)),
        |consts, _, &(ell, d1, d2)| case1_m_cell(consts, ell, d1, d2, n_coeff, c, policy),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::parse_integer;
    use crate::lattice::is_reduced;

    #[test]
    fn pairs_and_strides() {
        let p = digit_pairs();
        assert_eq!(p.len(), 81);
        assert!(p.iter().all(|&(a, b)| a != b && a >= 1));
        assert_eq!(strided(2, 1400, 25).len(), 57);
        assert_eq!(*strided(2, 1400, 25).last().unwrap(), 1400);
        assert_eq!(strided(1, 9, 4), vec![1, 5, 9]);
        assert_eq!(strided(1, 10, 4), vec![1, 5, 9, 10]);
        assert!(strided(5, 4, 1).is_empty());
    }

    #[test]
    fn leading_blocks() {
        // 545: d1 = 5, d2 = 4, ell = 1
        assert_eq!(leading_block(1, 5, 4), 49);
        assert_eq!(leading_block(3, 1, 0), 999);
        assert_eq!(leading_block(2, 2, 9), 207);
    }

    #[test]
    fn ell_cell_is_reduced_and_capped() {
        let c = parse_integer("5.8e191").unwrap();
        let n = parse_integer("8.3e63").unwrap();
        let policy = RetryPolicy::default();
        let consts = constants_for(2, &c, &policy).unwrap();
        let cell = case1_ell_cell(&consts, 1, &n, &c, &policy).unwrap();
        assert!(is_reduced(&cell.basis));
        assert!(cell.cap > 100 && cell.cap < 200, "cap {}", cell.cap);
    }

    #[test]
    fn smaller_coefficient_bound_gives_smaller_cap() {
        let c = parse_integer("5.8e191").unwrap();
        let policy = RetryPolicy::default();
        let consts = constants_for(3, &c, &policy).unwrap();
        let big = case1_ell_cell(&consts, 5, &parse_integer("8.3e63").unwrap(), &c, &policy).unwrap();
        let small = case1_ell_cell(&consts, 5, &Integer::from(10), &c, &policy).unwrap();
        assert!(small.cap <= big.cap, "{} vs {}", small.cap, big.cap);
    }

    #[test]
    fn rejects_bad_digits() {
        let c = Integer::from(Integer::u_pow_u(10, 40));
        let policy = RetryPolicy::default();
        let consts = constants_for(2, &c, &policy).unwrap();
        let n = Integer::from(100);
        assert!(case1_ell_cell(&consts, 0, &n, &c, &policy).is_err());
        assert!(case1_m_cell(&consts, 1, 3, 3, &n, &c, &policy).is_err());
        assert!(case1_m_cell(&consts, 0, 3, 4, &n, &c, &policy).is_err());
    }
}
