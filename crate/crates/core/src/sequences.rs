//! Exact generation of k-generalized Pell numbers.
//!
//! The order-k sequence starts with `k - 1` zeros at indices `2-k..=0`, has
//! `P_1 = 1`, and for `n >= 2` satisfies
//! `P_n = 2 P_{n-1} + P_{n-2} + ... + P_{n-k}`.
//!
//! Generation keeps a running sum `W_n = P_{n-1} + ... + P_{n-k}` of the
//! last `k` terms, so `P_n = P_{n-1} + W_n` and
//! `W_{n+1} = W_n + P_n - P_{n-k}`. Each step costs two big additions
//! regardless of `k`.

use std::collections::VecDeque;
use std::io::Write;

use rug::Integer;

use crate::error::{domain, Result};
use crate::BigCount;

/// Order and length of a k-Pell table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceParams {
    k: u32,
    n_max: i64,
}

impl SequenceParams {
    pub fn new(k: u32, n_max: i64) -> Result<Self> {
        if k < 2 {
            return domain(format!("order k must be at least 2, got {k}"));
        }
        if n_max < 1 {
            return domain(format!("n_max must be at least 1, got {n_max}"));
        }
        Ok(Self { k, n_max })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }
}

/// All terms `P_n` for `n` in `2-k ..= n_max`, indexed with the usual
/// (possibly non-positive) convention.
#[derive(Debug, Clone)]
pub struct KPellTable {
    params: SequenceParams,
    terms: Vec<BigCount>,
}

impl KPellTable {
    pub fn params(&self) -> SequenceParams {
        self.params
    }

    pub fn first_index(&self) -> i64 {
        2 - i64::from(self.params.k)
    }

    /// The term `P_n`, or `None` if `n` is outside `2-k ..= n_max`.
    pub fn get(&self, n: i64) -> Option<&BigCount> {
        let offset = n.checked_sub(self.first_index())?;
        usize::try_from(offset).ok().and_then(|i| self.terms.get(i))
    }

    /// Iterator over `(n, P_n)` for the whole table.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigCount)> {
        let first = self.first_index();
        self.terms.iter().enumerate().map(move |(i, v)| (first + i as i64, v))
    }

    /// Writes `k,n,value` rows for every index `n >= 1`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,n,value")?;
        for (n, v) in self.iter().filter(|(n, _)| *n >= 1) {
            writeln!(out, "{},{},{}", self.params.k, n, v)?;
        }
        Ok(())
    }
}

/// Streaming generator of `P_1, P_2, ...` for a fixed order.
///
/// Only the last `k` terms are retained, so sweeps over large `k` and `n`
/// never materialize whole tables.
#[derive(Debug, Clone)]
pub struct KPellIter {
    window: VecDeque<Integer>,
    window_sum: Integer,
    next_n: i64,
}

impl KPellIter {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return domain(format!("order k must be at least 2, got {k}"));
        }
        let mut window: VecDeque<Integer> = (0..k - 1).map(|_| Integer::new()).collect();
        window.push_back(Integer::from(1));
        Ok(Self {
            window,
            // P_{1} + P_{0} + ... + P_{2-k}
            window_sum: Integer::from(1),
            next_n: 1,
        })
    }

    /// Index of the term the next call to `next` returns.
    pub fn next_index(&self) -> i64 {
        self.next_n
    }
}

impl Iterator for KPellIter {
    type Item = (i64, Integer);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next_n;
        self.next_n += 1;
        if n == 1 {
            return Some((1, Integer::from(1)));
        }
        // window holds P_{n-k} ..= P_{n-1}, window_sum is their sum.
        let last = self.window.back().expect("window is never empty");
        let term = Integer::from(last + &self.window_sum);
        let leaving = self.window.pop_front().expect("window is never empty");
        self.window_sum += &term;
        self.window_sum -= leaving;
        self.window.push_back(term.clone());
        Some((n, term))
    }
}

/// Builds the full table `P_{2-k} ..= P_{n_max}`.
pub fn kpell_range(params: SequenceParams) -> KPellTable {
    let k = params.k;
    let mut terms: Vec<Integer> = (0..k - 1).map(|_| Integer::new()).collect();
    let iter = KPellIter::new(k).expect("params already validated");
    terms.extend(iter.take(params.n_max as usize).map(|(_, v)| v));
    KPellTable { params, terms }
}

/// The single term `P_n^{(k)}`.
pub fn kpell_term(k: u32, n: i64) -> Result<BigCount> {
    if k < 2 {
        return domain(format!("order k must be at least 2, got {k}"));
    }
    if n < 2 - i64::from(k) {
        return domain(format!("index {n} is below 2-k = {}", 2 - i64::from(k)));
    }
    if n <= 0 {
        return Ok(Integer::new());
    }
    let (_, v) = KPellIter::new(k)?.nth((n - 1) as usize).expect("generator is infinite");
    Ok(v)
}

/// Fibonacci number with `F_0 = 0`, `F_1 = F_2 = 1`.
pub fn fibonacci(n: i64) -> Result<BigCount> {
    if n < 0 {
        return domain(format!("Fibonacci index must be nonnegative, got {n}"));
    }
    let n = u32::try_from(n).map_err(|_| crate::Error::Domain(format!("Fibonacci index {n} too large")))?;
    Ok(Integer::from(Integer::fibonacci(n)))
}

/// A failed Fibonacci identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityViolation {
    pub k: u32,
    pub n: i64,
    pub expected: BigCount,
    pub actual: BigCount,
}

/// Checks `P_n = F_{2n-1}` for `1 <= n <= min(k+1, n_max)` and, when
/// `k + 2 <= n_max`, `P_{k+2} = F_{2k+3} - 1`.
pub fn check_fib_identities(k: u32, n_max: i64) -> Result<Vec<IdentityViolation>> {
    if k < 2 {
        return domain(format!("order k must be at least 2, got {k}"));
    }
    let top = i64::from(k) + 2;
    let mut violations = Vec::new();
    for (n, actual) in KPellIter::new(k)?.take_while(|(n, _)| *n <= n_max.min(top)) {
        let mut expected = fibonacci(2 * n - 1)?;
        if n == top {
            expected -= 1;
        }
        if expected != actual {
            violations.push(IdentityViolation { k, n, expected, actual });
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct k-term sum, kept independent of the running-sum generator.
    fn naive(k: u32, n_max: i64) -> Vec<Integer> {
        let k = k as usize;
        let mut p: Vec<Integer> = vec![Integer::new(); k - 1];
        p.push(Integer::from(1));
        while (p.len() as i64) < n_max + k as i64 - 1 {
            let len = p.len();
            let mut t = Integer::from(&p[len - 1] * 2u32);
            for j in 2..=k {
                t += &p[len - j];
            }
            p.push(t);
        }
        p
    }

    #[test]
    fn table_one_samples() {
        let t = kpell_range(SequenceParams::new(2, 5).unwrap());
        assert_eq!(*t.get(5).unwrap(), 29);
        let t = kpell_range(SequenceParams::new(4, 11).unwrap());
        assert_eq!(*t.get(11).unwrap(), 10293);
        let t = kpell_range(SequenceParams::new(10, 13).unwrap());
        assert_eq!(*t.get(13).unwrap(), 75020);
    }

    #[test]
    fn initial_conditions() {
        let t = kpell_range(SequenceParams::new(9, 1).unwrap());
        assert_eq!(t.first_index(), -7);
        assert_eq!(*t.get(1).unwrap(), 1);
        assert_eq!(*t.get(0).unwrap(), 0);
        assert_eq!(*t.get(-7).unwrap(), 0);
        assert!(t.get(-8).is_none());
        assert!(t.get(2).is_none());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SequenceParams::new(1, 5).is_err());
        assert!(SequenceParams::new(2, 0).is_err());
        assert!(kpell_term(3, -2).is_err());
        assert!(fibonacci(-1).is_err());
    }

    #[test]
    fn single_terms() {
        assert_eq!(kpell_term(3, 8).unwrap(), 545);
        assert_eq!(kpell_term(5, 7).unwrap(), 232);
        assert_eq!(kpell_term(7, 0).unwrap(), 0);
        assert_eq!(kpell_term(7, -5).unwrap(), 0);
    }

    #[test]
    fn fibonacci_values() {
        assert_eq!(fibonacci(9).unwrap(), 34);
        assert_eq!(fibonacci(9).unwrap(), kpell_term(5, 5).unwrap());
        assert_eq!(fibonacci(1).unwrap(), 1);
        assert_eq!(fibonacci(15).unwrap(), 610);
        assert_eq!(fibonacci(15).unwrap(), kpell_term(8, 8).unwrap());
    }

    #[test]
    fn identities_small() {
        assert!(check_fib_identities(5, 7).unwrap().is_empty());
        assert!(check_fib_identities(2, 3).unwrap().is_empty());
        assert!(check_fib_identities(3, 4).unwrap().is_empty());
        assert!(check_fib_identities(1, 4).is_err());
    }

    #[test]
    fn identities_up_to_100() {
        for k in 2..=100 {
            assert!(check_fib_identities(k, i64::from(k) + 2).unwrap().is_empty(), "k={k}");
        }
    }

    #[test]
    fn running_sum_matches_naive() {
        for &(k, n_max) in &[(2, 40), (3, 50), (7, 60), (30, 90), (64, 200), (150, 300)] {
            let table = kpell_range(SequenceParams::new(k, n_max).unwrap());
            let reference = naive(k, n_max);
            let got: Vec<_> = table.iter().map(|(_, v)| v.clone()).collect();
            assert_eq!(got, reference, "k={k}");
        }
    }

    #[test]
    fn strictly_increasing_from_one() {
        let table = kpell_range(SequenceParams::new(6, 400).unwrap());
        let pos: Vec<_> = table.iter().filter(|(n, _)| *n >= 1).map(|(_, v)| v).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_dump() {
        let table = kpell_range(SequenceParams::new(3, 4).unwrap());
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,n,value\n3,1,1\n3,2,2\n3,3,5\n3,4,13\n");
    }
}
