//! Exhaustive scan of `P_n^(k)` for palindromic concatenations of two repdigits.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::algebraic::{format_sci, growth_bounds_with, BinetContext, ANALYTIC_DIGITS};
use crate::digits::{compose, decompose, decompose_filtered, PalindromeShape};
use crate::error::{domain, Error, Result};
use crate::sequences::{kpell_term, KPellIter};
use crate::BigCount;

mod int_string {
    use rug::Integer;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Integer, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A term that is a palindromic concatenation, with its shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchMatch {
    pub k: u32,
    pub n: i64,
    #[serde(with = "int_string")]
    pub value: BigCount,
    pub shape: PalindromeShape,
}

/// The two solutions, as `(k, n, value)`.
pub const KNOWN_SOLUTIONS: [(u32, i64, u32); 2] = [(3, 8, 545), (5, 7, 232)];

/// Checks that tie a match to the index inequalities and the Binet estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDiagnostics {
    pub k: u32,
    pub n: i64,
    #[serde(with = "int_string")]
    pub value: BigCount,
    pub shape: PalindromeShape,
    /// `2 ell + m`, the digit count.
    pub width: u64,
    /// `2 ell + m < n`.
    pub width_below_n: bool,
    /// `6 (2 ell + m) + 2`.
    pub index_cap: u64,
    /// `n < 6 (2 ell + m) + 2`.
    pub n_below_cap: bool,
    /// Upper bound on `|P_n - f_k(alpha) alpha^n|`.
    pub binet_error: String,
    pub binet_ok: bool,
    /// `alpha^(n-2) <= P_n <= alpha^(n-1)`.
    pub growth_ok: bool,
}

impl SolutionDiagnostics {
    pub fn passes(&self) -> bool {
        self.width_below_n && self.n_below_cap && self.binet_ok && self.growth_ok
    }
}

fn diagnose(k: u32, n: i64, value: BigCount, shape: PalindromeShape) -> Result<SolutionDiagnostics> {
    let ctx = BinetContext::new(k, ANALYTIC_DIGITS, n)?;
    let err = ctx.error_bound(n, &value);
    let width = shape.len();
    let index_cap = 6 * width + 2;
    let un = u64::try_from(n).unwrap_or(0);
    Ok(SolutionDiagnostics {
        k,
        n,
        binet_error: format_sci(&err, 4),
        binet_ok: err < Float::with_val(64, 0.5),
        growth_ok: growth_bounds_with(&ctx, n, &value),
        value,
        shape,
        width,
        width_below_n: width < un,
        index_cap,
        n_below_cap: un < index_cap,
    })
}

/// Diagnostics for `P_n^(k)`; a domain error when it is not a palindromic concatenation.
pub fn verify_solution(k: u32, n: i64) -> Result<SolutionDiagnostics> {
    if n < 7 {
        return domain(format!("index n must be at least 7, got {n}"));
    }
    let value = kpell_term(k, n)?;
    let Some(shape) = decompose(&value) else {
        return domain(format!("P_{n}^({k}) = {value} is not a palindromic concatenation of two repdigits"));
    };
    diagnose(k, n, value, shape)
}

fn scan_order(k: u32, n_lo: i64, n_hi: i64) -> Result<Vec<SearchMatch>> {
    let mut found = Vec::new();
    for (n, value) in KPellIter::new(k)?.take_while(|(n, _)| *n <= n_hi) {
        if n < n_lo {
            continue;
        }
        if let Some(shape) = decompose_filtered(&value) {
            debug_assert_eq!(compose(&shape), value);
            found.push(SearchMatch { k, n, value, shape });
        }
    }
    Ok(found)
}

/// Every `(k, n)` in the box whose term decomposes, each checked by [`verify_solution`].
pub fn search_palindromic(k_lo: u32, k_hi: u32, n_lo: i64, n_hi: i64) -> Result<Vec<SearchMatch>> {
    if k_lo < 2 || k_lo > k_hi {
        return domain(format!("need 2 <= k_lo <= k_hi, got {k_lo}..{k_hi}"));
    }
    if n_lo < 7 || n_lo > n_hi {
        return domain(format!("need 7 <= n_lo <= n_hi, got {n_lo}..{n_hi}"));
    }
    let per_k: Vec<Result<Vec<SearchMatch>>> =
        (k_lo..=k_hi).into_par_iter().map(|k| scan_order(k, n_lo, n_hi)).collect();
    let mut out = Vec::new();
    for r in per_k {
        out.extend(r?);
    }
    for m in &out {
        let d = diagnose(m.k, m.n, m.value.clone(), m.shape)?;
        if compose(&m.shape) != m.value || !d.passes() {
            return Err(Error::Invariant(format!("match P_{}^({}) = {} fails its checks: {d:?}", m.n, m.k, m.value)));
        }
    }
    Ok(out)
}

/// The known solutions that fall inside the box.
pub fn expected_matches(k_lo: u32, k_hi: u32, n_lo: i64, n_hi: i64) -> Vec<(u32, i64, BigCount)> {
    KNOWN_SOLUTIONS
        .iter()
        .filter(|(k, n, _)| (k_lo..=k_hi).contains(k) && (n_lo..=n_hi).contains(n))
        .map(|&(k, n, v)| (k, n, BigCount::from(v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_box_finds_both() {
        let found = search_palindromic(2, 10, 7, 100).unwrap();
        let got: Vec<_> = found.iter().map(|m| (m.k, m.n, m.value.to_u32().unwrap())).collect();
        assert_eq!(got, vec![(3, 8, 545), (5, 7, 232)]);
        assert_eq!(found[0].shape, PalindromeShape::new(5, 4, 1, 1).unwrap());
        assert_eq!(found[1].shape, PalindromeShape::new(2, 3, 1, 1).unwrap());
    }

    #[test]
    fn pell_row_has_none() {
        assert!(search_palindromic(2, 2, 7, 20).unwrap().is_empty());
    }

    #[test]
    fn single_cell() {
        let found = search_palindromic(3, 3, 8, 8).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].value, 545);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(search_palindromic(1, 5, 7, 10).is_err());
        assert!(search_palindromic(5, 4, 7, 10).is_err());
        assert!(search_palindromic(2, 4, 6, 10).is_err());
        assert!(search_palindromic(2, 4, 9, 8).is_err());
    }

    #[test]
    fn diagnostics_for_solutions() {
        let d = verify_solution(3, 8).unwrap();
        assert_eq!((d.width, d.index_cap), (3, 20));
        assert!(d.passes());
        let d = verify_solution(5, 7).unwrap();
        assert_eq!((d.width, d.index_cap), (3, 20));
        assert!(d.passes());
        // P_7^(2) = 169
        assert!(matches!(verify_solution(2, 7), Err(Error::Domain(_))));
    }

    #[test]
    fn expected_subset() {
        assert_eq!(expected_matches(2, 1400, 7, 2288).len(), 2);
        assert_eq!(expected_matches(4, 1400, 7, 2288).len(), 1);
        assert!(expected_matches(2, 2, 7, 2288).is_empty());
    }

    #[test]
    fn match_json_roundtrip() {
        let m = &search_palindromic(3, 3, 8, 8).unwrap()[0];
        let s = serde_json::to_string(m).unwrap();
        assert!(s.contains("\"value\":\"545\""));
        assert_eq!(&serde_json::from_str::<SearchMatch>(&s).unwrap(), m);
    }
}
