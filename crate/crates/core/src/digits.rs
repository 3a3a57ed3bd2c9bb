//! Palindromic concatenations of two distinct repdigits in base 10.
//!
//! A shape `(d1, d2, ell, m)` stands for the digit string
//! `d1^ell d2^m d1^ell`, whose value is
//! `(d1*10^(2ell+m) - (d1-d2)*10^(ell+m) + (d1-d2)*10^ell - d1) / 9`.

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::BigCount;

/// `(d1, d2, ell, m)` with `1 <= d1 <= 9`, `0 <= d2 <= 9`, `d1 != d2`,
/// `ell, m >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PalindromeShape {
    d1: u8,
    d2: u8,
    ell: u32,
    m: u32,
}

impl PalindromeShape {
    pub fn new(d1: u8, d2: u8, ell: u32, m: u32) -> Result<Self> {
        if !(1..=9).contains(&d1) {
            return domain(format!("outer digit d1 must be in 1..=9, got {d1}"));
        }
        if d2 > 9 {
            return domain(format!("middle digit d2 must be in 0..=9, got {d2}"));
        }
        if d1 == d2 {
            return domain(format!("digits must differ, got d1 = d2 = {d1}"));
        }
        if ell == 0 || m == 0 {
            return domain(format!("block lengths must be positive, got ell={ell}, m={m}"));
        }
        Ok(Self { d1, d2, ell, m })
    }

    pub fn d1(&self) -> u8 {
        self.d1
    }
    pub fn d2(&self) -> u8 {
        self.d2
    }
    pub fn ell(&self) -> u32 {
        self.ell
    }
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Total number of decimal digits, `2*ell + m`.
    pub fn len(&self) -> u64 {
        2 * u64::from(self.ell) + u64::from(self.m)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The digit string `d1^ell d2^m d1^ell`.
    pub fn digit_string(&self) -> String {
        let outer = char::from(b'0' + self.d1).to_string().repeat(self.ell as usize);
        let inner = char::from(b'0' + self.d2).to_string().repeat(self.m as usize);
        format!("{outer}{inner}{outer}")
    }
}

/// Exact value of a shape from the closed form.
pub fn compose(shape: &PalindromeShape) -> BigCount {
    let d1 = Integer::from(shape.d1);
    let diff = Integer::from(i32::from(shape.d1) - i32::from(shape.d2));
    let ell = shape.ell;
    let m = shape.m;
    let mut acc = &d1 * Integer::from(Integer::u_pow_u(10, 2 * ell + m));
    acc -= &diff * Integer::from(Integer::u_pow_u(10, ell + m));
    acc += &diff * Integer::from(Integer::u_pow_u(10, ell));
    acc -= &d1;
    debug_assert!(acc.is_divisible_u(9));
    acc.div_exact_u(9)
}

/// Number of decimal digits of a positive integer.
pub fn digit_count(value: &BigCount) -> Result<u64> {
    if *value <= 0 {
        return domain("digit count needs a positive integer");
    }
    Ok(value.to_string_radix(10).len() as u64)
}

/// Splits a decimal digit string into `d1^ell d2^m d1^ell`, if possible.
///
/// The leading run of the first digit must be exactly the outer block:
/// the middle digit differs from `d1`, so `ell` equals the run length and
/// the decomposition is unique when it exists.
pub fn decompose_digits(s: &[u8]) -> Option<PalindromeShape> {
    let len = s.len();
    if len < 3 || s[0] == b'0' {
        return None;
    }
    let first = s[0];
    let run = s.iter().take_while(|&&c| c == first).count();
    if 2 * run >= len {
        return None;
    }
    let (ell, m) = (run, len - 2 * run);
    let middle = s[ell];
    if !s[ell..ell + m].iter().all(|&c| c == middle) {
        return None;
    }
    if !s[ell + m..].iter().all(|&c| c == first) {
        return None;
    }
    PalindromeShape::new(first - b'0', middle - b'0', ell as u32, m as u32).ok()
}

/// The unique shape whose value is `value`, or `None`.
pub fn decompose(value: &BigCount) -> Option<PalindromeShape> {
    if *value < 100 {
        return None;
    }
    decompose_digits(value.to_string_radix(10).as_bytes())
}

/// Cheap necessary condition on the lowest nine decimal digits.
///
/// For a value with more than nine digits, the low nine digits of a shape
/// read right to left are a run of `d1`, then a run of `d2`, then
/// possibly `d1` again. Any other suffix rules the value out without a full
/// decimal conversion.
pub fn suffix_may_match(low9: u32) -> bool {
    let mut x = low9;
    let outer = x % 10;
    if outer == 0 {
        return false;
    }
    let mut runs = 1;
    let mut current = outer;
    for _ in 1..9 {
        x /= 10;
        let d = x % 10;
        if d == current {
            continue;
        }
        runs += 1;
        match runs {
            2 => {}
            3 if d == outer => {}
            _ => return false,
        }
        current = d;
    }
    true
}

/// `decompose`, with the suffix filter applied first for long values.
pub fn decompose_filtered(value: &BigCount) -> Option<PalindromeShape> {
    if value.significant_bits() > 34 && !suffix_may_match(value.mod_u(1_000_000_000)) {
        return None;
    }
    decompose(value)
}
