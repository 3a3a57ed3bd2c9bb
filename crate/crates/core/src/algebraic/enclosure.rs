//! Outward-rounded interval arithmetic over MPFR floats.
//!
//! Every operation rounds the lower endpoint toward `-inf` and the upper
//! endpoint toward `+inf`, so a real number contained in the inputs is
//! contained in the output.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision in bits for `digits` decimal digits, with a small guard.
pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * LOG2_10).ceil() as u32 + 16
}

fn digits_for_bits(bits: u32) -> u32 {
    (f64::from(bits.saturating_sub(16)) / LOG2_10).floor() as u32
}

/// A certified real enclosure `[lo, hi]`.
#[derive(Clone, PartialEq)]
pub struct Enclosure {
    lo: Float,
    hi: Float,
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.to_string_radix(10, Some(20)), self.hi.to_string_radix(10, Some(20)))
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci(6))
    }
}

fn down<T>(prec: u32, val: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

impl Enclosure {
    /// Builds `[lo, hi]`; panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Self { lo, hi }
    }

    /// The degenerate enclosure `[x, x]`.
    pub fn point(x: &Float) -> Self {
        Self { lo: x.clone(), hi: x.clone() }
    }

    pub fn from_integer(v: &Integer, digits: u32) -> Self {
        let p = bits_for_digits(digits);
        Self { lo: down(p, v), hi: up(p, v) }
    }

    pub fn from_int(v: i64, digits: u32) -> Self {
        Self::from_integer(&Integer::from(v), digits)
    }

    pub fn from_rational(v: &Rational, digits: u32) -> Self {
        let p = bits_for_digits(digits);
        Self { lo: down(p, v), hi: up(p, v) }
    }

    pub fn from_ratio(num: i64, den: i64, digits: u32) -> Self {
        Self::from_rational(&Rational::from((num, den)), digits)
    }

    /// Parses a decimal literal such as `5.8e191`, `0.276` or `1400` exactly.
    pub fn parse(s: &str, digits: u32) -> Result<Self> {
        Ok(Self::from_rational(&parse_decimal(s)?, digits))
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    /// Precision of the endpoints in bits.
    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    /// Working precision in decimal digits.
    pub fn digits(&self) -> u32 {
        digits_for_bits(self.prec())
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 1;
        let mut m = Float::with_val(p, &self.lo + &self.hi);
        m /= 2;
        m
    }

    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn contains(&self, x: &Float) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &Enclosure) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Enclosure) -> bool {
        self.hi <= other.lo
    }

    /// Upper bound of `|x|` over the enclosure.
    pub fn abs_upper(&self) -> Float {
        let a = Float::with_val(self.lo.prec(), self.lo.abs_ref());
        let b = Float::with_val(self.hi.prec(), self.hi.abs_ref());
        if a > b {
            a
        } else {
            b
        }
    }

    /// Same enclosure rounded outward to `digits` decimal digits.
    pub fn with_digits(&self, digits: u32) -> Self {
        let p = bits_for_digits(digits);
        Self { lo: down(p, &self.lo), hi: up(p, &self.hi) }
    }

    pub fn sqr(&self) -> Self {
        let p = self.prec();
        if self.lo >= 0 {
            Self { lo: down(p, self.lo.square_ref()), hi: up(p, self.hi.square_ref()) }
        } else if self.hi <= 0 {
            Self { lo: down(p, self.hi.square_ref()), hi: up(p, self.lo.square_ref()) }
        } else {
            let m = self.abs_upper();
            Self { lo: Float::with_val(p, 0), hi: up(p, m.square_ref()) }
        }
    }

    pub fn recip(&self) -> Self {
        assert!(self.lo > 0 || self.hi < 0, "reciprocal of an enclosure containing zero");
        let p = self.prec();
        Self { lo: down(p, 1 / &self.hi), hi: up(p, 1 / &self.lo) }
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < 0 {
            return Err(Error::Domain("square root of a possibly negative enclosure".into()));
        }
        let p = self.prec();
        Ok(Self { lo: down(p, self.lo.sqrt_ref()), hi: up(p, self.hi.sqrt_ref()) })
    }

    pub fn ln(&self) -> Result<Self> {
        if self.lo <= 0 {
            return Err(Error::Domain("logarithm of a possibly nonpositive enclosure".into()));
        }
        let p = self.prec();
        Ok(Self { lo: down(p, self.lo.ln_ref()), hi: up(p, self.hi.ln_ref()) })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        Self { lo: down(p, self.lo.exp_ref()), hi: up(p, self.hi.exp_ref()) }
    }

    /// Integer power of a positive enclosure.
    pub fn powi(&self, n: i32) -> Self {
        assert!(self.lo > 0, "powi needs a positive enclosure");
        let p = self.prec();
        match n.cmp(&0) {
            Ordering::Equal => Self::point(&Float::with_val(p, 1)),
            Ordering::Greater => Self { lo: down(p, (&self.lo).pow(n)), hi: up(p, (&self.hi).pow(n)) },
            Ordering::Less => Self { lo: down(p, (&self.hi).pow(n)), hi: up(p, (&self.lo).pow(n)) },
        }
    }

    /// Real power `self^e` of a positive enclosure, for a nonnegative exponent enclosure.
    pub fn pow(&self, e: &Enclosure) -> Result<Self> {
        Ok((&self.ln()? * e).exp())
    }

    pub fn mul_integer(&self, v: &Integer) -> Self {
        let p = self.prec().max(v.significant_bits() + 16);
        let a = down(p, &self.lo * v);
        let b = up(p, &self.lo * v);
        let c = down(p, &self.hi * v);
        let d = up(p, &self.hi * v);
        if *v >= 0 {
            Self { lo: a, hi: d }
        } else {
            Self { lo: c, hi: b }
        }
    }

    pub fn add_integer(&self, v: &Integer) -> Self {
        let p = self.prec();
        Self { lo: down(p, &self.lo + v), hi: up(p, &self.hi + v) }
    }

    pub fn max(&self, other: &Enclosure) -> Self {
        let lo = if self.lo > other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi > other.hi { self.hi.clone() } else { other.hi.clone() };
        Self { lo, hi }
    }

    pub fn min(&self, other: &Enclosure) -> Self {
        let lo = if self.lo < other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi < other.hi { self.hi.clone() } else { other.hi.clone() };
        Self { lo, hi }
    }

    /// `floor(x)` when it is the same integer for every point in the enclosure.
    pub fn floor_exact(&self) -> Option<Integer> {
        let (a, _) = self.lo.to_integer_round(Round::Down)?;
        let (b, _) = self.hi.to_integer_round(Round::Down)?;
        (a == b).then_some(a)
    }

    /// Largest integer not exceeding the upper endpoint.
    pub fn floor_upper(&self) -> Option<Integer> {
        self.hi.to_integer_round(Round::Down).map(|(i, _)| i)
    }

    /// Smallest integer at or above the upper endpoint.
    pub fn ceil_upper(&self) -> Option<Integer> {
        self.hi.to_integer_round(Round::Up).map(|(i, _)| i)
    }

    pub fn upper_f64(&self) -> f64 {
        self.hi.to_f64_round(Round::Up)
    }

    pub fn lower_f64(&self) -> f64 {
        self.lo.to_f64_round(Round::Down)
    }

    /// Base-10 logarithm of the midpoint, for reporting magnitudes.
    pub fn log10_mid(&self) -> f64 {
        let m = self.mid();
        let l = Float::with_val(64, m.abs_ref()).log10();
        l.to_f64()
    }

    /// Midpoint in scientific notation with `sig` significant digits.
    pub fn to_sci(&self, sig: usize) -> String {
        format_sci(&self.mid(), sig)
    }
}

/// Formats a float as `d.ddde±x`.
pub fn format_sci(x: &Float, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let s = x.to_string_radix(10, Some(sig.max(1)));
    // MPFR output looks like "4.2200e65" or "-1.5"; normalize the exponent marker.
    s.replace("e+", "e")
}

/// Parses decimal literals like `5.8e191`, `-7`, `0.276`, `1e1055` exactly.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Domain(format!("not a decimal literal: {s:?}"));
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: Integer = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let magnitude = u32::try_from(scale.unsigned_abs()).map_err(|_| bad())?;
    let ten = Integer::from(Integer::u_pow_u(10, magnitude));
    Ok(if scale >= 0 { Rational::from(num * ten) } else { Rational::from((num, ten)) })
}

/// Parses a decimal literal that must denote an integer (`5.8e191` is fine, `1.5` is not).
pub fn parse_integer(s: &str) -> Result<Integer> {
    let r = parse_decimal(s)?;
    if *r.denom() != 1 {
        return Err(Error::Domain(format!("{s:?} is not an integer")));
    }
    Ok(r.numer().clone())
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        let p = self.prec().max(rhs.prec());
        Enclosure { lo: down(p, &self.lo + &rhs.lo), hi: up(p, &self.hi + &rhs.hi) }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        let p = self.prec().max(rhs.prec());
        Enclosure { lo: down(p, &self.lo - &rhs.hi), hi: up(p, &self.hi - &rhs.lo) }
    }
}

impl Neg for &Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }
}

impl Mul for &Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: &Enclosure) -> Enclosure {
        let p = self.prec().max(rhs.prec());
        if self.lo >= 0 && rhs.lo >= 0 {
            return Enclosure { lo: down(p, &self.lo * &rhs.lo), hi: up(p, &self.hi * &rhs.hi) };
        }
        let pairs = [(&self.lo, &rhs.lo), (&self.lo, &rhs.hi), (&self.hi, &rhs.lo), (&self.hi, &rhs.hi)];
        let lo = pairs.iter().map(|(a, b)| down(p, *a * *b)).reduce(|x, y| if y < x { y } else { x });
        let hi = pairs.iter().map(|(a, b)| up(p, *a * *b)).reduce(|x, y| if y > x { y } else { x });
        Enclosure { lo: lo.expect("four products"), hi: hi.expect("four products") }
    }
}

impl Div for &Enclosure {
    type Output = Enclosure;
    fn div(self, rhs: &Enclosure) -> Enclosure {
        assert!(rhs.lo > 0 || rhs.hi < 0, "division by an enclosure containing zero");
        let p = self.prec().max(rhs.prec());
        let pairs = [(&self.lo, &rhs.lo), (&self.lo, &rhs.hi), (&self.hi, &rhs.lo), (&self.hi, &rhs.hi)];
        let lo = pairs.iter().map(|(a, b)| down(p, *a / *b)).reduce(|x, y| if y < x { y } else { x });
        let hi = pairs.iter().map(|(a, b)| up(p, *a / *b)).reduce(|x, y| if y > x { y } else { x });
        Enclosure { lo: lo.expect("four quotients"), hi: hi.expect("four quotients") }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Enclosure {
            type Output = Enclosure;
            fn $m(self, rhs: Enclosure) -> Enclosure { (&self).$m(&rhs) }
        }
        impl $tr<&Enclosure> for Enclosure {
            type Output = Enclosure;
            fn $m(self, rhs: &Enclosure) -> Enclosure { (&self).$m(rhs) }
        }
        impl $tr<Enclosure> for &Enclosure {
            type Output = Enclosure;
            fn $m(self, rhs: Enclosure) -> Enclosure { self.$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        -&self
    }
}

/// Golden ratio `(1 + sqrt 5) / 2`.
pub fn phi(digits: u32) -> Enclosure {
    let five = Enclosure::from_int(5, digits);
    let root = five.sqrt().expect("5 > 0");
    let mut e = root.add_integer(&Integer::from(1));
    e.lo /= 2;
    e.hi /= 2;
    e
}

pub fn ln_int(v: i64, digits: u32) -> Enclosure {
    Enclosure::from_int(v, digits).ln().expect("positive integer")
}
