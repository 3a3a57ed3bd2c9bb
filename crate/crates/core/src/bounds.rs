//! Matveev's lower bound for linear forms in logarithms and the polynomial
//! caps on `ell`, `m`, `n` and `k` that follow from it.
//!
//! Every quantity is an [`Enclosure`] evaluated at [`BOUND_DIGITS`] digits,
//! so comparisons against the stated envelopes are certified.

use rug::Float;
use serde::Serialize;

use crate::algebraic::{phi, Enclosure};
use crate::error::{domain, Error, Result};

pub const BOUND_DIGITS: u32 = 60;

fn num(s: &str) -> Enclosure {
    Enclosure::parse(s, BOUND_DIGITS).expect("literal constant")
}

fn int(v: i64) -> Enclosure {
    Enclosure::from_int(v, BOUND_DIGITS)
}

fn ln(x: &Enclosure) -> Enclosure {
    x.ln().expect("logarithm of a positive bound")
}

/// Inputs `(t, D, B, A_1..A_t)` of Matveev's theorem.
#[derive(Debug, Clone)]
pub struct MatveevInstance {
    t: u32,
    degree: u64,
    b: Enclosure,
    heights: Vec<Enclosure>,
}

impl MatveevInstance {
    pub fn new(degree: u64, b: Enclosure, heights: Vec<Enclosure>) -> Result<Self> {
        if heights.is_empty() {
            return domain("a Matveev instance needs at least one logarithm");
        }
        if degree == 0 {
            return domain("field degree must be at least 1");
        }
        if !int(1).certainly_le(&b) {
            return domain(format!("coefficient bound B must be at least 1, got {b}"));
        }
        if let Some(a) = heights.iter().find(|a| !a.is_positive()) {
            return domain(format!("height surrogates must be positive, got {a}"));
        }
        Ok(Self { t: heights.len() as u32, degree, b, heights })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn b(&self) -> &Enclosure {
        &self.b
    }

    pub fn heights(&self) -> &[Enclosure] {
        &self.heights
    }
}

/// `1.4 * 30^(t+3) * t^4.5 * D^2 (1 + log D)(1 + log B) A_1 ... A_t`,
/// so that `log |Gamma| > -value`.
pub fn matveev_log_lower(inst: &MatveevInstance) -> Enclosure {
    let t = i64::from(inst.t);
    let d = int(inst.degree as i64);
    let one = int(1);
    let mut v = &num("1.4") * &int(30).powi(inst.t as i32 + 3);
    v = &v * &int(t).pow(&num("4.5")).expect("positive base");
    v = &v * &d.sqr();
    v = &v * &(&one + &ln(&d));
    v = &v * &(&one + &ln(&inst.b));
    for a in &inst.heights {
        v = &v * a;
    }
    v
}

fn check_k(k: &Enclosure) -> Result<()> {
    if !int(2).certainly_le(k) {
        return domain(format!("order k must be at least 2, got {k}"));
    }
    Ok(())
}

fn check_n(n: &Enclosure) -> Result<()> {
    if !int(7).certainly_le(n) {
        return domain(format!("index n must be at least 7, got {n}"));
    }
    Ok(())
}

/// `c * k^kp * (log k)^lp * (log n)^np`.
fn monomial(c: &str, k: &Enclosure, kp: i32, lp: i32, n: Option<(&Enclosure, i32)>) -> Enclosure {
    let mut v = &num(c) * &k.powi(kp);
    v = &v * &ln(k).powi(lp);
    if let Some((n, np)) = n {
        v = &v * &ln(n).powi(np);
    }
    v
}

/// `4.3e12 k^5 (log k)^2 log n`.
pub fn ell_cap(k: &Enclosure, n: &Enclosure) -> Result<Enclosure> {
    check_k(k)?;
    check_n(n)?;
    Ok(monomial("4.3e12", k, 5, 2, Some((n, 1))))
}

/// `5.3e24 k^9 (log k)^3 (log n)^2`.
pub fn m_cap(k: &Enclosure, n: &Enclosure) -> Result<Enclosure> {
    check_k(k)?;
    check_n(n)?;
    Ok(monomial("5.3e24", k, 9, 3, Some((n, 2))))
}

/// `2e30 k^9 (log k)^5`.
pub fn n_cap(k: &Enclosure) -> Result<Enclosure> {
    check_k(k)?;
    Ok(monomial("2e30", k, 9, 5, None))
}

/// Smallest `M * 10^e` with `sig` significant digits certified to be at least `x`.
pub fn round_up_significant(x: &Enclosure, sig: u32) -> Result<rug::Integer> {
    if !x.is_positive() || sig == 0 {
        return domain("round_up_significant needs a positive value and sig >= 1");
    }
    let e = (x.upper_f64().log10().floor() as i64 - i64::from(sig) + 1).max(0) as u32;
    let unit = rug::Integer::from(rug::Integer::u_pow_u(10, e));
    let d = x.digits().max(BOUND_DIGITS);
    let mant = (x / &Enclosure::from_integer(&unit, d))
        .ceil_upper()
        .ok_or_else(|| Error::Certification("value is not finite".into()))?;
    let mut v = mant * &unit;
    while !x.certainly_le(&Enclosure::from_integer(&v, d)) {
        v += &unit;
    }
    Ok(v)
}

/// The three caps for one `(k, n)`.
#[derive(Debug, Clone)]
pub struct DerivedBounds {
    pub k: Enclosure,
    pub n_cap_input: Enclosure,
    pub ell_cap: Enclosure,
    pub m_cap: Enclosure,
    pub n_cap: Enclosure,
}

pub fn derived_bounds(k: &Enclosure, n: &Enclosure) -> Result<DerivedBounds> {
    Ok(DerivedBounds {
        k: k.clone(),
        n_cap_input: n.clone(),
        ell_cap: ell_cap(k, n)?,
        m_cap: m_cap(k, n)?,
        n_cap: n_cap(k)?,
    })
}

/// Smallest round number `K` (three significant digits) past the fixed point
/// of `k = c (log k)^p`, certified to satisfy `K >= c (log K)^p`.
///
/// Iterates `k <- c (log k)^p` from `k = c`; the map is increasing and
/// contracting there, so the iterates climb to the fixed point.
pub fn solve_log_fixed_point(c: &str, p: i32) -> Result<Enclosure> {
    let cc = num(c);
    if !int(3).certainly_lt(&cc) || p < 1 {
        return domain(format!("fixed point needs c > 3 and p >= 1, got c={c}, p={p}"));
    }
    let step = |k: &Enclosure| &cc * &ln(k).powi(p);
    let mut k = cc.clone();
    for _ in 0..1000 {
        let next = step(&k);
        let change = (&next - &k).abs_upper();
        let done = change < Float::with_val(64, next.lo() * 1e-6);
        k = next;
        if done {
            break;
        }
    }
    // Round the upper endpoint up to three significant digits.
    let mag = k.upper_f64().log10().floor() as i32 - 2;
    let scale =
        Enclosure::from_integer(&rug::Integer::from(rug::Integer::u_pow_u(10, mag.max(0) as u32)), BOUND_DIGITS);
    let mant = (&k / &scale).ceil_upper().ok_or_else(|| Error::Certification("fixed point diverged".into()))?;
    let mut cap = &Enclosure::from_integer(&mant, BOUND_DIGITS) * &scale;
    for _ in 0..10 {
        if step(&cap).certainly_le(&cap) {
            return Ok(cap);
        }
        cap = &cap * &num("1.01");
    }
    Err(Error::Certification(format!("fixed point of k = {c} (log k)^{p} not certified")))
}

/// Case II caps on `k` in terms of a bound on `n`.
#[derive(Debug, Clone)]
pub struct KappaCaps {
    /// `3.1e14 log n`, when `k/2` is the smaller exponent.
    pub branch_a: Enclosure,
    /// `2.6e27 (log n)^2`, when `ell log_phi 10` is the smaller exponent.
    pub branch_b: Enclosure,
    /// Solution of `k < 7.8e15 log k`.
    pub fixed_a: Enclosure,
    /// Solution of `k < 2e30 (log k)^2`.
    pub fixed_b: Enclosure,
}

pub fn case2_kappa_caps(n_bound: &Enclosure) -> Result<KappaCaps> {
    let e = int(1).exp();
    if !e.certainly_lt(n_bound) {
        return domain(format!("n bound must exceed e, got {n_bound}"));
    }
    let l = ln(n_bound);
    Ok(KappaCaps {
        branch_a: &num("3.1e14") * &l,
        branch_b: &num("2.6e27") * &l.sqr(),
        fixed_a: solve_log_fixed_point("7.8e15", 1)?,
        fixed_b: solve_log_fixed_point("2e30", 2)?,
    })
}

/// Whether `log n_cap(k) < 25 log k`, the step that turns the `n`-caps into
/// caps in `k` alone.
pub fn log_n_below_25_log_k(k: &Enclosure) -> Result<bool> {
    let lhs = ln(&n_cap(k)?);
    let rhs = &int(25) * &ln(k);
    Ok(lhs.certainly_lt(&rhs))
}

/// Linear form with coefficients `(1, n, -(2ell+m))` in
/// `log(9 f_k / d1)`, `log alpha`, `log 10`.
pub fn gamma1_instance(k: &Enclosure, n: &Enclosure) -> Result<MatveevInstance> {
    check_k(k)?;
    check_n(n)?;
    let a1 = &(&int(8) * &k.sqr()) * &ln(k);
    let a3 = k * &ln(&int(10));
    let degree = degree_of(k)?;
    MatveevInstance::new(degree, n.clone(), vec![a1, int(1), a3])
}

/// The constant multiplying `k^6 (log k)^2 log n` in `A_1` of the second form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gamma2Constant {
    /// `9.92e12`, the value chosen for `A_1`.
    Chosen,
    /// `9.22e12`, the value entering the evaluated product.
    Product,
}

impl Gamma2Constant {
    fn literal(self) -> &'static str {
        match self {
            Self::Chosen => "9.92e12",
            Self::Product => "9.22e12",
        }
    }
}

/// Linear form with coefficients `(1, n, -(ell+m))` in
/// `log(9 f_k / (d1 10^ell - (d1-d2)))`, `log alpha`, `log 10`.
pub fn gamma2_instance(k: &Enclosure, n: &Enclosure, a1: Gamma2Constant) -> Result<MatveevInstance> {
    check_k(k)?;
    check_n(n)?;
    let a1 = monomial(a1.literal(), k, 6, 2, Some((n, 1)));
    let a3 = k * &ln(&int(10));
    MatveevInstance::new(degree_of(k)?, n.clone(), vec![a1, int(1), a3])
}

/// Form in `log(d1 (phi+2)/9)`, `log 10`, `log phi` over `Q(sqrt 5)`.
pub fn gamma3_instance(n: &Enclosure) -> Result<MatveevInstance> {
    check_n(n)?;
    let heights = vec![int(18), &int(2) * &ln(&int(10)), ln(&phi(BOUND_DIGITS))];
    MatveevInstance::new(2, &int(2) * n, heights)
}

/// Form in `log((d1 10^ell - (d1-d2))(phi+2)/9)`, `log 10`, `log phi`.
pub fn gamma4_instance(n: &Enclosure) -> Result<MatveevInstance> {
    check_n(n)?;
    let heights = vec![&num("1.5e14") * &ln(n), &int(2) * &ln(&int(10)), ln(&phi(BOUND_DIGITS))];
    MatveevInstance::new(2, &int(2) * n, heights)
}

fn degree_of(k: &Enclosure) -> Result<u64> {
    k.floor_exact()
        .filter(|v| *k.lo() == *v && *k.hi() == *v)
        .and_then(|v| v.to_u64())
        .ok_or_else(|| Error::Domain(format!("field degree needs an integral k, got {k}")))
}

/// `9.8e12 k^5 (log k)^2 log n`.
pub fn gamma1_envelope(k: &Enclosure, n: &Enclosure) -> Enclosure {
    monomial("9.8e12", k, 5, 2, Some((n, 1)))
}

/// `1.2e25 k^9 (log k)^3 (log n)^2`.
pub fn gamma2_envelope(k: &Enclosure, n: &Enclosure) -> Enclosure {
    monomial("1.2e25", k, 9, 3, Some((n, 2)))
}

/// `7.3e13 log n`.
pub fn gamma3_envelope(n: &Enclosure) -> Enclosure {
    &num("7.3e13") * &ln(n)
}

/// `6.2e26 (log n)^2`.
pub fn gamma4_envelope(n: &Enclosure) -> Enclosure {
    &num("6.2e26") * &ln(n).sqr()
}

/// One comparison of a Matveev product against its stated envelope.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub form: String,
    pub k: String,
    pub n: String,
    pub product: String,
    pub envelope: String,
    pub within: bool,
}

fn envelope_row(form: &str, k: &Enclosure, n: &Enclosure, product: Enclosure, envelope: Enclosure) -> EnvelopeCheck {
    EnvelopeCheck {
        form: form.to_string(),
        k: k.to_sci(4),
        n: n.to_sci(4),
        within: product.certainly_le(&envelope),
        product: product.to_sci(6),
        envelope: envelope.to_sci(6),
    }
}

/// Evaluates the four forms on every `(k, n)` of the grid.
pub fn envelope_grid(ks: &[Enclosure], ns: &[Enclosure]) -> Result<Vec<EnvelopeCheck>> {
    let mut rows = Vec::new();
    for k in ks {
        for n in ns {
            let g1 = matveev_log_lower(&gamma1_instance(k, n)?);
            rows.push(envelope_row("gamma1", k, n, g1, gamma1_envelope(k, n)));
            for (label, c) in [("gamma2/9.22e12", Gamma2Constant::Product), ("gamma2/9.92e12", Gamma2Constant::Chosen)]
            {
                let g2 = matveev_log_lower(&gamma2_instance(k, n, c)?);
                rows.push(envelope_row(label, k, n, g2, gamma2_envelope(k, n)));
            }
        }
    }
    for n in ns {
        let one = int(1);
        rows.push(envelope_row("gamma3", &one, n, matveev_log_lower(&gamma3_instance(n)?), gamma3_envelope(n)));
        rows.push(envelope_row("gamma4", &one, n, matveev_log_lower(&gamma4_instance(n)?), gamma4_envelope(n)));
    }
    Ok(rows)
}
