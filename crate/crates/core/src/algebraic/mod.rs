//! Certified numerics for the dominant root `alpha(k)` of
//! `Psi_k(x) = x^k - 2x^(k-1) - x^(k-2) - ... - x - 1` and the quantities
//! built from it.
//!
//! All results are [`Enclosure`]s; "holds" checks compare enclosure
//! endpoints, so a `true` answer is a proof at the working precision and a
//! `false` answer means "not certified".

pub mod enclosure;

use rug::float::Round;
use rug::{Float, Integer};

pub use enclosure::{bits_for_digits, format_sci, ln_int, parse_decimal, parse_integer, phi, Enclosure};

use crate::error::{domain, Error, Result};
use crate::sequences::KPellIter;

/// Default precision, in decimal digits, for analytic checks.
pub const ANALYTIC_DIGITS: u32 = 60;

/// `log10(phi)`, used to size precisions where `phi^-k` must be resolved.
const LOG10_PHI: f64 = 0.208_987_640_249_978_73;

/// Extra digits needed to separate `alpha(k)` from `phi^2`: the gap is
/// about `phi^(-2k)`.
fn separation_digits(k: u32) -> u32 {
    (2.0 * f64::from(k) * LOG10_PHI).ceil() as u32 + 10
}

/// Horner evaluation of `Psi_k` on an enclosure.
pub fn psi_eval(k: u32, x: &Enclosure) -> Enclosure {
    assert!(k >= 2, "Psi_k needs k >= 2");
    let p = x.prec();
    let one = Integer::from(1);
    let mut acc = x.add_integer(&Integer::from(-2));
    for _ in 1..k {
        acc = (&acc * x).add_integer(&-one.clone());
    }
    acc.with_digits(enclosure_digits(p))
}

fn enclosure_digits(bits: u32) -> u32 {
    ((f64::from(bits) - 16.0) / std::f64::consts::LOG2_10).floor() as u32
}

/// `(x - 1) Psi_k(x) = x^(k-1) (x^2 - 3x + 1) + 1` and its derivative,
/// evaluated in plain floating point. Used only to steer the root search;
/// certification goes through [`psi_eval`].
fn steer(k: u32, x: &Float) -> (Float, Float) {
    let p = x.prec();
    let x2 = Float::with_val(p, x.square_ref());
    let quad = Float::with_val(p, &x2 - Float::with_val(p, x * 3u32)) + 1u32;
    let pow_km2 = Float::with_val(p, rug::ops::Pow::pow(x, k as i32 - 2));
    let pow_km1 = Float::with_val(p, &pow_km2 * x);
    let g = Float::with_val(p, &pow_km1 * &quad) + 1u32;
    // g'(x) = x^(k-2) ((k+1) x^2 - 3k x + (k-1))
    let lin = Float::with_val(p, &x2 * (k + 1)) - Float::with_val(p, x * (3 * k)) + (k - 1);
    let dg = Float::with_val(p, &pow_km2 * &lin);
    (g, dg)
}

/// The bracket `(phi^2 (1 - phi^-k), phi^2)` known to contain `alpha(k)`.
pub fn root_bracket(k: u32, digits: u32) -> (Enclosure, Enclosure) {
    let ph = phi(digits);
    let ph2 = ph.sqr();
    let one = Enclosure::from_int(1, digits);
    let lower = &ph2 * &(&one - &ph.powi(-(k as i32)));
    (lower, ph2)
}

/// `alpha(k)` with a sign-change certificate.
#[derive(Debug, Clone)]
pub struct DominantRoot {
    k: u32,
    alpha: Enclosure,
}

impl DominantRoot {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> &Enclosure {
        &self.alpha
    }

    /// Re-checks `Psi_k(lo) < 0 < Psi_k(hi)` and the bracket containment.
    pub fn verify(&self) -> bool {
        let p = self.alpha.prec() + 2 * (32 - self.k.leading_zeros()) + 64;
        let lift = |x: &Float| Enclosure::point(&Float::with_val(p, x));
        let at_lo = psi_eval(self.k, &lift(self.alpha.lo()));
        let at_hi = psi_eval(self.k, &lift(self.alpha.hi()));
        let (lower, upper) = root_bracket(self.k, enclosure_digits(p));
        at_lo.is_negative() && at_hi.is_positive() && lower.hi() < self.alpha.lo() && self.alpha.hi() < upper.lo()
    }
}

/// Certified enclosure of `alpha(k)`.
///
/// Bisection on the bracket until ten digits are settled, then Newton
/// steps kept inside the bracket, then a sign-change check of `Psi_k` at
/// both returned endpoints with extra precision. The working precision is
/// raised by about `2k log10(phi)` digits so the enclosure also separates
/// from `phi^2`.
pub fn dominant_root(k: u32, digits: u32) -> Result<DominantRoot> {
    if k < 2 {
        return domain(format!("order k must be at least 2, got {k}"));
    }
    if digits < 20 {
        return domain(format!("root precision must be at least 20 digits, got {digits}"));
    }
    let work_digits = digits + separation_digits(k);
    let p = bits_for_digits(work_digits);
    let (lower, upper) = root_bracket(k, work_digits + 10);
    let mut a = Float::with_val_round(p, lower.hi(), Round::Up).0;
    let mut b = Float::with_val_round(p, upper.lo(), Round::Down).0;
    let (ga, _) = steer(k, &a);
    let (gb, _) = steer(k, &b);
    if !(ga < 0 && gb > 0) {
        return Err(Error::Certification(format!("no sign change on the bracket for k={k}")));
    }

    let settled = Float::with_val(64, 1e-10);
    while Float::with_val(p, &b - &a) > Float::with_val(p, &b * &settled) {
        let m = Float::with_val(p, &a + &b) / 2u32;
        let (gm, _) = steer(k, &m);
        if gm < 0 {
            a = m;
        } else {
            b = m;
        }
    }

    let ulp_scale = Float::with_val(p, Float::i_exp(1, -(p as i32 - 4)));
    let mut x = Float::with_val(p, &a + &b) / 2u32;
    for _ in 0..200 {
        let (g, dg) = steer(k, &x);
        if g.is_zero() {
            break;
        }
        if g < 0 {
            a = x.clone();
        } else {
            b = x.clone();
        }
        let step = Float::with_val(p, &g / &dg);
        if Float::with_val(p, step.abs_ref()) <= Float::with_val(p, &x * &ulp_scale) {
            break;
        }
        let next = Float::with_val(p, &x - &step);
        x = if next > a && next < b { next } else { Float::with_val(p, &a + &b) / 2u32 };
    }

    // Certificate: a few hundred ulps either side of the Newton iterate.
    let mut eps = Float::with_val(p, &x * Float::with_val(p, Float::i_exp(1, -(p as i32 - 10))));
    for _ in 0..12 {
        let lo = Float::with_val_round(p, &x - &eps, Round::Down).0;
        let hi = Float::with_val_round(p, &x + &eps, Round::Up).0;
        let root = DominantRoot { k, alpha: Enclosure::new(lo, hi) };
        if root.verify() {
            let target = Float::with_val(64, rug::ops::Pow::pow(Float::with_val(64, 10), 1 - digits as i32));
            if root.alpha.width() > target {
                return Err(Error::Certification(format!("root enclosure for k={k} too wide")));
            }
            return Ok(root);
        }
        eps *= 16u32;
    }
    Err(Error::Certification(format!("could not certify the sign change of Psi_{k}")))
}

/// `f_k(x) = (x - 1) / ((k+1) x^2 - 3k x + k - 1)` on an enclosure.
pub fn f_k(k: u32, x: &Enclosure) -> Enclosure {
    let kk = Integer::from(k);
    let num = x.add_integer(&Integer::from(-1));
    let x2 = x.sqr();
    let quad = (&x2 - &x.mul_integer(&Integer::from(3))).add_integer(&Integer::from(1));
    let den = (&quad.mul_integer(&kk) + &x2).add_integer(&Integer::from(-1));
    &num / &den
}

/// Certified `f_k(alpha)`.
#[derive(Debug, Clone)]
pub struct WeightValue {
    k: u32,
    value: Enclosure,
}

impl WeightValue {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn value(&self) -> &Enclosure {
        &self.value
    }
}

fn weight_window(digits: u32) -> (Enclosure, Enclosure) {
    (Enclosure::from_ratio(276, 1000, digits), Enclosure::from_ratio(1, 2, digits))
}

/// `f_k(alpha)` from an already certified root, checked against `(0.276, 0.5)`.
pub fn weight_from_root(root: &DominantRoot) -> Result<WeightValue> {
    let value = f_k(root.k, root.alpha());
    let (low, high) = weight_window(value.digits());
    if !(low.certainly_lt(&value) && value.certainly_lt(&high)) {
        return Err(Error::Invariant(format!("f_k(alpha) = {value:?} escapes (0.276, 0.5) for k={}", root.k)));
    }
    Ok(WeightValue { k: root.k, value })
}

pub fn f_k_at_alpha(k: u32, digits: u32) -> Result<WeightValue> {
    weight_from_root(&dominant_root(k, digits.max(20))?)
}

/// Root and weight for one order, sized for Binet-type comparisons up to `n_max`.
#[derive(Debug, Clone)]
pub struct BinetContext {
    k: u32,
    alpha: Enclosure,
    weight: Enclosure,
}

impl BinetContext {
    pub fn new(k: u32, digits: u32, n_max: i64) -> Result<Self> {
        if k < 2 {
            return domain(format!("order k must be at least 2, got {k}"));
        }
        // alpha^n has about 0.42 n digits before the point.
        let extra = (n_max.max(0) as f64 * 0.42).ceil() as u32 + 10;
        let root = dominant_root(k, digits.max(20) + extra)?;
        let weight = weight_from_root(&root)?;
        Ok(Self { k, alpha: root.alpha, weight: weight.value })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> &Enclosure {
        &self.alpha
    }

    pub fn weight(&self) -> &Enclosure {
        &self.weight
    }

    /// Enclosure of `f_k(alpha) alpha^n`.
    pub fn dominant_term(&self, n: i64) -> Enclosure {
        let e = i32::try_from(n).expect("index fits in i32");
        &self.weight * &self.alpha.powi(e)
    }

    /// Upper bound on `|P_n - f_k(alpha) alpha^n|`.
    pub fn error_bound(&self, n: i64, term: &Integer) -> Float {
        let diff = self.dominant_term(n).add_integer(&-term.clone());
        diff.abs_upper()
    }
}

/// Certified upper bound on `|P_n^(k) - f_k(alpha) alpha^n|`.
pub fn binet_error(k: u32, n: i64, digits: u32) -> Result<Float> {
    let term = crate::sequences::kpell_term(k, n)?;
    let ctx = BinetContext::new(k, digits, n)?;
    Ok(ctx.error_bound(n, &term))
}

/// Checks `|P_n - f_k(alpha) alpha^n| < 1/2` for `n` in `n_lo..=n_hi`,
/// returning the indices where the bound is not certified.
pub fn binet_violations(k: u32, n_lo: i64, n_hi: i64, digits: u32) -> Result<Vec<i64>> {
    if n_lo < 2 - i64::from(k) {
        return domain(format!("index {n_lo} is below 2-k"));
    }
    let ctx = BinetContext::new(k, digits, n_hi)?;
    let half = Float::with_val(64, 0.5);
    let mut bad = Vec::new();
    for n in n_lo..=n_hi.min(0) {
        if ctx.error_bound(n, &Integer::new()) >= half {
            bad.push(n);
        }
    }
    for (n, term) in KPellIter::new(k)?.take_while(|(n, _)| *n <= n_hi) {
        if n >= n_lo && ctx.error_bound(n, &term) >= half {
            bad.push(n);
        }
    }
    Ok(bad)
}

/// Golden-ratio approximation of `f_k(alpha) alpha^n`, valid for `k >= 30`
/// and `1 < n < 2^(k/2)`.
#[derive(Debug, Clone)]
pub struct PhiApproxContext {
    k: u32,
    binet: BinetContext,
    phi: Enclosure,
}

impl PhiApproxContext {
    pub fn new(k: u32, digits: u32, n_max: i64) -> Result<Self> {
        if k < 30 {
            return domain(format!("golden-ratio approximation needs k >= 30, got {k}"));
        }
        let work = digits + separation_digits(k);
        let binet = BinetContext::new(k, work, n_max)?;
        let phi = phi(binet.alpha.digits());
        Ok(Self { k, binet, phi })
    }

    /// Whether `|f alpha^n - phi^(2n)/(phi+2)| < (phi^(2n)/(phi+2)) * 4 / phi^(k/2)` is certified.
    pub fn check(&self, n: i64) -> Result<bool> {
        check_phi_range(self.k, n)?;
        let lhs_term = self.binet.dominant_term(n);
        let e = i32::try_from(2 * n).expect("index fits in i32");
        let approx = &self.phi.powi(e) / &self.phi.add_integer(&Integer::from(2));
        let diff = (&lhs_term - &approx).abs_upper();
        let half_k = Enclosure::from_ratio(i64::from(self.k), 2, approx.digits());
        let denom = self.phi.pow(&half_k)?;
        let rhs = (&approx.mul_integer(&Integer::from(4))) / &denom;
        Ok(diff < *rhs.lo())
    }
}

fn check_phi_range(k: u32, n: i64) -> Result<()> {
    if n <= 1 {
        return domain(format!("golden-ratio approximation needs n > 1, got {n}"));
    }
    // n < 2^(k/2)  <=>  n^2 < 2^k
    let lhs = Integer::from(n).square();
    let rhs = Integer::from(Integer::u_pow_u(2, k));
    if lhs >= rhs {
        return domain(format!("golden-ratio approximation needs n < 2^(k/2), got n={n}, k={k}"));
    }
    Ok(())
}

pub fn phi_approx_check(k: u32, n: i64, digits: u32) -> Result<bool> {
    if k < 30 {
        return domain(format!("golden-ratio approximation needs k >= 30, got {k}"));
    }
    check_phi_range(k, n)?;
    PhiApproxContext::new(k, digits, n)?.check(n)
}

/// Certified `alpha^(n-2) <= P_n <= alpha^(n-1)`.
pub fn growth_bounds_check(k: u32, n: i64) -> Result<bool> {
    if n < 1 {
        return domain(format!("growth bounds need n >= 1, got {n}"));
    }
    let term = crate::sequences::kpell_term(k, n)?;
    let ctx = BinetContext::new(k, ANALYTIC_DIGITS, n)?;
    Ok(growth_bounds_with(&ctx, n, &term))
}

pub fn growth_bounds_with(ctx: &BinetContext, n: i64, term: &Integer) -> bool {
    let e = i32::try_from(n).expect("index fits in i32");
    let below = ctx.alpha.powi(e - 2);
    let above = ctx.alpha.powi(e - 1);
    *below.hi() <= *term && *above.lo() >= *term
}

/// `4k log(phi) + k log(k+1)`, the height bound for `f_k(alpha)`.
pub fn height_fk_bound(k: u32) -> Result<Enclosure> {
    if k < 2 {
        return domain(format!("order k must be at least 2, got {k}"));
    }
    let d = ANALYTIC_DIGITS;
    let kk = Integer::from(k);
    let a = phi(d).ln()?.mul_integer(&(kk.clone() * 4u32));
    let b = Enclosure::from_integer(&Integer::from(&kk + 1u32), d).ln()?.mul_integer(&kk);
    Ok(&a + &b)
}

/// `log max(|p|, q)` for a reduced fraction `p/q`, `q >= 1`.
pub fn log_height_rational(p: &Integer, q: &Integer) -> Result<Enclosure> {
    if *q <= 0 {
        return domain("denominator must be positive");
    }
    if Integer::from(p.gcd_ref(q)) != 1 {
        return domain(format!("{p}/{q} is not in lowest terms"));
    }
    let m = if Integer::from(p.abs_ref()) > *q { Integer::from(p.abs_ref()) } else { q.clone() };
    Enclosure::from_integer(&m, ANALYTIC_DIGITS).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: f64) -> Float {
        Float::with_val(64, x)
    }

    fn sqrt2(digits: u32) -> Enclosure {
        Enclosure::from_int(2, digits).sqrt().unwrap()
    }

    #[test]
    fn psi_examples() {
        // 1 + sqrt 2 is the root of x^2 - 2x - 1
        let x = sqrt2(50).add_integer(&Integer::from(1));
        let v = psi_eval(2, &x);
        assert!(v.abs_upper() < f(1e-45));
        for k in [2, 5, 40] {
            let zero = Enclosure::from_int(0, 30);
            let v = psi_eval(k, &zero);
            assert_eq!(*v.lo(), -1);
            assert_eq!(*v.hi(), -1);
        }
        let v = psi_eval(3, &Enclosure::from_int(3, 30));
        assert_eq!(*v.lo(), 5);
        assert_eq!(*v.hi(), 5);
    }

    #[test]
    fn root_k2_is_one_plus_sqrt2() {
        let r = dominant_root(2, 30).unwrap();
        let exact = sqrt2(80).add_integer(&Integer::from(1));
        assert!(r.alpha().contains(exact.lo()) && r.alpha().contains(exact.hi()));
        assert!(r.alpha().width() < f(1e-29));
    }

    /// Bisection on Psi_3 in f64, an independent oracle for alpha(3).
    #[test]
    fn root_k3_matches_bisection_oracle() {
        let psi3 = |x: f64| x * x * x - 2.0 * x * x - x - 1.0;
        let (mut a, mut b) = (2.0f64, 3.0f64);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if psi3(m) < 0.0 {
                a = m
            } else {
                b = m
            }
        }
        assert!(a > 2.5468 && b < 2.5469);
        let r = dominant_root(3, 30).unwrap();
        assert!(*r.alpha().lo() > f(2.5468) && *r.alpha().hi() < f(2.5469));
        assert!((r.alpha().mid().to_f64() - a).abs() < 1e-12);
    }

    #[test]
    fn root_k2000_inside_bracket() {
        let r = dominant_root(2000, 30).unwrap();
        assert!(r.verify());
        let (lower, upper) = root_bracket(2000, r.alpha().digits() + 20);
        assert!(lower.certainly_lt(r.alpha()) && r.alpha().certainly_lt(&upper));
    }

    #[test]
    fn root_rejects_bad_input() {
        assert!(dominant_root(1, 30).is_err());
        assert!(dominant_root(5, 10).is_err());
    }

    #[test]
    fn doubling_precision_nests() {
        for k in [2, 3, 7, 31, 150, 777] {
            let a = dominant_root(k, 40).unwrap();
            let b = dominant_root(k, 80).unwrap();
            assert!(a.alpha().contains_enclosure(b.alpha()), "k={k}");
        }
    }

    #[test]
    fn weight_examples() {
        let w = f_k_at_alpha(2, 30).unwrap();
        // f_2(1 + sqrt 2) = sqrt(2)/4
        let expected = &sqrt2(60) / &Enclosure::from_int(4, 60);
        assert!(!w.value().certainly_lt(&expected) && !expected.certainly_lt(w.value()));
        assert!((w.value().mid().to_f64() - 0.353_553_390_593_273_8).abs() < 1e-15);
        for k in [30, 1400] {
            let w = f_k_at_alpha(k, 30).unwrap();
            assert!(*w.value().lo() > f(0.276) && *w.value().hi() < f(0.5));
        }
    }

    /// Exact arithmetic in Q(sqrt 2): (sqrt2/4)(1+sqrt2)^10 = a + b sqrt 2 with rationals.
    #[test]
    fn binet_k2_n10_against_exact_algebra() {
        // (1+sqrt2)^n = u_n + v_n sqrt2
        let (mut u, mut v) = (Integer::from(1), Integer::from(0));
        for _ in 0..10 {
            let nu = &u + &v * Integer::from(2);
            let nv = Integer::from(&u + &v);
            u = nu;
            v = nv;
        }
        // (sqrt2/4)(u + v sqrt2) = v/2 + (u/4) sqrt2
        let exact = Enclosure::from_ratio(v.to_i64().unwrap(), 2, 60)
            + &(&sqrt2(60) * &Enclosure::from_ratio(u.to_i64().unwrap(), 4, 60));
        let diff = exact.add_integer(&Integer::from(-2378)).abs_upper();
        assert!(diff < 0.5);
        let bound = binet_error(2, 10, 30).unwrap();
        assert!(bound < 0.5);
        assert!((bound.to_f64() - diff.to_f64()).abs() < 1e-20);
    }

    #[test]
    fn binet_examples() {
        assert!(binet_error(5, 7, 30).unwrap() < 0.5);
        for k in [2, 3, 9, 50] {
            assert!(binet_error(k, 1, 30).unwrap() < 0.5);
        }
        assert!(binet_violations(10, -8, 120, 30).unwrap().is_empty());
    }

    #[test]
    fn phi_approx_examples() {
        assert!(phi_approx_check(30, 20, 50).unwrap());
        assert!(phi_approx_check(100, 50, 50).unwrap());
        assert!(phi_approx_check(30, (1 << 15) + 1, 50).is_err());
        assert!(phi_approx_check(30, 1 << 15, 50).is_err());
        assert!(phi_approx_check(29, 10, 50).is_err());
        assert!(phi_approx_check(31, 1, 50).is_err());
    }

    #[test]
    fn growth_examples() {
        assert!(growth_bounds_check(2, 5).unwrap());
        assert!(growth_bounds_check(3, 8).unwrap());
        for k in [2, 4, 17] {
            assert!(growth_bounds_check(k, 1).unwrap());
        }
        assert!(growth_bounds_check(3, 0).is_err());
    }

    #[test]
    fn height_bounds() {
        let b = height_fk_bound(2).unwrap();
        assert!((b.mid().to_f64() - 6.046_919_177_813).abs() < 1e-9, "{b:?}");
        // h(sqrt2/4) = (1/2) log 8 from the minimal polynomial 8x^2 - 1
        let actual = Enclosure::from_int(8, 60).ln().unwrap().mul_integer(&Integer::from(1));
        let half = &actual / &Enclosure::from_int(2, 60);
        assert!(half.certainly_lt(&b));
        let b1400 = height_fk_bound(1400).unwrap();
        let direct = 4.0 * 1400.0 * 0.481_211_825_059_603_4 + 1400.0 * 1401f64.ln();
        assert!((b1400.mid().to_f64() - direct).abs() < 1e-9);
    }

    #[test]
    fn rational_heights() {
        let h = log_height_rational(&Integer::from(9), &Integer::from(1)).unwrap();
        assert!((h.mid().to_f64() - 9f64.ln()).abs() < 1e-15);
        let h = log_height_rational(&Integer::from(1), &Integer::from(1)).unwrap();
        assert!(h.contains(&Float::new(64)));
        let h = log_height_rational(&Integer::from(-7), &Integer::from(3)).unwrap();
        assert!((h.mid().to_f64() - 7f64.ln()).abs() < 1e-15);
        assert!(log_height_rational(&Integer::from(2), &Integer::from(4)).is_err());
        assert!(log_height_rational(&Integer::from(2), &Integer::from(0)).is_err());
    }
}
