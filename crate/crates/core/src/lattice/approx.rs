//! Approximation lattices for `|eta_0 + x_1 eta_1 + ... + x_k eta_k| <= c3 exp(-c4 H)`
//! and the retry loop that reduces them.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use tracing::debug;

use super::{
    coefficient_sums, lll_reduce, lower_bound_c1_delta, reduced_height_cap, LatticeBasis, LatticeDistance,
    ReductionOutcome,
};
use crate::algebraic::Enclosure;
use crate::error::{domain, Error, Result};

/// Real inputs of an approximation lattice.
#[derive(Debug, Clone)]
pub struct ApproxLatticeSpec {
    pub etas: Vec<Enclosure>,
    /// `None` for a homogeneous form (zero target).
    pub eta0: Option<Enclosure>,
    pub c: Integer,
}

fn scaled_floor(eta: &Enclosure, c: &Integer, what: &str) -> Result<Integer> {
    eta.mul_integer(c)
        .floor_exact()
        .ok_or_else(|| Error::PrecisionEscalation(format!("floor(C * {what}) is ambiguous at {} digits", eta.digits())))
}

/// The matrix with unit diagonal and bottom row `floor(C eta_i)`, and the
/// target `(0, ..., 0, -floor(C eta_0))`.
pub fn build_approx_lattice(spec: &ApproxLatticeSpec) -> Result<(LatticeBasis, Vec<Integer>)> {
    let k = spec.etas.len();
    if k == 0 {
        return domain("an approximation lattice needs at least one eta");
    }
    if spec.c < 1 {
        return domain(format!("scaling constant C must be at least 1, got {}", spec.c));
    }
    let mut columns = Vec::with_capacity(k);
    for (j, eta) in spec.etas.iter().enumerate() {
        let mut col = vec![Integer::new(); k];
        if j + 1 < k {
            col[j] = Integer::from(1);
        }
        col[k - 1] = scaled_floor(eta, &spec.c, &format!("eta_{}", j + 1))?;
        columns.push(col);
    }
    let mut target = vec![Integer::new(); k];
    if let Some(eta0) = &spec.eta0 {
        target[k - 1] = -scaled_floor(eta0, &spec.c, "eta_0")?;
    }
    Ok((LatticeBasis::from_columns(columns)?, target))
}

/// Escalation schedule for one reduction cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// How many times `C` may be multiplied by ten.
    pub max_retries: u32,
    /// Digits beyond `log10 C` used for the etas.
    pub guard_digits: u32,
    /// Digits added when a floor is ambiguous.
    pub escalation_digits: u32,
    pub max_escalations: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 5, guard_digits: 30, escalation_digits: 60, max_escalations: 3 }
    }
}

impl RetryPolicy {
    /// Digits needed to resolve `floor(C eta)` for `C` up to `10^max_retries` times `c`.
    pub fn max_digits(&self, c: &Integer) -> u32 {
        decimal_len(c) + self.max_retries + self.guard_digits
    }
}

fn decimal_len(c: &Integer) -> u32 {
    (f64::from(c.significant_bits()) * std::f64::consts::LOG10_2).ceil() as u32
}

/// A linear form with bounded integer coefficients.
#[derive(Debug, Clone)]
pub struct LinearFormProblem {
    pub label: String,
    pub c: Integer,
    pub c3: Enclosure,
    pub c4: Enclosure,
    /// Bounds `X_1..X_k` on the coefficients.
    pub x: Vec<Integer>,
}

/// One successfully reduced cell.
#[derive(Debug, Clone)]
pub struct CellReduction {
    pub label: String,
    /// The `C` that produced the cap.
    pub c: Integer,
    pub retries: u32,
    pub digits: u32,
    pub basis: LatticeBasis,
    pub distance: LatticeDistance,
    pub outcome: ReductionOutcome,
    pub cap: Integer,
    /// `delta^2` from the first attempt, at the caller's `C`.
    pub initial_delta_sq: Option<Rational>,
}

/// Builds, reduces and bounds the lattice for `problem`, multiplying `C`
/// by ten whenever the lemmas do not apply.
///
/// `etas(digits)` returns `(eta_1..eta_k, eta_0)` at `digits` decimal
/// digits; it is called again with more digits when a floor is ambiguous.
pub fn reduce_linear_form<F>(problem: &LinearFormProblem, policy: &RetryPolicy, mut etas: F) -> Result<CellReduction>
where
    F: FnMut(u32) -> Result<(Vec<Enclosure>, Option<Enclosure>)>,
{
    let (s, t) = coefficient_sums(&problem.x);
    let mut c = problem.c.clone();
    let mut last_reason = String::new();
    let mut initial_delta_sq = None;
    for attempt in 0..=policy.max_retries {
        let mut digits = decimal_len(&c) + policy.guard_digits;
        let mut built = None;
        for _ in 0..=policy.max_escalations {
            let (values, eta0) = etas(digits)?;
            if values.len() != problem.x.len() {
                return domain(format!(
                    "{}: {} etas but {} coefficient bounds",
                    problem.label,
                    values.len(),
                    problem.x.len()
                ));
            }
            match build_approx_lattice(&ApproxLatticeSpec { etas: values, eta0, c: c.clone() }) {
                Ok(v) => {
                    built = Some(v);
                    break;
                }
                Err(Error::PrecisionEscalation(msg)) => {
                    debug!(cell = %problem.label, %msg, "escalating precision");
                    digits += policy.escalation_digits;
                }
                Err(e) => return Err(e),
            }
        }
        let Some((lattice, target)) = built else {
            return Err(Error::PrecisionEscalation(format!(
                "{}: floors still ambiguous at {digits} digits",
                problem.label
            )));
        };
        let reduced = lll_reduce(&lattice)?;
        let distance = match lower_bound_c1_delta(&reduced, &target) {
            Ok(d) => d,
            Err(Error::IncreaseC(msg)) => {
                last_reason = msg;
                c *= 10u32;
                continue;
            }
            Err(e) => return Err(e),
        };
        if attempt == 0 {
            initial_delta_sq = Some(distance.delta_sq.clone());
        }
        let mut outcome = reduced_height_cap(&distance.c1_sq, &distance.delta_sq, &s, &t, &c, &problem.c3, &problem.c4);
        let last = lattice.column(lattice.dim() - 1).last().expect("nonempty").clone();
        let y_last = target.last().expect("nonempty").clone();
        outcome.degenerate = Some(Rational::from((y_last, last)));
        match outcome.cap() {
            Ok(cap) => {
                return Ok(CellReduction {
                    label: problem.label.clone(),
                    c,
                    retries: attempt,
                    digits,
                    basis: reduced,
                    distance,
                    outcome,
                    cap,
                    initial_delta_sq,
                })
            }
            Err(Error::IncreaseC(msg)) => {
                debug!(cell = %problem.label, %msg, "increasing C");
                last_reason = msg;
                c *= 10u32;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetriesExhausted { cell: format!("{} ({last_reason})", problem.label), retries: policy.max_retries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::{dominant_root, parse_integer};
    use crate::lattice::is_reduced;

    #[test]
    fn bottom_row_from_floors() {
        let spec =
            ApproxLatticeSpec { etas: vec![Enclosure::parse("1.5", 30).unwrap()], eta0: None, c: Integer::from(10) };
        let (b, y) = build_approx_lattice(&spec).unwrap();
        assert_eq!(b.column(0), &[Integer::from(15)]);
        assert_eq!(y, vec![Integer::new()]);
    }

    #[test]
    fn three_by_three_shape_and_target() {
        let etas = vec![
            Enclosure::parse("0.25", 30).unwrap(),
            Enclosure::parse("-1.75", 30).unwrap(),
            Enclosure::parse("3.5", 30).unwrap(),
        ];
        let spec =
            ApproxLatticeSpec { etas, eta0: Some(Enclosure::parse("0.314", 30).unwrap()), c: Integer::from(100) };
        let (b, y) = build_approx_lattice(&spec).unwrap();
        assert_eq!(b.column(0), &[Integer::from(1), Integer::new(), Integer::from(25)]);
        assert_eq!(b.column(1), &[Integer::new(), Integer::from(1), Integer::from(-175)]);
        assert_eq!(b.column(2), &[Integer::new(), Integer::new(), Integer::from(350)]);
        assert_eq!(y, vec![Integer::new(), Integer::new(), Integer::from(-31)]);
    }

    #[test]
    fn ambiguous_floor_requests_more_precision() {
        let wide = Enclosure::new(rug::Float::with_val(64, 1.49), rug::Float::with_val(64, 1.51));
        let spec = ApproxLatticeSpec { etas: vec![wide], eta0: None, c: Integer::from(10) };
        assert!(matches!(build_approx_lattice(&spec), Err(Error::PrecisionEscalation(_))));
    }

    #[test]
    fn floors_stable_under_doubled_precision() {
        let c = parse_integer("5.8e191").unwrap();
        let floor_at = |digits: u32| {
            let alpha = dominant_root(2, digits).unwrap();
            alpha.alpha().ln().unwrap().mul_integer(&c).floor_exact().unwrap()
        };
        assert_eq!(floor_at(230), floor_at(460));
    }

    #[test]
    fn small_form_is_capped() {
        let log = |v: i64, d: u32| Enclosure::from_int(v, d).ln().unwrap();
        let problem = LinearFormProblem {
            label: "log2-log3-log5".into(),
            c: Integer::from(Integer::u_pow_u(10, 12)),
            c3: Enclosure::from_int(2, 40),
            c4: Enclosure::from_int(1, 40),
            x: vec![Integer::from(100); 3],
        };
        let cell = reduce_linear_form(&problem, &RetryPolicy::default(), |d| {
            Ok((vec![log(2, d), log(3, d), log(5, d)], None))
        })
        .unwrap();
        assert!(is_reduced(&cell.basis));
        assert!(cell.cap > 0);
        assert_eq!(cell.outcome.degenerate, Some(Rational::new()));
    }

    #[test]
    fn exhausted_retries_are_reported() {
        // C far below X^3, so the distance bound never beats T^2 + S
        let log = |v: i64, d: u32| Enclosure::from_int(v, d).ln().unwrap();
        let problem = LinearFormProblem {
            label: "tiny".into(),
            c: Integer::from(10),
            c3: Enclosure::from_int(2, 40),
            c4: Enclosure::from_int(1, 40),
            x: vec![Integer::from(Integer::u_pow_u(10, 30)); 3],
        };
        let policy = RetryPolicy { max_retries: 2, ..RetryPolicy::default() };
        let err =
            reduce_linear_form(&problem, &policy, |d| Ok((vec![log(2, d), log(3, d), log(5, d)], None))).unwrap_err();
        assert!(matches!(err, Error::RetriesExhausted { retries: 2, .. }));
    }
}
