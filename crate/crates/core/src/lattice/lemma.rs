//! Lower bounds on the distance from a target to a lattice, and the height
//! cap they imply for a small linear form.

use rug::{Integer, Rational};

use super::{gram_schmidt, solve_coordinates, LatticeBasis};
use crate::algebraic::Enclosure;
use crate::error::{Error, Result};

/// Digits used for the final logarithms; the inputs are exact.
const CAP_DIGITS: u32 = 60;

/// Output of the distance lemma, kept exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeDistance {
    pub in_lattice: bool,
    /// Coordinates `z = B^-1 y`.
    pub coordinates: Vec<Rational>,
    /// `1` when `y` is a lattice point, otherwise the distance from
    /// `z_{i0}` to the nearest integer.
    pub lambda: Rational,
    /// `c1^2 = max_j ||b_1||^2 / ||b*_j||^2`.
    pub c1_sq: Rational,
    /// `delta^2 = lambda^2 ||b_1||^2 / c1^2`.
    pub delta_sq: Rational,
}

impl LatticeDistance {
    pub fn c1(&self) -> Enclosure {
        sqrt_rational(&self.c1_sq)
    }

    pub fn delta(&self) -> Enclosure {
        sqrt_rational(&self.delta_sq)
    }
}

fn sqrt_rational(q: &Rational) -> Enclosure {
    Enclosure::from_rational(q, CAP_DIGITS).sqrt().expect("nonnegative square")
}

/// `c1` and `delta` for a reduced basis and target `y`.
///
/// `i0` is the largest index with `z_{i0} != 0`. When that coordinate is
/// an integer although `y` is not a lattice point, `lambda` would be zero
/// and the lemma says nothing; this is reported as [`Error::IncreaseC`].
pub fn lower_bound_c1_delta(basis: &LatticeBasis, target: &[Integer]) -> Result<LatticeDistance> {
    let gs = gram_schmidt(basis)?;
    let z = solve_coordinates(basis, target)?;
    let in_lattice = z.iter().all(|v| *v.denom() == 1);
    let lambda = if in_lattice {
        Rational::from(1)
    } else {
        let i0 = z.iter().rposition(|v| *v != 0).expect("a non-lattice target has a nonzero coordinate");
        let frac = z[i0].clone().rem_round().abs();
        if frac == 0 {
            return Err(Error::IncreaseC(format!("coordinate z_{i0} of the target is integral")));
        }
        frac
    };
    let b1 = &gs.norms_sq[0];
    let min_star = gs.norms_sq.iter().min().expect("nonempty basis").clone();
    let c1_sq = Rational::from(b1 / &min_star);
    let delta_sq = Rational::from(lambda.square_ref()) * Rational::from(b1 / &c1_sq);
    Ok(LatticeDistance { in_lattice, coordinates: z, lambda, c1_sq, delta_sq })
}

/// `S = sum_{i<k} X_i^2` and `T = (1 + sum_i X_i) / 2`.
pub fn coefficient_sums(x: &[Integer]) -> (Rational, Rational) {
    let s: Integer = x.iter().take(x.len().saturating_sub(1)).map(|v| Integer::from(v.square_ref())).sum();
    let sum: Integer = x.iter().sum();
    (Rational::from(s), Rational::from((sum + 1u32, Integer::from(2))))
}

/// Result of one height-lemma application.
#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub c1_sq: Rational,
    pub delta_sq: Rational,
    pub s: Rational,
    pub t: Rational,
    /// Enclosure of the right-hand side bound on `H`, when `delta^2 > T^2 + S`.
    pub h: Option<Enclosure>,
    /// `floor` of the upper endpoint of `h`.
    pub h_cap: Option<Integer>,
    /// Lower bound `(sqrt(delta^2 - S) - T) / C` on the nonzero values of the form.
    pub form_lower: Option<Enclosure>,
    /// `x_k` in the exceptional branch `x_1 = ... = x_{k-1} = 0`, when known.
    pub degenerate: Option<Rational>,
}

impl ReductionOutcome {
    /// The integer cap, or the "increase C" signal.
    pub fn cap(&self) -> Result<Integer> {
        self.h_cap.clone().ok_or_else(|| {
            Error::IncreaseC(format!(
                "delta^2 = {:.4e} does not exceed T^2 + S = {:.4e}",
                self.delta_sq.to_f64(),
                (Rational::from(self.t.square_ref()) + &self.s).to_f64()
            ))
        })
    }

    pub fn delta(&self) -> Enclosure {
        sqrt_rational(&self.delta_sq)
    }

    pub fn c1(&self) -> Enclosure {
        sqrt_rational(&self.c1_sq)
    }
}

/// `H <= (log(C c3) - log(sqrt(delta^2 - S) - T)) / c4`, when `delta^2 > T^2 + S`.
///
/// `sqrt(delta^2 - S) - T` is evaluated as
/// `(delta^2 - S - T^2) / (sqrt(delta^2 - S) + T)` so the exact positive
/// numerator carries the sign and nothing cancels. Equality leaves the
/// logarithm undefined and is treated like failure.
pub fn reduced_height_cap(
    c1_sq: &Rational,
    delta_sq: &Rational,
    s: &Rational,
    t: &Rational,
    c: &Integer,
    c3: &Enclosure,
    c4: &Enclosure,
) -> ReductionOutcome {
    let mut out = ReductionOutcome {
        c1_sq: c1_sq.clone(),
        delta_sq: delta_sq.clone(),
        s: s.clone(),
        t: t.clone(),
        h: None,
        h_cap: None,
        form_lower: None,
        degenerate: None,
    };
    let gap = Rational::from(delta_sq - s) - Rational::from(t.square_ref());
    if gap <= 0 {
        return out;
    }
    let d = CAP_DIGITS;
    let root = Enclosure::from_rational(&Rational::from(delta_sq - s), d).sqrt().expect("delta^2 > S");
    let denom = &root + &Enclosure::from_rational(t, d);
    let margin = &Enclosure::from_rational(&gap, d) / &denom;
    let cc = Enclosure::from_integer(c, d);
    let log_cc3 = (&cc * c3).ln().expect("C c3 > 0");
    let log_margin = margin.ln().expect("positive margin");
    let h = &(&log_cc3 - &log_margin) / c4;
    out.h_cap = h.floor_upper();
    out.form_lower = Some(&margin / &cc);
    out.h = Some(h);
    out
}
