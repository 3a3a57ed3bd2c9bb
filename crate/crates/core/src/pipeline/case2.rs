//! Orders `k > 1400`: `alpha` is replaced by `phi^2`, and two rounds of
//! reduction on the lattices `A1` (over `d1`) and `A2` (over `ell, d1, d2`)
//! push `k` back below 1400.

use rug::Integer;
use serde::{Deserialize, Serialize};

use super::case1::{digit_pairs, leading_block};
use super::checkpoint::{CellKey, Checkpoint, FailedCell};
use super::sweep::{sweep, StageCells, StageStats};
use crate::algebraic::{ln_int, phi, Enclosure};
use crate::bounds::{n_cap, solve_log_fixed_point};
use crate::error::{domain, Error, Result};
use crate::lattice::{reduce_linear_form, CellReduction, LinearFormProblem, RetryPolicy};

const CONST_DIGITS: u32 = 60;

/// Which approximation lattice a round reduces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case2Lattice {
    /// `log(d1 (phi+2)/9) + (2 ell + m) log 10 - n log phi^2`, bounded by `6225 phi^-min(k/2, ell log_phi 10)`.
    A1,
    /// `log((d1 10^ell - (d1-d2)) (phi+2)/9) + (ell + m) log 10 - n log phi^2`, bounded by `9 phi^(-k/2)`.
    A2 { ells: Vec<u32> },
}

impl Case2Lattice {
    pub fn name(&self) -> &'static str {
        match self {
            Case2Lattice::A1 => "A1",
            Case2Lattice::A2 { .. } => "A2",
        }
    }
}

/// Parameters of one round.
#[derive(Debug, Clone)]
pub struct Case2Round {
    pub stage: String,
    pub lattice: Case2Lattice,
    pub c: Integer,
    pub c3: u32,
    /// Bound on every coefficient of the linear form.
    pub n_coeff: Integer,
}

/// `log(phi + 2) - log 9`, `log 10` and `log phi` at one precision.
#[derive(Debug, Clone)]
pub struct PhiConstants {
    digits: u32,
    shift: Enclosure,
    ln10: Enclosure,
    log_phi: Enclosure,
}

impl PhiConstants {
    pub fn new(digits: u32) -> Result<Self> {
        let ph = phi(digits);
        let shift = &(ph.add_integer(&Integer::from(2))).ln()? - &ln_int(9, digits);
        Ok(Self { digits, shift, ln10: ln_int(10, digits), log_phi: ph.ln()? })
    }

    fn etas(&self, lead: &Integer, digits: u32) -> Result<Vec<Enclosure>> {
        let fresh;
        let cs = if digits <= self.digits {
            self
        } else {
            fresh = Self::new(digits)?;
            &fresh
        };
        let d = digits.max(cs.digits);
        let eta1 = &Enclosure::from_integer(lead, d).ln()? + &cs.shift;
        let two_log_phi = cs.log_phi.mul_integer(&Integer::from(2));
        Ok(vec![eta1, cs.ln10.clone(), -two_log_phi])
    }
}

/// One cell: `lead` is `d1` for `A1` and `d1 10^ell - (d1 - d2)` for `A2`.
pub fn case2_cell(
    consts: &PhiConstants,
    key: &CellKey,
    lead: &Integer,
    round: &Case2Round,
    policy: &RetryPolicy,
) -> Result<CellReduction> {
    let problem = LinearFormProblem {
        label: key.label(),
        c: round.c.clone(),
        c3: Enclosure::from_int(i64::from(round.c3), CONST_DIGITS),
        c4: phi(CONST_DIGITS).ln()?,
        x: vec![round.n_coeff.clone(); 3],
    };
    reduce_linear_form(&problem, policy, |digits| Ok((consts.etas(lead, digits)?, None)))
}

/// Caps implied by one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub stage: String,
    pub lattice: String,
    pub c: String,
    pub c3: u32,
    pub n_coeff: String,
    /// Smallest and largest `ell` swept (`A2` only).
    pub ell_range: Option<(u32, u32)>,
    pub ell_values: usize,
    /// Largest Lemma cap over the cells: bounds `min(k/2, ell log_phi 10)` for `A1`, `k/2` for `A2`.
    pub cap: Option<u64>,
    /// `2 cap`.
    pub k_cap: Option<u64>,
    /// `floor(cap / log_phi 10)` (`A1` only).
    pub ell_cap: Option<u64>,
    pub stats: StageStats,
    pub failed: Vec<FailedCell>,
}

/// Largest `ell` with `ell log_phi 10 <= cap`.
pub fn ell_from_cap(cap: u64) -> Result<u64> {
    let d = CONST_DIGITS;
    let v = &Enclosure::from_integer(&Integer::from(cap), d) * &(&phi(d).ln()? / &ln_int(10, d));
    v.floor_exact()
        .and_then(|i| i.to_u64())
        .ok_or_else(|| Error::Certification(format!("cannot decide floor(cap / log_phi 10) for cap {cap}")))
}

pub fn case2_round(
    round: &Case2Round,
    policy: &RetryPolicy,
    checkpoint: Option<&Checkpoint>,
) -> Result<(StageCells, RoundSummary)> {
    if round.c3 == 0 || round.n_coeff < 1 {
        return domain("case II round needs c3 >= 1 and a positive coefficient bound");
    }
    let digits = policy.max_digits(&round.c);
    let stage = round.stage.as_str();
    let (cells, ell_range, ell_values) = match &round.lattice {
        Case2Lattice::A1 => {
            let groups: Vec<((), Vec<u8>)> = vec![((), (1..=9u8).collect())];
            let cells = sweep(
                &groups,
                checkpoint,
                |_| PhiConstants::new(digits),
                |_, &d1| CellKey::new(stage, None, d1, None, None),
                |consts, _, &d1| {
                    let key = CellKey::new(stage, None, d1, None, None);
                    case2_cell(consts, &key, &Integer::from(d1), round, policy)
                },
            )?;
            (cells, None, 0)
        }
        Case2Lattice::A2 { ells } => {
            if ells.contains(&0) {
                return domain("ell must be at least 1");
            }
            let pairs = digit_pairs();
            let groups: Vec<(u32, Vec<(u8, u8)>)> = ells.iter().map(|&ell| (ell, pairs.clone())).collect();
            let cells = sweep(
                &groups,
                checkpoint,
                |_| PhiConstants::new(digits),
                |&ell, &(d1, d2)| CellKey::new(stage, None, d1, Some(d2), Some(ell)),
                |consts, &ell, &(d1, d2)| {
                    let key = CellKey::new(stage, None, d1, Some(d2), Some(ell));
                    case2_cell(consts, &key, &leading_block(ell, d1, d2), round, policy)
                },
            )?;
            let range = ells.iter().min().copied().zip(ells.iter().max().copied());
            (cells, range, ells.len())
        }
    };
    let stats = StageStats::from_cells(&cells);
    let cap = stats.cap;
    let ell_cap = match (&round.lattice, cap) {
        (Case2Lattice::A1, Some(c)) => Some(ell_from_cap(c)?),
        _ => None,
    };
    let summary = RoundSummary {
        stage: round.stage.clone(),
        lattice: round.lattice.name().to_string(),
        c: Enclosure::from_integer(&round.c, 30).to_sci(3),
        c3: round.c3,
        n_coeff: Enclosure::from_integer(&round.n_coeff, 30).to_sci(3),
        ell_range,
        ell_values,
        cap,
        k_cap: cap.map(|c| 2 * c),
        ell_cap,
        failed: cells.failed.clone(),
        stats,
    };
    Ok((cells, summary))
}

/// Inputs of the Case II argument.
#[derive(Debug, Clone)]
pub struct Case2Plan {
    /// Coefficient bound for round one; must dominate `n_cap` at the `k` fixed point.
    pub n_coeff: Integer,
    pub c_round1: Integer,
    pub c_round1_a2: Integer,
    pub c_round2: Integer,
    /// Round-one `A2` coverage: `None` sweeps every `ell`, `Some(s)` takes
    /// every `s`-th plus the last. Later rounds always sweep every `ell`.
    pub a2_stride: Option<u32>,
    /// Rounds beyond the second use `C = 10 N^3`.
    pub max_rounds: u32,
    /// Case II assumes `k > k_floor`.
    pub k_floor: u32,
}

/// The inputs and outcome of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStep {
    pub round: u32,
    pub n_coeff: String,
    pub c_a1: String,
    pub c_a2: String,
    /// `max(2 cap_A1, 2 cap_A2)`, absent when a cell failed.
    pub k_bound: Option<u64>,
    /// `n_cap(k_bound)`, which sets the next round's coefficient bound.
    pub n_cap: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case2Report {
    /// Fixed-point cap on `k` before any reduction.
    pub k_fixed_point: String,
    pub n_cap_at_fixed_point: String,
    pub steps: Vec<RoundStep>,
    pub rounds: Vec<RoundSummary>,
    pub k_bound: Option<u64>,
    pub k_floor: u32,
    /// `k_bound <= k_floor`, contradicting `k > k_floor`.
    pub contradiction: bool,
    pub cells_failed: Vec<FailedCell>,
    pub exhaustive: bool,
}

/// Smallest power of ten certified to exceed `x`.
pub fn next_power_of_ten(x: &Enclosure) -> Result<Integer> {
    if !x.is_positive() {
        return domain("next_power_of_ten needs a positive value");
    }
    let mut e = x.upper_f64().log10().ceil().max(0.0) as u32;
    loop {
        let p = Integer::from(Integer::u_pow_u(10, e));
        if x.certainly_lt(&Enclosure::from_integer(&p, x.digits().max(30))) {
            return Ok(p);
        }
        e += 1;
    }
}

fn a2_ells(ell_cap: u64, stride: Option<u32>) -> Vec<u32> {
    let hi = u32::try_from(ell_cap).unwrap_or(u32::MAX).max(1);
    match stride {
        None => (1..=hi).collect(),
        Some(s) => super::case1::strided(1, hi, s),
    }
}

/// `10 N^3`, the multiplier used for rounds after the second.
pub fn later_round_c(n_coeff: &Integer) -> Integer {
    Integer::from(n_coeff * n_coeff) * n_coeff * 10u32
}

/// Rounds until `k <= k_floor`, no further progress, or `max_rounds`.
pub fn run_case2(plan: &Case2Plan, policy: &RetryPolicy, checkpoint: Option<&Checkpoint>) -> Result<Case2Report> {
    if plan.max_rounds == 0 {
        return domain("case II needs at least one round");
    }
    let fixed_a = solve_log_fixed_point("7.8e15", 1)?;
    let fixed_b = solve_log_fixed_point("2e30", 2)?;
    let k_fixed = fixed_a.max(&fixed_b);
    let n_at_fixed = n_cap(&k_fixed)?;
    let n1 = Enclosure::from_integer(&plan.n_coeff, 60);
    if !n_at_fixed.certainly_le(&n1) {
        return Err(Error::Invariant(format!(
            "round-one coefficient bound {} is below n_cap({}) = {}",
            n1.to_sci(3),
            k_fixed.to_sci(3),
            n_at_fixed.to_sci(3)
        )));
    }
    let mut report = Case2Report {
        k_fixed_point: k_fixed.to_sci(3),
        n_cap_at_fixed_point: n_at_fixed.to_sci(3),
        steps: Vec::new(),
        rounds: Vec::new(),
        k_bound: None,
        k_floor: plan.k_floor,
        contradiction: false,
        cells_failed: Vec::new(),
        exhaustive: plan.a2_stride.is_none(),
    };
    let sci = |v: &Integer| Enclosure::from_integer(v, 30).to_sci(3);

    let mut n_coeff = plan.n_coeff.clone();
    for r in 1..=plan.max_rounds {
        let (c_a1, c_a2, stride) = match r {
            1 => (plan.c_round1.clone(), plan.c_round1_a2.clone(), plan.a2_stride),
            2 => (plan.c_round2.clone(), plan.c_round2.clone(), None),
            _ => (later_round_c(&n_coeff), later_round_c(&n_coeff), None),
        };
        let mut step = RoundStep {
            round: r,
            n_coeff: sci(&n_coeff),
            c_a1: sci(&c_a1),
            c_a2: sci(&c_a2),
            k_bound: None,
            n_cap: None,
        };
        // A1 first; A2 then covers the ell range A1 leaves open.
        let a1 = Case2Round {
            stage: format!("case2-r{r}-a1"),
            lattice: Case2Lattice::A1,
            c: c_a1,
            c3: 6225,
            n_coeff: n_coeff.clone(),
        };
        let (_, s1) = case2_round(&a1, policy, checkpoint)?;
        report.cells_failed.extend(s1.failed.iter().cloned());
        let open = match (s1.k_cap, s1.ell_cap, s1.failed.is_empty()) {
            (Some(k1), Some(ell), true) => Some((k1, ell)),
            _ => None,
        };
        report.rounds.push(s1);
        let Some((k1, ell)) = open else {
            report.steps.push(step);
            break;
        };
        let a2 = Case2Round {
            stage: format!("case2-r{r}-a2"),
            lattice: Case2Lattice::A2 { ells: a2_ells(ell, stride) },
            c: c_a2,
            c3: 9,
            n_coeff: n_coeff.clone(),
        };
        let (_, s2) = case2_round(&a2, policy, checkpoint)?;
        report.cells_failed.extend(s2.failed.iter().cloned());
        let k = match (s2.k_cap, s2.failed.is_empty()) {
            (Some(k2), true) => Some(k1.max(k2)),
            _ => None,
        };
        report.rounds.push(s2);
        step.k_bound = k;
        let Some(k) = k else {
            report.steps.push(step);
            break;
        };
        let previous = report.k_bound;
        report.k_bound = Some(k);
        let cap = n_cap(&Enclosure::from_integer(&Integer::from(k), 60))?;
        step.n_cap = Some(cap.to_sci(3));
        report.steps.push(step);
        if k <= u64::from(plan.k_floor) || previous.is_some_and(|p| k >= p) {
            break;
        }
        n_coeff = next_power_of_ten(&cap)?;
    }
    report.contradiction =
        report.cells_failed.is_empty() && report.k_bound.is_some_and(|k| k <= u64::from(plan.k_floor));
    report.cells_failed.sort();
    Ok(report)
}
