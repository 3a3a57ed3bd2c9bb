//! End-to-end run: bounds, Case I reductions, the exhaustive search and the
//! Case II rounds, merged into one deterministic report.

pub mod case1;
pub mod case2;
pub mod checkpoint;
pub mod search;
mod sweep;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rug::Integer;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::algebraic::{parse_integer, Enclosure};
use crate::bounds::{n_cap, round_up_significant};
use crate::error::{domain, Error, Result};
use crate::lattice::RetryPolicy;

pub use case1::{
    case1_ell_cell, case1_m_cell, case1_reduce_ell, case1_reduce_m, constants_for, digit_pairs, leading_block, strided,
    OrderConstants,
};
pub use case2::{
    case2_cell, case2_round, run_case2, Case2Lattice, Case2Plan, Case2Report, Case2Round, RoundStep, RoundSummary,
};
pub use checkpoint::{CellKey, CellSummary, Checkpoint, FailedCell};
pub use search::{
    expected_matches, search_palindromic, verify_solution, SearchMatch, SolutionDiagnostics, KNOWN_SOLUTIONS,
};
pub use sweep::{Extreme, StageCells, StageStats};

/// Lower end of the index range; smaller indices are covered by the search.
pub const N_MIN: i64 = 7;

/// Case II assumes `k` above this.
pub const CASE2_K_FLOOR: u32 = 1400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Strided subset of the cells, endpoints included.
    #[default]
    Sampled,
    /// Every cell.
    Full,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampled" => Ok(SweepMode::Sampled),
            "full" => Ok(SweepMode::Full),
            other => domain(format!("sweep mode must be 'sampled' or 'full', got '{other}'")),
        }
    }
}

/// Everything that determines a report. Constants are decimal strings
/// (`5.8e191`) so the config round-trips through JSON exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub k_min: u32,
    pub k_max: u32,
    pub search: bool,
    /// Search bound on `n`; defaults to the bound the Case I caps imply.
    pub search_n_max: Option<i64>,
    pub case1: bool,
    pub case2: bool,
    pub sweep: SweepMode,
    pub k_stride: u32,
    pub ell_stride: u32,
    pub case1_ell_c: String,
    pub case1_m_c: String,
    /// Coefficient bound for Case I, at least `n_cap(k_max)`; `None` rounds that
    /// cap up to two digits.
    pub case1_n_coeff: Option<String>,
    pub case2_n_coeff: String,
    pub case2_round1_c: String,
    pub case2_round1_a2_c: String,
    pub case2_round2_c: String,
    pub case2_a2_sweep: SweepMode,
    /// Rounds allowed before giving up on the contradiction.
    pub case2_max_rounds: u32,
    pub retry: RetryPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: CASE2_K_FLOOR,
            search: true,
            search_n_max: None,
            case1: true,
            case2: true,
            sweep: SweepMode::Sampled,
            k_stride: 25,
            ell_stride: 4,
            case1_ell_c: "5.8e191".into(),
            case1_m_c: "1e192".into(),
            case1_n_coeff: Some("8.3e63".into()),
            case2_n_coeff: "2e351".into(),
            case2_round1_c: "1e1055".into(),
            case2_round1_a2_c: "1e1054".into(),
            case2_round2_c: "1e211".into(),
            case2_a2_sweep: SweepMode::Sampled,
            case2_max_rounds: 3,
            retry: RetryPolicy::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 2 || self.k_min > self.k_max {
            return domain(format!("need 2 <= k_min <= k_max, got {}..{}", self.k_min, self.k_max));
        }
        if self.k_stride == 0 || self.ell_stride == 0 {
            return domain("strides must be positive");
        }
        if self.case2_max_rounds == 0 {
            return domain("case II needs at least one round");
        }
        if let Some(n) = self.search_n_max {
            if n < N_MIN {
                return domain(format!("search n_max must be at least {N_MIN}, got {n}"));
            }
        }
        if self.search && !self.case1 && self.search_n_max.is_none() {
            return domain("search without Case I needs an explicit n_max");
        }
        for c in [
            &self.case1_ell_c,
            &self.case1_m_c,
            &self.case2_n_coeff,
            &self.case2_round1_c,
            &self.case2_round1_a2_c,
            &self.case2_round2_c,
        ]
        .into_iter()
        .chain(self.case1_n_coeff.as_ref())
        {
            if parse_integer(c)? < 1 {
                return domain(format!("constant {c} must be a positive integer"));
            }
        }
        Ok(())
    }

    /// A stable string identifying the configuration, used to guard checkpoints.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Where to persist results; none of this affects the report.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub checkpoint: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Per-order summary of the `m` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSummary {
    pub k: u32,
    pub cells: usize,
    pub cap: u64,
    pub min_delta_log10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case1Report {
    pub n_cap_at_k_max: String,
    /// Bound on every coefficient of the two linear forms.
    pub n_coeff: String,
    pub ell_cap: u64,
    pub m_cap: u64,
    /// `6 (2 ell_cap + m_cap) + 2`.
    pub n_cap: u64,
    pub ell_stage: StageStats,
    pub m_stage: StageStats,
    /// One entry per `(k, d1)`.
    pub ell_cells: Vec<CellSummary>,
    /// One entry per order in the `m` sweep.
    pub m_orders: Vec<OrderSummary>,
    pub m_ell_values: usize,
    pub cells_failed: Vec<FailedCell>,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub k_range: (u32, u32),
    pub n_range: (i64, i64),
    pub expected: bool,
}

/// What the run establishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// The search found exactly the known solutions in its box.
    pub matches_expected: Option<bool>,
    /// Every Case I cell produced a cap.
    pub case1_complete: Option<bool>,
    /// Case II ended below its floor.
    pub case2_contradiction: Option<bool>,
    /// The search box covers `2 <= k <= 1400` and the Case I index bound.
    pub covers_case1: bool,
    /// No sampling anywhere.
    pub exhaustive: bool,
    /// Every enabled stage succeeded and together they cover all `k` and `n`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub kpell: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub versions: Versions,
    /// Working decimal digits per stage (the largest a cell may use).
    pub precision: BTreeMap<String, u32>,
    pub matches: Vec<SearchMatch>,
    pub search: Option<SearchSummary>,
    pub case1: Option<Case1Report>,
    pub case2: Option<Case2Report>,
    pub verdict: Verdict,
    /// Wall-clock seconds per stage; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl PipelineReport {
    /// The report with timings cleared, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        Self { timings: BTreeMap::new(), ..self.clone() }
    }

    /// An invariant error describing what keeps the theorem from following.
    pub fn assert_theorem(&self) -> Result<()> {
        if self.verdict.holds {
            return Ok(());
        }
        let v = &self.verdict;
        let mut why = Vec::new();
        if v.matches_expected != Some(true) {
            why.push(format!("search: {:?}", v.matches_expected));
        }
        if v.case1_complete != Some(true) {
            why.push(format!("case I complete: {:?}", v.case1_complete));
        }
        if v.case2_contradiction != Some(true) {
            why.push(format!("case II contradiction: {:?}", v.case2_contradiction));
        }
        if !v.covers_case1 {
            why.push("search box does not cover Case I".into());
        }
        Err(Error::Invariant(format!("theorem not established ({})", why.join("; "))))
    }
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    info!(stage, "starting");
    let t = Instant::now();
    let r = f().map_err(|e| e.in_stage(stage));
    timings.insert(stage.to_string(), t.elapsed().as_secs_f64());
    r
}

fn sci(v: &Integer) -> String {
    Enclosure::from_integer(v, 30).to_sci(3)
}

fn run_case1(
    cfg: &PipelineConfig,
    checkpoint: Option<&Checkpoint>,
    timings: &mut BTreeMap<String, f64>,
) -> Result<Case1Report> {
    let policy = &cfg.retry;
    let cap_at_max = timed(timings, "bounds", || n_cap(&Enclosure::from_int(i64::from(cfg.k_max), 60)))?;
    let n_coeff = match &cfg.case1_n_coeff {
        Some(s) => parse_integer(s)?,
        None => round_up_significant(&cap_at_max, 2)?,
    };
    if !cap_at_max.certainly_le(&Enclosure::from_integer(&n_coeff, 60)) {
        return Err(Error::Invariant(format!(
            "Case I coefficient bound {} is below n_cap({}) = {}",
            sci(&n_coeff),
            cfg.k_max,
            cap_at_max.to_sci(3)
        )));
    }
    let ks: Vec<u32> = (cfg.k_min..=cfg.k_max).collect();
    let d1s: Vec<u8> = (1..=9).collect();
    let c_ell = parse_integer(&cfg.case1_ell_c)?;
    let ell = timed(timings, "case1-ell", || case1_reduce_ell(&ks, &d1s, &n_coeff, &c_ell, policy, checkpoint))?;
    let ell_stats = StageStats::from_cells(&ell);
    // The linear form only bounds ell >= 2.
    let ell_cap = ell_stats.cap.unwrap_or(0).max(1);

    let (m_ks, m_ells) = match cfg.sweep {
        SweepMode::Full => (ks.clone(), (1..=ell_cap as u32).collect::<Vec<_>>()),
        SweepMode::Sampled => (strided(cfg.k_min, cfg.k_max, cfg.k_stride), strided(1, ell_cap as u32, cfg.ell_stride)),
    };
    let c_m = parse_integer(&cfg.case1_m_c)?;
    let m = timed(timings, "case1-m", || {
        case1_reduce_m(&m_ks, &m_ells, &digit_pairs(), &n_coeff, &c_m, policy, checkpoint)
    })?;
    let m_stats = StageStats::from_cells(&m);
    let m_cap = m_stats.cap.unwrap_or(0).max(1);

    let mut by_k: BTreeMap<u32, OrderSummary> = BTreeMap::new();
    for c in &m.cells {
        let k = c.key.k.expect("case I cells carry k");
        let e = by_k.entry(k).or_insert(OrderSummary { k, cells: 0, cap: 0, min_delta_log10: f64::INFINITY });
        e.cells += 1;
        e.cap = e.cap.max(c.cap);
        e.min_delta_log10 = e.min_delta_log10.min(c.delta_log10);
    }
    let mut cells_failed = ell.failed.clone();
    cells_failed.extend(m.failed.iter().cloned());
    Ok(Case1Report {
        n_cap_at_k_max: cap_at_max.to_sci(3),
        n_coeff: sci(&n_coeff),
        ell_cap,
        m_cap,
        n_cap: 6 * (2 * ell_cap + m_cap) + 2,
        ell_stage: ell_stats,
        m_stage: m_stats,
        ell_cells: ell.cells,
        m_orders: by_k.into_values().collect(),
        m_ell_values: m_ells.len(),
        cells_failed,
        exhaustive: cfg.sweep == SweepMode::Full,
    })
}

/// Runs every enabled stage, writes the report when asked, and returns it.
///
/// Stage failures come back tagged with the stage name. Whether the
/// theorem follows is recorded in [`PipelineReport::verdict`]; see
/// [`PipelineReport::assert_theorem`].
pub fn run_full_pipeline(cfg: &PipelineConfig, options: &RunOptions) -> Result<PipelineReport> {
    cfg.validate()?;
    let checkpoint = match &options.checkpoint {
        Some(p) => Some(Checkpoint::open(p, &cfg.fingerprint()?)?),
        None => None,
    };
    let ck = checkpoint.as_ref();
    let policy = &cfg.retry;
    let mut timings = BTreeMap::new();
    let mut precision = BTreeMap::new();
    precision.insert("guard".to_string(), policy.guard_digits);
    precision.insert("escalation".to_string(), policy.escalation_digits);
    for (name, c) in [
        ("case1-ell", &cfg.case1_ell_c),
        ("case1-m", &cfg.case1_m_c),
        ("case2-r1-a1", &cfg.case2_round1_c),
        ("case2-r1-a2", &cfg.case2_round1_a2_c),
        ("case2-r2", &cfg.case2_round2_c),
    ] {
        precision.insert(name.to_string(), policy.max_digits(&parse_integer(c)?));
    }

    let case1 = if cfg.case1 { Some(run_case1(cfg, ck, &mut timings)?) } else { None };

    let (matches, search) = if cfg.search {
        let n_hi = match (cfg.search_n_max, &case1) {
            (Some(n), _) => n,
            (None, Some(c1)) => {
                i64::try_from(c1.n_cap).map_err(|_| Error::Invariant("index bound overflows".into()))?
            }
            (None, None) => unreachable!("validated"),
        };
        let found = timed(&mut timings, "search", || search_palindromic(cfg.k_min, cfg.k_max, N_MIN, n_hi))?;
        let expected = expected_matches(cfg.k_min, cfg.k_max, N_MIN, n_hi);
        let got: Vec<_> = found.iter().map(|m| (m.k, m.n, m.value.clone())).collect();
        let summary =
            SearchSummary { k_range: (cfg.k_min, cfg.k_max), n_range: (N_MIN, n_hi), expected: got == expected };
        (found, Some(summary))
    } else {
        (Vec::new(), None)
    };

    let case2 = if cfg.case2 {
        let plan = Case2Plan {
            n_coeff: parse_integer(&cfg.case2_n_coeff)?,
            c_round1: parse_integer(&cfg.case2_round1_c)?,
            c_round1_a2: parse_integer(&cfg.case2_round1_a2_c)?,
            c_round2: parse_integer(&cfg.case2_round2_c)?,
            a2_stride: (cfg.case2_a2_sweep == SweepMode::Sampled).then_some(cfg.ell_stride),
            max_rounds: cfg.case2_max_rounds,
            k_floor: CASE2_K_FLOOR,
        };
        Some(timed(&mut timings, "case2", || run_case2(&plan, policy, ck))?)
    } else {
        None
    };

    let covers_case1 = match (&search, &case1) {
        (Some(s), Some(c1)) => s.k_range.0 == 2 && s.k_range.1 >= CASE2_K_FLOOR && s.n_range.1 >= c1.n_cap as i64,
        _ => false,
    };
    let matches_expected = search.as_ref().map(|s| s.expected);
    let case1_complete = case1.as_ref().map(|c| c.cells_failed.is_empty());
    let case2_contradiction = case2.as_ref().map(|c| c.contradiction && c.cells_failed.is_empty());
    let exhaustive = case1.as_ref().is_some_and(|c| c.exhaustive) && case2.as_ref().is_some_and(|c| c.exhaustive);
    let holds = matches_expected == Some(true)
        && case1_complete == Some(true)
        && case2_contradiction == Some(true)
        && covers_case1;
    let report = PipelineReport {
        config: cfg.clone(),
        versions: Versions { kpell: env!("CARGO_PKG_VERSION").to_string() },
        precision,
        matches,
        search,
        case1,
        case2,
        verdict: Verdict { matches_expected, case1_complete, case2_contradiction, covers_case1, exhaustive, holds },
        timings,
    };
    if let Some(path) = &options.report {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &report)?;
    }
    Ok(report)
}
