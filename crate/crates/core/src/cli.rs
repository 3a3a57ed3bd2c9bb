//! Command-line front end. Each subcommand is a pure function of its flags.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Integer;
use serde_json::json;

use crate::algebraic::{binet_violations, dominant_root, parse_integer, weight_from_root, Enclosure};
use crate::bounds::{ell_cap, m_cap, n_cap};
use crate::error::{Error, Result};
use crate::lattice::{CellReduction, RetryPolicy};
use crate::pipeline::{
    case1_ell_cell, case1_m_cell, case2_round, constants_for, run_full_pipeline, search_palindromic, Case2Lattice,
    Case2Round, CellKey, CellSummary, PipelineConfig, RunOptions, SweepMode,
};
use crate::sequences::check_fib_identities;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RETRIES: i32 = 3;

/// Inclusive range written `a:b`, or a single value `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: FromStr + Copy + PartialOrd> FromStr for Span<T> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |p: &str| p.trim().parse::<T>().map_err(|_| format!("'{p}' is not a valid number"));
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(Span { lo, hi })
    }
}

fn big(s: &str) -> std::result::Result<Integer, String> {
    parse_integer(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "kpell", version, about = "Palindromic repdigit concatenations among k-generalized Pell numbers")]
pub struct Cli {
    /// Working precision in decimal digits for certified numerics.
    #[arg(long, global = true, env = "KPELL_DIGITS", default_value_t = 60)]
    pub digits: u32,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan P_n^(k) for palindromic concatenations of two repdigits.
    Search {
        #[arg(long, default_value = "2:1400")]
        k: Span<u32>,
        #[arg(long, default_value = "7:2288")]
        n: Span<i64>,
    },
    /// Evaluate the Matveev-derived caps on ell, m and n.
    Bounds {
        #[arg(long)]
        k: String,
        /// Index bound fed into the ell and m caps.
        #[arg(long)]
        n: Option<String>,
    },
    /// Run one reduction cell or round.
    Reduce {
        #[command(subcommand)]
        which: ReduceCommand,
    },
    /// Check invariants over ranges.
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
    /// Run the whole proof and write a report.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeChoice {
    A1,
    A2,
}

#[derive(Debug, Subcommand)]
pub enum ReduceCommand {
    /// The (k, d1) cell bounding ell.
    Case1Ell {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        d1: u8,
        #[arg(long = "C", default_value = "5.8e191", value_parser = big)]
        c: Integer,
        #[arg(long, default_value = "8.3e63", value_parser = big)]
        n_coeff: Integer,
    },
    /// The (k, ell, d1, d2) cell bounding m.
    Case1M {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        ell: u32,
        #[arg(long, default_value_t = 5)]
        d1: u8,
        #[arg(long, default_value_t = 4)]
        d2: u8,
        #[arg(long = "C", default_value = "1e192", value_parser = big)]
        c: Integer,
        #[arg(long, default_value = "8.3e63", value_parser = big)]
        n_coeff: Integer,
    },
    /// A golden-ratio round over d1 (A1) or over ell, d1, d2 (A2).
    Case2 {
        #[arg(long = "C", default_value = "1e1055", value_parser = big)]
        c: Integer,
        #[arg(long, default_value = "2e351", value_parser = big)]
        n_coeff: Integer,
        #[arg(long, value_enum, default_value = "a1")]
        lattice: LatticeChoice,
        /// c3; defaults to 6225 for A1 and 9 for A2.
        #[arg(long)]
        c3: Option<u32>,
        /// ell range for A2.
        #[arg(long, default_value = "1:143")]
        ell: Span<u32>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Certify alpha(k) and f_k(alpha) for every k in the range.
    Roots {
        #[arg(long, default_value = "2:2000")]
        k: Span<u32>,
    },
    /// Check |P_n - f_k(alpha) alpha^n| < 1/2.
    Binet {
        #[arg(long, default_value = "2:100")]
        k: Span<u32>,
        #[arg(long, default_value = "1:300")]
        n: Span<i64>,
    },
    /// Check P_n = F_(2n-1) for n <= k+1 and P_(k+2) = F_(2k+3) - 1.
    Fib {
        #[arg(long, default_value = "2:100")]
        k: Span<u32>,
    },
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Search bound on n; defaults to the bound from the Case I caps.
    #[arg(long)]
    pub n_max: Option<i64>,
    /// Case I m-sweep coverage.
    #[arg(long)]
    pub sweep: Option<SweepMode>,
    /// Case II A2 round-one coverage.
    #[arg(long)]
    pub case2_sweep: Option<SweepMode>,
    /// Case II rounds allowed before giving up on the contradiction.
    #[arg(long)]
    pub case2_max_rounds: Option<u32>,
    #[arg(long)]
    pub no_search: bool,
    #[arg(long)]
    pub no_case1: bool,
    #[arg(long)]
    pub no_case2: bool,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value = "kpell-report.json")]
    pub report: PathBuf,
}

impl clap::builder::ValueParserFactory for SweepMode {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<SweepMode>().map_err(|e| e.to_string()))
    }
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Domain(_) => EXIT_USAGE,
        Error::RetriesExhausted { .. } => EXIT_RETRIES,
        _ => EXIT_INVARIANT,
    }
}

struct Out<'a> {
    w: &'a mut dyn Write,
    json: bool,
}

impl Out<'_> {
    fn line(&mut self, s: impl AsRef<str>) -> Result<()> {
        if !self.json {
            writeln!(self.w, "{}", s.as_ref())?;
        }
        Ok(())
    }

    fn value(&mut self, v: serde_json::Value) -> Result<()> {
        if self.json {
            writeln!(self.w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        Ok(())
    }
}

fn check_digits(d: u32) -> Result<()> {
    if d < 20 {
        return Err(Error::Domain(format!("precision must be at least 20 digits, got {d}")));
    }
    Ok(())
}

fn cmd_search(out: &mut Out, k: Span<u32>, n: Span<i64>) -> Result<i32> {
    let found = search_palindromic(k.lo, k.hi, n.lo, n.hi)?;
    for m in &found {
        out.line(format!("P_{}^({}) = {}", m.n, m.k, m.value))?;
    }
    out.value(json!({ "k": [k.lo, k.hi], "n": [n.lo, n.hi], "matches": found }))?;
    Ok(EXIT_OK)
}

fn cmd_bounds(out: &mut Out, k: &str, n: Option<&str>) -> Result<i32> {
    let d = 60;
    let ke = Enclosure::parse(k, d)?;
    let nc = n_cap(&ke)?;
    out.line(format!("k = {k}"))?;
    out.line(format!("n < 2e30 k^9 (log k)^5 = {}", nc.to_sci(4)))?;
    let mut v = json!({ "k": k, "n_cap": nc.to_sci(6) });
    if let Some(n) = n {
        let ne = Enclosure::parse(n, d)?;
        let l = ell_cap(&ke, &ne)?;
        let m = m_cap(&ke, &ne)?;
        out.line(format!("n = {n}"))?;
        out.line(format!("ell < 4.3e12 k^5 (log k)^2 log n = {}", l.to_sci(4)))?;
        out.line(format!("m < 5.3e24 k^9 (log k)^3 (log n)^2 = {}", m.to_sci(4)))?;
        v["n"] = json!(n);
        v["ell_cap"] = json!(l.to_sci(6));
        v["m_cap"] = json!(m.to_sci(6));
    }
    out.value(v)?;
    Ok(EXIT_OK)
}

fn print_cell(out: &mut Out, key: CellKey, cell: &CellReduction) -> Result<CellSummary> {
    let s = CellSummary::from_reduction(key, cell)?;
    out.line(format!(
        "{}: C = {} (retries {}), c1 = {}, delta = {}, cap = {}",
        s.key.label(),
        s.c,
        s.retries,
        s.c1,
        s.delta,
        s.cap
    ))?;
    Ok(s)
}

fn cmd_reduce(out: &mut Out, which: &ReduceCommand) -> Result<i32> {
    let policy = RetryPolicy::default();
    match which {
        ReduceCommand::Case1Ell { k, d1, c, n_coeff } => {
            let consts = constants_for(*k, c, &policy)?;
            let cell = case1_ell_cell(&consts, *d1, n_coeff, c, &policy)?;
            let s = print_cell(out, CellKey::new("case1-ell", Some(*k), *d1, None, None), &cell)?;
            out.value(serde_json::to_value(s)?)?;
        }
        ReduceCommand::Case1M { k, ell, d1, d2, c, n_coeff } => {
            let consts = constants_for(*k, c, &policy)?;
            let cell = case1_m_cell(&consts, *ell, *d1, *d2, n_coeff, c, &policy)?;
            let s = print_cell(out, CellKey::new("case1-m", Some(*k), *d1, Some(*d2), Some(*ell)), &cell)?;
            out.value(serde_json::to_value(s)?)?;
        }
        ReduceCommand::Case2 { c, n_coeff, lattice, c3, ell } => {
            let (lat, default_c3) = match lattice {
                LatticeChoice::A1 => (Case2Lattice::A1, 6225),
                LatticeChoice::A2 => {
                    if ell.lo == 0 {
                        return Err(Error::Domain("ell must be at least 1".into()));
                    }
                    (Case2Lattice::A2 { ells: (ell.lo..=ell.hi).collect() }, 9)
                }
            };
            let round = Case2Round {
                stage: format!("case2-{}", lat.name().to_lowercase()),
                lattice: lat,
                c: c.clone(),
                c3: c3.unwrap_or(default_c3),
                n_coeff: n_coeff.clone(),
            };
            let (cells, summary) = case2_round(&round, &policy, None)?;
            if matches!(round.lattice, Case2Lattice::A1) {
                for s in &cells.cells {
                    out.line(format!(
                        "{}: C = {} (retries {}), c1 = {}, delta = {}, cap = {}",
                        s.key.label(),
                        s.c,
                        s.retries,
                        s.c1,
                        s.delta,
                        s.cap
                    ))?;
                }
            }
            let cap = summary.cap.map_or("none".to_string(), |c| c.to_string());
            out.line(format!("cells = {}, failed = {}", summary.stats.cells, summary.failed.len()))?;
            out.line(format!("cap = {cap}"))?;
            if let Some(k) = summary.k_cap {
                out.line(format!("k <= {k}"))?;
            }
            if let Some(l) = summary.ell_cap {
                out.line(format!("ell <= {l}"))?;
            }
            out.value(serde_json::to_value(&summary)?)?;
            if let Some(f) = summary.failed.first() {
                return Err(Error::RetriesExhausted { cell: f.reason.clone(), retries: policy.max_retries });
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(out: &mut Out, digits: u32, which: &VerifyCommand) -> Result<i32> {
    check_digits(digits)?;
    let mut failures: Vec<String> = Vec::new();
    let (what, checked) = match which {
        VerifyCommand::Roots { k } => {
            if k.lo < 2 {
                return Err(Error::Domain(format!("order k must be at least 2, got {}", k.lo)));
            }
            use rayon::prelude::*;
            let bad: Vec<String> = (k.lo..=k.hi)
                .into_par_iter()
                .filter_map(|k| match dominant_root(k, digits).and_then(|r| Ok((r.verify(), weight_from_root(&r)?))) {
                    Ok((true, _)) => None,
                    Ok((false, _)) => Some(format!("k={k}: certificate does not re-verify")),
                    Err(e) => Some(format!("k={k}: {e}")),
                })
                .collect();
            failures.extend(bad);
            ("roots", u64::from(k.hi - k.lo + 1))
        }
        VerifyCommand::Binet { k, n } => {
            if k.lo < 2 {
                return Err(Error::Domain(format!("order k must be at least 2, got {}", k.lo)));
            }
            for kk in k.lo..=k.hi {
                for bad in binet_violations(kk, n.lo, n.hi, digits)? {
                    failures.push(format!("k={kk} n={bad}: |P_n - f alpha^n| not certified below 1/2"));
                }
            }
            ("binet", u64::from(k.hi - k.lo + 1) * (n.hi - n.lo + 1) as u64)
        }
        VerifyCommand::Fib { k } => {
            for kk in k.lo..=k.hi {
                for v in check_fib_identities(kk, i64::from(kk) + 2)? {
                    failures.push(format!("k={} n={}: expected {}, got {}", v.k, v.n, v.expected, v.actual));
                }
            }
            ("fib", u64::from(k.hi - k.lo + 1))
        }
    };
    for f in &failures {
        out.line(format!("FAIL {f}"))?;
    }
    out.line(format!("{what}: {checked} checked, {} failures", failures.len()))?;
    out.value(json!({ "check": what, "checked": checked, "failures": failures }))?;
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_pipeline(out: &mut Out, args: &PipelineArgs) -> Result<i32> {
    let mut cfg = match &args.config {
        Some(p) => serde_json::from_str::<PipelineConfig>(&std::fs::read_to_string(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(k) = args.k_max {
        cfg.k_max = k;
    }
    if args.n_max.is_some() {
        cfg.search_n_max = args.n_max;
    }
    if let Some(s) = args.sweep {
        cfg.sweep = s;
    }
    if let Some(s) = args.case2_sweep {
        cfg.case2_a2_sweep = s;
    }
    if let Some(r) = args.case2_max_rounds {
        cfg.case2_max_rounds = r;
    }
    cfg.search &= !args.no_search;
    cfg.case1 &= !args.no_case1;
    cfg.case2 &= !args.no_case2;
    let report = run_full_pipeline(
        &cfg,
        &RunOptions { checkpoint: args.checkpoint.clone(), report: Some(args.report.clone()) },
    )?;
    for m in &report.matches {
        out.line(format!("P_{}^({}) = {}", m.n, m.k, m.value))?;
    }
    if let Some(c1) = &report.case1 {
        out.line(format!(
            "case I: ell <= {}, m <= {}, n <= {} ({} cells failed)",
            c1.ell_cap,
            c1.m_cap,
            c1.n_cap,
            c1.cells_failed.len()
        ))?;
    }
    if let Some(c2) = &report.case2 {
        for r in &c2.rounds {
            out.line(format!(
                "case II {} ({}): C = {}, N = {}, cap = {:?}, k <= {:?}",
                r.stage, r.lattice, r.c, r.n_coeff, r.cap, r.k_cap
            ))?;
        }
        out.line(format!(
            "case II: k <= {:?}, contradiction with k > {}: {}",
            c2.k_bound, c2.k_floor, c2.contradiction
        ))?;
    }
    let v = &report.verdict;
    out.line(format!("verdict: holds = {}, exhaustive = {}", v.holds, v.exhaustive))?;
    out.line(format!("report written to {}", args.report.display()))?;
    out.value(json!({ "report": args.report, "verdict": v }))?;
    report.assert_theorem()?;
    Ok(EXIT_OK)
}

/// Runs a parsed command, writing results to `w` and errors to stderr.
pub fn run(cli: &Cli, w: &mut dyn Write) -> i32 {
    if let Some(t) = cli.threads {
        // A second call in the same process keeps the first pool; that is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let mut out = Out { w, json: cli.json };
    let r = match &cli.command {
        Command::Search { k, n } => cmd_search(&mut out, *k, *n),
        Command::Bounds { k, n } => cmd_bounds(&mut out, k, n.as_deref()),
        Command::Reduce { which } => cmd_reduce(&mut out, which),
        Command::Verify { which } => cmd_verify(&mut out, cli.digits, which),
        Command::Pipeline(args) => cmd_pipeline(&mut out, args),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
