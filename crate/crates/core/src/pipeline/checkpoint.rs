//! Per-cell results and the JSON-lines checkpoint that lets long sweeps resume.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rug::Rational;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::algebraic::Enclosure;
use crate::error::{Error, Result};
use crate::lattice::CellReduction;

/// Identifies one reduction cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub stage: String,
    pub k: Option<u32>,
    pub d1: u8,
    pub d2: Option<u8>,
    pub ell: Option<u32>,
}

impl CellKey {
    pub fn new(stage: &str, k: Option<u32>, d1: u8, d2: Option<u8>, ell: Option<u32>) -> Self {
        Self { stage: stage.to_string(), k, d1, d2, ell }
    }

    pub fn label(&self) -> String {
        let mut s = self.stage.clone();
        if let Some(k) = self.k {
            s.push_str(&format!(" k={k}"));
        }
        s.push_str(&format!(" d1={}", self.d1));
        if let Some(d2) = self.d2 {
            s.push_str(&format!(" d2={d2}"));
        }
        if let Some(ell) = self.ell {
            s.push_str(&format!(" ell={ell}"));
        }
        s
    }
}

/// What a successful cell contributes to the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(flatten)]
    pub key: CellKey,
    /// The `C` that produced the cap.
    pub c: String,
    pub retries: u32,
    pub digits: u32,
    pub cap: u64,
    pub delta: String,
    pub delta_log10: f64,
    /// `delta` at the starting `C`, when the first attempt got that far.
    pub initial_delta: Option<String>,
    pub initial_delta_log10: Option<f64>,
    pub c1: String,
    /// Lower bound on the nonzero values of the linear form.
    pub form_lower: Option<String>,
    pub form_lower_log10: Option<f64>,
}

const SIG: usize = 4;

fn sqrt_of(q: &Rational) -> Enclosure {
    Enclosure::from_rational(q, 30).sqrt().expect("squares are nonnegative")
}

impl CellSummary {
    pub fn from_reduction(key: CellKey, cell: &CellReduction) -> Result<Self> {
        let cap = cell
            .cap
            .to_u64()
            .ok_or_else(|| Error::Invariant(format!("{}: cap {} does not fit in u64", key.label(), cell.cap)))?;
        let delta = cell.distance.delta();
        let initial = cell.initial_delta_sq.as_ref().map(sqrt_of);
        let form = cell.outcome.form_lower.as_ref();
        Ok(Self {
            key,
            c: Enclosure::from_integer(&cell.c, 30).to_sci(3),
            retries: cell.retries,
            digits: cell.digits,
            cap,
            delta: delta.to_sci(SIG),
            delta_log10: delta.log10_mid(),
            initial_delta: initial.as_ref().map(|d| d.to_sci(SIG)),
            initial_delta_log10: initial.as_ref().map(Enclosure::log10_mid),
            c1: cell.distance.c1().to_sci(SIG),
            form_lower: form.map(|f| f.to_sci(SIG)),
            form_lower_log10: form.map(Enclosure::log10_mid),
        })
    }
}

/// A cell that ran out of retries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailedCell {
    #[serde(flatten)]
    pub key: CellKey,
    pub reason: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    fingerprint: String,
}

/// Append-only JSON-lines file of completed cells.
///
/// The first line records a fingerprint of the configuration that produced
/// the cells; reopening with a different fingerprint is refused. Cell lines
/// that do not parse (a write cut short by a crash) are skipped on load.
#[derive(Debug)]
pub struct Checkpoint {
    path: PathBuf,
    done: HashMap<CellKey, CellSummary>,
    writer: Mutex<BufWriter<File>>,
}

impl Checkpoint {
    pub fn open(path: impl AsRef<Path>, fingerprint: &str) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut done = HashMap::new();
        let mut torn = false;
        let mut fresh = true;
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            torn = !text.is_empty() && !text.ends_with('\n');
            let mut lines = text.lines().enumerate();
            if let Some((_, first)) = lines.next() {
                fresh = false;
                let header: Header = serde_json::from_str(first)
                    .map_err(|e| Error::Domain(format!("{} has no checkpoint header: {e}", path.display())))?;
                if header.fingerprint != fingerprint {
                    return Err(Error::Domain(format!(
                        "{} was written by a different configuration ({} != {fingerprint})",
                        path.display(),
                        header.fingerprint
                    )));
                }
            }
            for (i, line) in lines {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CellSummary>(line) {
                    Ok(cell) => {
                        done.insert(cell.key.clone(), cell);
                    }
                    Err(e) => {
                        warn!(path = %path.display(), line = i + 1, error = %e, "skipping unreadable checkpoint line")
                    }
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        if torn {
            file.write_all(b"\n")?;
        }
        if fresh {
            writeln!(file, "{}", serde_json::to_string(&Header { fingerprint: fingerprint.to_string() })?)?;
        }
        Ok(Self { path, done, writer: Mutex::new(BufWriter::new(file)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Cells loaded from disk when the checkpoint was opened.
    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }

    pub fn get(&self, key: &CellKey) -> Option<&CellSummary> {
        self.done.get(key)
    }

    pub fn record(&self, cell: &CellSummary) -> Result<()> {
        let line = serde_json::to_string(cell)?;
        let mut w = self.writer.lock().expect("checkpoint writer poisoned");
        writeln!(w, "{line}")?;
        w.flush()?;
        Ok(())
    }
}
