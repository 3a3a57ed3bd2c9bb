//! Parallel map over reduction cells with checkpointing and a deterministic merge.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use super::checkpoint::{CellKey, CellSummary, Checkpoint, FailedCell};
use crate::error::{Error, Result};
use crate::lattice::CellReduction;

/// Every cell of one stage, sorted by key.
#[derive(Debug, Clone, Default)]
pub struct StageCells {
    pub cells: Vec<CellSummary>,
    pub failed: Vec<FailedCell>,
}

/// Runs `cells` grouped so that `prepare` (the expensive per-group constants)
/// is called once per group and skipped when the checkpoint already has
/// every cell of the group.
pub(crate) fn sweep<G, C, P, K, R>(
    groups: &[(G, Vec<C>)],
    checkpoint: Option<&Checkpoint>,
    prepare: impl Fn(&G) -> Result<P> + Sync,
    key: K,
    reduce: R,
) -> Result<StageCells>
where
    G: Sync,
    C: Sync,
    K: Fn(&G, &C) -> CellKey + Sync,
    R: Fn(&P, &G, &C) -> Result<CellReduction> + Sync,
{
    let per_group: Vec<Result<StageCells>> = groups
        .par_iter()
        .map(|(g, cells)| {
            let mut out = StageCells::default();
            let mut pending = Vec::new();
            for c in cells {
                let k = key(g, c);
                match checkpoint.and_then(|ck| ck.get(&k)) {
                    Some(done) => out.cells.push(done.clone()),
                    None => pending.push((k, c)),
                }
            }
            if pending.is_empty() {
                return Ok(out);
            }
            let ctx = prepare(g)?;
            for (k, c) in pending {
                match reduce(&ctx, g, c) {
                    Ok(red) => {
                        let summary = CellSummary::from_reduction(k, &red)?;
                        if let Some(ck) = checkpoint {
                            ck.record(&summary)?;
                        }
                        out.cells.push(summary);
                    }
                    Err(Error::RetriesExhausted { cell, retries }) => {
                        out.failed.push(FailedCell { key: k, reason: format!("{cell}; {retries} retries") });
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = StageCells::default();
    for r in per_group {
        let r = r?;
        all.cells.extend(r.cells);
        all.failed.extend(r.failed);
    }
    all.cells.sort_by(|a, b| a.key.cmp(&b.key));
    all.failed.sort();
    info!(cells = all.cells.len(), failed = all.failed.len(), "sweep finished");
    Ok(all)
}

/// A cell key with the value that made it extreme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub value: String,
    pub log10: f64,
    #[serde(flatten)]
    pub key: CellKey,
}

/// Aggregates over one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub cells: usize,
    pub failed: usize,
    /// Largest cap over the successful cells.
    pub cap: Option<u64>,
    pub cap_cell: Option<CellKey>,
    pub min_delta: Option<Extreme>,
    pub max_delta: Option<Extreme>,
    /// Extremes of `delta` at the starting `C`, over cells whose first attempt produced one.
    pub min_initial_delta: Option<Extreme>,
    pub max_initial_delta: Option<Extreme>,
    pub min_form_lower: Option<Extreme>,
    /// Number of cells by how many times `C` was raised.
    pub retries: BTreeMap<u32, usize>,
    pub max_digits: u32,
}

fn delta(c: &CellSummary) -> Option<(&String, f64)> {
    Some((&c.delta, c.delta_log10))
}

fn initial(c: &CellSummary) -> Option<(&String, f64)> {
    c.initial_delta.as_ref().zip(c.initial_delta_log10)
}

fn form_lower(c: &CellSummary) -> Option<(&String, f64)> {
    c.form_lower.as_ref().zip(c.form_lower_log10)
}

fn extreme<'a>(
    cells: &'a [CellSummary],
    field: impl Fn(&'a CellSummary) -> Option<(&'a String, f64)>,
    want_min: bool,
) -> Option<Extreme> {
    let mut best: Option<(&CellSummary, &String, f64)> = None;
    for c in cells {
        if let Some((v, l)) = field(c) {
            let better = match best {
                None => true,
                Some((_, _, b)) => (want_min && l < b) || (!want_min && l > b),
            };
            if better {
                best = Some((c, v, l));
            }
        }
    }
    best.map(|(c, v, l)| Extreme { value: v.clone(), log10: l, key: c.key.clone() })
}

impl StageStats {
    pub fn from_cells(stage: &StageCells) -> Self {
        let cells = &stage.cells;
        let top = cells.iter().max_by(|a, b| a.cap.cmp(&b.cap).then_with(|| b.key.cmp(&a.key)));
        let mut retries = BTreeMap::new();
        for c in cells {
            *retries.entry(c.retries).or_insert(0) += 1;
        }
        Self {
            cells: cells.len(),
            failed: stage.failed.len(),
            cap: top.map(|c| c.cap),
            cap_cell: top.map(|c| c.key.clone()),
            min_delta: extreme(cells, delta, true),
            max_delta: extreme(cells, delta, false),
            min_initial_delta: extreme(cells, initial, true),
            max_initial_delta: extreme(cells, initial, false),
            min_form_lower: extreme(cells, form_lower, true),
            retries,
            max_digits: cells.iter().map(|c| c.digits).max().unwrap_or(0),
        }
    }
}
