//! Iterative random-forest imputation of missing panel cells.
//!
//! Missing cells start at their series median. Each round retrains one
//! forest per indicator (per entity, or across entities in pooled mode) on
//! the rows where that indicator was observed, using the other indicators of
//! the same year and the normalized year as features, and re-predicts the
//! missing cells. Observed cells are never written.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::exec::Executor;
use crate::forest::{forest_predict, train_forest};
use crate::frame::PanelTable;
use crate::rng::derive_seed;
use crate::stats;

pub use crate::forest::ForestParams;

/// Fewest observed values an (entity, indicator) series needs to be imputed
/// in per-entity mode.
pub const MIN_OBSERVED: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub mode: String,
    pub original_missing: usize,
    /// Cells filled, by indicator.
    pub imputed: BTreeMap<String, usize>,
    /// Cells left missing because their series was excluded.
    pub left_missing: usize,
    pub rounds: usize,
    /// Relative change of the imputed cells in the last round.
    pub final_change: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl ImputationReport {
    pub fn imputed_total(&self) -> usize {
        self.imputed.values().sum()
    }
}

/// A block of rows imputed together: one entity, or all entities.
struct Block {
    /// `(entity, year index)` per row.
    rows: Vec<(usize, usize)>,
    /// Indicators taking part (observed enough to model).
    columns: Vec<usize>,
    /// Current values per column, aligned with `rows`.
    values: Vec<Vec<f64>>,
    /// Missing row positions per column.
    missing: Vec<Vec<usize>>,
    label: String,
}

fn median(values: &[f64]) -> f64 {
    stats::quantile_linear(&stats::sorted(values), 0.5)
}

fn build_block(
    panel: &PanelTable,
    entities: &[usize],
    label: String,
    warnings: &mut Vec<String>,
) -> Block {
    let ny = panel.years().len();
    let rows: Vec<(usize, usize)> = entities
        .iter()
        .flat_map(|&e| (0..ny).map(move |y| (e, y)))
        .collect();
    let mut columns = Vec::new();
    let mut values = Vec::new();
    let mut missing = Vec::new();
    for c in 0..panel.columns().len() {
        let cells: Vec<Option<f64>> = rows.iter().map(|&(e, y)| panel.cell(e, c, y)).collect();
        let observed: Vec<f64> = cells.iter().flatten().copied().collect();
        let holes: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].is_none()).collect();
        if observed.len() < MIN_OBSERVED {
            if !holes.is_empty() {
                warnings.push(format!(
                    "{label}: {} has {} observed values; its {} missing cells are left missing",
                    panel.columns()[c],
                    observed.len(),
                    holes.len()
                ));
            }
            continue;
        }
        let fill = median(&observed);
        values.push(cells.iter().map(|v| v.unwrap_or(fill)).collect());
        missing.push(holes);
        columns.push(c);
    }
    Block {
        rows,
        columns,
        values,
        missing,
        label,
    }
}

/// Runs one round over a block; returns `(sum sq change, sum sq new)`.
fn refine_block<E: Executor>(
    block: &mut Block,
    panel: &PanelTable,
    params: &ForestParams,
    round: usize,
    exec: &E,
) -> Result<(f64, f64)> {
    let years = panel.years();
    let span = (years.len().max(2) - 1) as f64;
    let mut order: Vec<usize> = (0..block.columns.len())
        .filter(|&j| !block.missing[j].is_empty())
        .collect();
    order.sort_by_key(|&j| (block.missing[j].len(), j));
    let (mut delta, mut norm) = (0.0, 0.0);
    for j in order {
        let features = |r: usize| -> Vec<f64> {
            let mut f: Vec<f64> = (0..block.columns.len())
                .filter(|&k| k != j)
                .map(|k| block.values[k][r])
                .collect();
            f.push(block.rows[r].1 as f64 / span);
            f
        };
        let holes = &block.missing[j];
        let train: Vec<usize> = (0..block.rows.len())
            .filter(|r| holes.binary_search(r).is_err())
            .collect();
        let x: Vec<Vec<f64>> = train.iter().map(|&r| features(r)).collect();
        let y: Vec<f64> = train.iter().map(|&r| block.values[j][r]).collect();
        let name = &panel.columns()[block.columns[j]];
        let seed = derive_seed(params.seed, &format!("{}/{name}/{round}", block.label));
        let forest = train_forest(&x, &y, params, seed, exec)?;
        let preds: Vec<f64> = holes
            .iter()
            .map(|&r| forest_predict(&forest.trees, &features(r)))
            .collect::<Result<_>>()?;
        for (&r, p) in holes.iter().zip(preds) {
            let old = block.values[j][r];
            delta += (p - old) * (p - old);
            norm += p * p;
            block.values[j][r] = p;
        }
    }
    Ok((delta, norm))
}

/// Fills missing cells; observed cells are copied bit for bit.
pub fn impute_panel<E: Executor>(
    panel: &PanelTable,
    params: &ForestParams,
    exec: &E,
) -> Result<(PanelTable, ImputationReport)> {
    params.validate()?;
    let ne = panel.entities().len();
    let ny = panel.years().len();
    for (c, name) in panel.columns().iter().enumerate() {
        let any = (0..ne).any(|e| panel.series(e, c).iter().any(Option::is_some));
        if !any {
            return Err(CoreError::InvalidInput(format!(
                "indicator {name} has no observed values in the panel"
            )));
        }
    }
    let original_missing = panel.missing_count();
    let mode = if params.pooled { "pooled" } else { "per_entity" };
    let mut warnings = Vec::new();
    let mut blocks: Vec<Block> = if params.pooled {
        let all: Vec<usize> = (0..ne).collect();
        alloc::vec![build_block(panel, &all, "ALL".into(), &mut warnings)]
    } else {
        (0..ne)
            .map(|e| build_block(panel, &[e], panel.entities()[e].clone(), &mut warnings))
            .collect()
    };

    let mut rounds = 0;
    let mut change = 0.0;
    let mut converged = original_missing == 0;
    if !converged {
        for round in 0..params.max_rounds {
            let (mut delta, mut norm) = (0.0, 0.0);
            for b in &mut blocks {
                let (d, n) = refine_block(b, panel, params, round, exec)?;
                delta += d;
                norm += n;
            }
            rounds = round + 1;
            change = if norm > 0.0 { delta / norm } else { 0.0 };
            if change < params.tol {
                converged = true;
                break;
            }
        }
    }

    let mut cells = panel.cells().to_vec();
    let mut imputed: BTreeMap<String, usize> = BTreeMap::new();
    let ncols = panel.columns().len();
    for b in &blocks {
        for (j, &c) in b.columns.iter().enumerate() {
            for &r in &b.missing[j] {
                let (e, y) = b.rows[r];
                cells[(e * ncols + c) * ny + y] = Some(b.values[j][r]);
                *imputed.entry(panel.columns()[c].clone()).or_default() += 1;
            }
        }
    }
    let out = PanelTable::from_parts(
        panel.entities().to_vec(),
        panel.years()[0],
        ny,
        panel.columns().to_vec(),
        cells,
    )?;
    let left_missing = out.missing_count();
    Ok((
        out,
        ImputationReport {
            mode: mode.into(),
            original_missing,
            imputed,
            left_missing,
            rounds,
            final_change: change,
            converged,
            warnings,
        },
    ))
}
