//! Prediction-stability analysis over repeated runs.
//!
//! The same prompt is repeated N times per item; an item scores 1 when its
//! verdicts disagree across repetitions and 0 otherwise, and the variability
//! rate is the mean of those indicators. Rejection reasons are plumbing, not
//! predictions, so by default every `Rejected` compares equal; a strict mode
//! also distinguishes the reasons.

use crate::domain::{EvaluationRecord, GoldLabel, Verdict};
use crate::metrics::{self, ConfusionCounts, Rate};
use num_rational::Ratio;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// How verdicts are compared across repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComparisonMode {
    /// All rejections count as one class.
    #[default]
    CollapseRejected,
    /// Rejections with different reasons count as disagreement.
    DistinguishRejectReasons,
}

fn verdicts_equal(a: Verdict, b: Verdict, mode: ComparisonMode) -> bool {
    match mode {
        ComparisonMode::DistinguishRejectReasons => a == b,
        ComparisonMode::CollapseRejected => match (a, b) {
            (Verdict::Rejected(_), Verdict::Rejected(_)) => true,
            _ => a == b,
        },
    }
}

/// Verdicts for every (repetition, item) cell.
#[derive(Debug, Clone)]
pub struct RepetitionMatrix {
    item_ids: Vec<String>,
    /// rows[rep][item_index]
    rows: Vec<Vec<Verdict>>,
}

#[derive(Debug, Error)]
pub enum VariabilityError {
    #[error("need at least 2 repetitions, got {0}")]
    TooFewReps(usize),
    #[error("item {item:?} is missing repetition {rep}")]
    MissingCell { item: String, rep: u32 },
    #[error("duplicate record for item {item:?} repetition {rep}")]
    DuplicateCell { item: String, rep: u32 },
    #[error("repetition indices are not contiguous from 0 (max {max}, distinct {distinct})")]
    NonContiguous { max: u32, distinct: usize },
}

impl RepetitionMatrix {
    pub fn new(item_ids: Vec<String>, rows: Vec<Vec<Verdict>>) -> Result<Self, VariabilityError> {
        if rows.len() < 2 {
            return Err(VariabilityError::TooFewReps(rows.len()));
        }
        for (rep, row) in rows.iter().enumerate() {
            if row.len() != item_ids.len() {
                let item = item_ids
                    .get(row.len())
                    .cloned()
                    .unwrap_or_else(|| "<extra>".to_string());
                return Err(VariabilityError::MissingCell {
                    item,
                    rep: rep as u32,
                });
            }
        }
        Ok(RepetitionMatrix { item_ids, rows })
    }

    /// Groups records into a full grid; every (item, rep) cell must exist.
    pub fn from_records(records: &[EvaluationRecord]) -> Result<Self, VariabilityError> {
        let mut cells: HashMap<(&str, u32), Verdict> = HashMap::new();
        let mut max_rep = 0u32;
        let mut ids: Vec<&str> = Vec::new();
        for r in records {
            max_rep = max_rep.max(r.repetition);
            if cells
                .insert((r.item_id.as_str(), r.repetition), r.verdict)
                .is_some()
            {
                return Err(VariabilityError::DuplicateCell {
                    item: r.item_id.clone(),
                    rep: r.repetition,
                });
            }
            if r.repetition == 0 {
                ids.push(r.item_id.as_str());
            }
        }
        let reps = max_rep as usize + 1;
        if reps < 2 {
            return Err(VariabilityError::TooFewReps(reps));
        }
        ids.sort_unstable();
        if ids.is_empty() {
            return Err(VariabilityError::TooFewReps(0));
        }
        let mut rows = Vec::with_capacity(reps);
        for rep in 0..reps as u32 {
            let mut row = Vec::with_capacity(ids.len());
            for id in &ids {
                match cells.get(&(*id, rep)) {
                    Some(v) => row.push(*v),
                    None => {
                        return Err(VariabilityError::MissingCell {
                            item: (*id).to_string(),
                            rep,
                        })
                    }
                }
            }
            rows.push(row);
        }
        let expected = ids.len() * reps;
        if cells.len() != expected {
            // Extra cells for items that never appeared at repetition 0.
            return Err(VariabilityError::NonContiguous {
                max: max_rep,
                distinct: cells.len(),
            });
        }
        Ok(RepetitionMatrix {
            item_ids: ids.into_iter().map(str::to_string).collect(),
            rows,
        })
    }

    pub fn reps(&self) -> usize {
        self.rows.len()
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn column(&self, item_index: usize) -> Vec<Verdict> {
        self.rows.iter().map(|row| row[item_index]).collect()
    }

    pub fn rows(&self) -> &[Vec<Verdict>] {
        &self.rows
    }
}

/// 0 when all repetitions agree, 1 otherwise.
pub fn item_variability(
    verdicts: &[Verdict],
    mode: ComparisonMode,
) -> Result<u8, VariabilityError> {
    if verdicts.len() < 2 {
        return Err(VariabilityError::TooFewReps(verdicts.len()));
    }
    let first = verdicts[0];
    let all_equal = verdicts[1..]
        .iter()
        .all(|v| verdicts_equal(first, *v, mode));
    Ok(if all_equal { 0 } else { 1 })
}

/// Per-repetition accuracy, present when gold labels are supplied.
#[derive(Debug, Clone, Serialize)]
pub struct RepAccuracy {
    pub repetition: u32,
    pub accuracy_percent: f64,
}

#[derive(Debug, Clone)]
pub struct VariabilityReport {
    /// item id -> indicator, in item order.
    pub per_item: Vec<(String, u8)>,
    pub rate: Rate,
    pub per_rep_accuracy: Vec<RepAccuracy>,
    pub reps: usize,
}

/// Computes the per-item indicators, their mean, and per-repetition accuracy.
pub fn variability_rate(
    matrix: &RepetitionMatrix,
    mode: ComparisonMode,
    gold: Option<&HashMap<String, GoldLabel>>,
) -> Result<VariabilityReport, VariabilityRateError> {
    let mut per_item = Vec::with_capacity(matrix.item_ids.len());
    let mut disagreeing: u64 = 0;
    for (idx, id) in matrix.item_ids.iter().enumerate() {
        let indicator =
            item_variability(&matrix.column(idx), mode).map_err(VariabilityRateError::Matrix)?;
        disagreeing += indicator as u64;
        per_item.push((id.clone(), indicator));
    }
    let rate = Rate::from_ratio(Ratio::new(disagreeing, matrix.item_ids.len() as u64));
    let mut per_rep_accuracy = Vec::new();
    if let Some(gold) = gold {
        for (rep, row) in matrix.rows.iter().enumerate() {
            let pairs = matrix
                .item_ids
                .iter()
                .map(String::as_str)
                .zip(row.iter().copied());
            let counts: ConfusionCounts =
                metrics::tally_pairs(pairs, gold).map_err(VariabilityRateError::Tally)?;
            let accuracy = metrics::compute_metrics("", counts)
                .accuracy
                .map(|r| r.percent_one_decimal())
                .unwrap_or(f64::NAN);
            per_rep_accuracy.push(RepAccuracy {
                repetition: rep as u32,
                accuracy_percent: accuracy,
            });
        }
    }
    Ok(VariabilityReport {
        per_item,
        rate,
        per_rep_accuracy,
        reps: matrix.reps(),
    })
}

#[derive(Debug, Error)]
pub enum VariabilityRateError {
    #[error(transparent)]
    Matrix(VariabilityError),
    #[error("gold-label mismatch: {0}")]
    Tally(metrics::TallyError),
}

/// JSON document form of a report.
#[derive(Debug, Clone, Serialize)]
pub struct VariabilityDoc {
    pub reps: usize,
    pub items: usize,
    pub variability_rate: f64,
    pub variability_percent: f64,
    pub disagreeing_items: u64,
    pub per_rep_accuracy: Vec<RepAccuracy>,
    pub per_item: BTreeMap<String, u8>,
}

impl VariabilityReport {
    pub fn to_doc(&self) -> VariabilityDoc {
        VariabilityDoc {
            reps: self.reps,
            items: self.per_item.len(),
            variability_rate: self.rate.as_f64(),
            variability_percent: self.rate.percent_one_decimal(),
            disagreeing_items: self.per_item.iter().map(|(_, i)| *i as u64).sum(),
            per_rep_accuracy: self.per_rep_accuracy.clone(),
            per_item: self.per_item.iter().cloned().collect(),
        }
    }

    /// CSV rows: item_id, one verdict column per repetition, indicator.
    pub fn to_csv(&self, matrix: &RepetitionMatrix) -> String {
        let mut out = String::from("item_id");
        for rep in 0..matrix.reps() {
            out.push_str(&format!(",rep{rep}"));
        }
        out.push_str(",indicator\n");
        for (idx, (id, indicator)) in self.per_item.iter().enumerate() {
            out.push_str(id);
            for verdict in matrix.column(idx) {
                out.push(',');
                out.push_str(&verdict.to_string());
            }
            out.push_str(&format!(",{indicator}\n"));
        }
        out
    }
}
