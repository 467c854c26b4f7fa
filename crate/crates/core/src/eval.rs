//! Cell-level precision and recall of a predicted grid against ground truth.
//!
//! Truth cells with `m(Θ) >= mask_level` are left out. Both grids are
//! labelled with [`classify_cell`]; the composite `O_sd` state counts any
//! occupied label as positive.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{classify_cell, CellLabel};
use crate::grid::EvidentialGrid;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("prediction and truth grids have different geometry")]
    SpecMismatch,
    #[error("{name} must lie in (0, 1], got {value}")]
    BadLevel { name: &'static str, value: f64 },
    #[error("nothing to aggregate")]
    Empty,
}

/// The states scored by the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalState {
    #[serde(rename = "F")]
    Free,
    #[serde(rename = "O_s")]
    Static,
    #[serde(rename = "O_d")]
    Dynamic,
    #[serde(rename = "O_sd")]
    Occupied,
}

impl EvalState {
    pub const ALL: [EvalState; 4] = [
        EvalState::Free,
        EvalState::Static,
        EvalState::Dynamic,
        EvalState::Occupied,
    ];

    /// Whether `label` is a positive for this state.
    pub fn matches(self, label: CellLabel) -> bool {
        match self {
            EvalState::Free => label == CellLabel::Free,
            EvalState::Static => label == CellLabel::Static,
            EvalState::Dynamic => label == CellLabel::Dynamic,
            EvalState::Occupied => label.is_occupied(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EvalState::Free => "F",
            EvalState::Static => "O_s",
            EvalState::Dynamic => "O_d",
            EvalState::Occupied => "O_sd",
        }
    }
}

impl fmt::Display for EvalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StateCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl StateCounts {
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    fn add(&mut self, other: &StateCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Confusion counts for one or more prediction/truth pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// Indexed like [`EvalState::ALL`].
    pub states: [StateCounts; 4],
    pub evaluated_cells: u64,
    pub masked_cells: u64,
}

impl ConfusionCounts {
    pub fn state(&self, s: EvalState) -> &StateCounts {
        &self.states[s as usize]
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        for (a, b) in self.states.iter_mut().zip(&other.states) {
            a.add(b);
        }
        self.evaluated_cells += other.evaluated_cells;
        self.masked_cells += other.masked_cells;
    }
}

fn check_level(name: &'static str, value: f64) -> Result<(), EvalError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(EvalError::BadLevel { name, value })
    }
}

/// Scores one predicted grid against its truth.
///
/// Truth cells at or above `mask_level` uncertainty are masked. A prediction
/// that abstains (labels a cell unknown) counts as a false negative for the
/// truth state; a truth cell that is below the mask level but still
/// unlabelled only produces false positives.
pub fn evaluate_pair(
    pred: &EvidentialGrid,
    truth: &EvidentialGrid,
    threshold: f64,
    mask_level: f64,
) -> Result<ConfusionCounts, EvalError> {
    if pred.spec() != truth.spec() {
        return Err(EvalError::SpecMismatch);
    }
    check_level("threshold", threshold)?;
    check_level("mask level", mask_level)?;

    let mut counts = ConfusionCounts::default();
    for (p, t) in pred.cells().iter().zip(truth.cells()) {
        if t.unknown() >= mask_level {
            counts.masked_cells += 1;
            continue;
        }
        let truth_label = classify_cell(t, threshold);
        counts.evaluated_cells += 1;
        let pred_label = classify_cell(p, threshold);
        for (state, c) in EvalState::ALL.iter().zip(counts.states.iter_mut()) {
            match (state.matches(pred_label), state.matches(truth_label)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Sum counts over samples, then divide.
    #[default]
    Micro,
    /// Average per-sample ratios, skipping samples where a ratio is undefined.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub state: EvalState,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// `None` when undefined (no positive predictions).
    pub precision: Option<f64>,
    /// `None` when undefined (no positive truth cells).
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub averaging: Averaging,
    pub samples: usize,
    pub evaluated_cells: u64,
    pub masked_cells: u64,
    pub states: Vec<StateMetrics>,
}

impl EvalReport {
    pub fn state(&self, s: EvalState) -> &StateMetrics {
        &self.states[s as usize]
    }

    /// Plain-text table, one row per state; undefined metrics print as `n/a`.
    pub fn to_text(&self) -> String {
        let fmt_metric = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let mut out = format!(
            "# samples={} evaluated_cells={} masked_cells={} averaging={:?}\n",
            self.samples, self.evaluated_cells, self.masked_cells, self.averaging
        );
        out.push_str("state\ttp\tfp\tfn\tprecision\trecall\n");
        for m in &self.states {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                m.state,
                m.tp,
                m.fp,
                m.fn_,
                fmt_metric(m.precision),
                fmt_metric(m.recall)
            ));
        }
        out
    }
}

pub fn aggregate(reports: &[ConfusionCounts]) -> Result<EvalReport, EvalError> {
    aggregate_with(reports, Averaging::Micro)
}

pub fn aggregate_with(reports: &[ConfusionCounts], averaging: Averaging) -> Result<EvalReport, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut total = ConfusionCounts::default();
    for r in reports {
        total.merge(r);
    }
    let mean = |values: Vec<f64>| (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);

    let states = EvalState::ALL
        .iter()
        .map(|&state| {
            let c = total.state(state);
            let (precision, recall) = match averaging {
                Averaging::Micro => (c.precision(), c.recall()),
                Averaging::Macro => (
                    mean(reports.iter().filter_map(|r| r.state(state).precision()).collect()),
                    mean(reports.iter().filter_map(|r| r.state(state).recall()).collect()),
                ),
            };
            StateMetrics {
                state,
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                precision,
                recall,
            }
        })
        .collect();

    Ok(EvalReport {
        averaging,
        samples: reports.len(),
        evaluated_cells: total.evaluated_cells,
        masked_cells: total.masked_cells,
        states,
    })
}
