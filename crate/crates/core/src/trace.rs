//! Per-run logs shared by the engine, the reductions and the CLI.

use serde::{Deserialize, Serialize};

use crate::analytic_center::{Cut, CutKind};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Heuristic,
    HeuristicReduction,
    StandardReduction,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Heuristic => "heuristic",
            Mode::HeuristicReduction => "heuristic_reduction",
            Mode::StandardReduction => "standard_reduction",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heuristic" => Ok(Mode::Heuristic),
            "ours" | "heuristic_reduction" => Ok(Mode::HeuristicReduction),
            "standard" | "standard_reduction" => Ok(Mode::StandardReduction),
            other => Err(format!("unknown mode `{other}` (expected heuristic, ours or standard)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerTag {
    Member,
    Cut,
    /// Heuristic step without a verdict.
    Update,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRow {
    pub a: Vec<f64>,
    pub b: f64,
    pub kind: CutKind,
}

impl From<&Cut> for CutRow {
    fn from(c: &Cut) -> Self {
        CutRow {
            a: c.normal().as_slice().to_vec(),
            b: c.offset(),
            kind: c.kind(),
        }
    }
}

/// One oracle query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Analytic center (heuristic mode: the test direction).
    pub center: Vec<f64>,
    /// Point handed to the oracle.
    pub query_direction: Vec<f64>,
    pub oracle_answer: AnswerTag,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cut: Option<CutRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inradius_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_slack: Option<f64>,
    /// Smallest conic weight of the center (absent without cuts).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_conic: Option<f64>,
    /// `|ω - Σ λ_i a_i|`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conic_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub active_cuts: Option<usize>,
    /// Support-oracle maximizer, when the query went to the support oracle.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub maximizer: Option<Vec<f64>>,
    /// `c·k_c - c·p` (direction search) or `y·k - 1` (polar search).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<f64>,
    /// Support-oracle invocations spent on this query.
    #[serde(default)]
    pub support_calls: usize,
}

impl TraceRow {
    pub fn new(iter: usize, center: &Vector, query: &Vector, answer: AnswerTag) -> Self {
        TraceRow {
            iter,
            center: center.as_slice().to_vec(),
            query_direction: query.as_slice().to_vec(),
            oracle_answer: answer,
            cut: None,
            inradius_estimate: None,
            min_slack: None,
            min_conic: None,
            conic_residual: None,
            active_cuts: None,
            maximizer: None,
            gap: None,
            support_calls: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VerdictRecord {
    Separated { separator: Vec<f64>, margin: f64 },
    InBody { delta: f64, reason: String },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub mode: Mode,
    pub rows: Vec<TraceRow>,
    pub verdict: VerdictRecord,
    pub oracle_calls: usize,
    pub wall_time: f64,
}

impl RunTrace {
    /// Support queries recorded in the rows.
    pub fn recorded_support_calls(&self) -> usize {
        self.rows.iter().map(|r| r.support_calls).sum()
    }
}
