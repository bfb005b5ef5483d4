//! Analytic-center cutting-plane feasibility engine.
//!
//! Starts from the ball of radius `initial_radius`, queries the separation
//! oracle at the analytic center of the current outer approximation, adds
//! the returned cut (weakened to depth `cut_depth` relative to the center),
//! and declares the target empty once the inscribed-radius estimate falls
//! below `r_min`.

use serde::{Deserialize, Serialize};

use crate::analytic_center::{Cut, OuterApprox};
use crate::trace::{AnswerTag, CutRow, TraceRow};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum OracleAnswer {
    Member,
    /// The target lies in `{x : normal·x >= offset}`.
    Cut(Cut),
}

pub trait SeparationOracle {
    /// The point actually submitted when the engine queries `center`.
    fn query_for(&self, center: &Vector) -> Vector {
        center.clone()
    }

    fn separate(&mut self, center: &Vector) -> Result<OracleAnswer>;
}

impl<F> SeparationOracle for F
where
    F: FnMut(&Vector) -> Result<OracleAnswer>,
{
    fn separate(&mut self, center: &Vector) -> Result<OracleAnswer> {
        self(center)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    pub dimension: usize,
    pub initial_radius: f64,
    /// Size floor on the inscribed-radius estimate.
    pub r_min: f64,
    /// Offset of generated cuts relative to the center; `0` is central,
    /// negative is shallow.
    pub cut_depth: f64,
    pub max_cuts: usize,
    pub max_iterations: usize,
    /// Cuts known up front; never dropped.
    pub initial_cuts: Vec<Cut>,
}

impl FeasibilityProblem {
    pub fn new(dimension: usize, initial_radius: f64, r_min: f64) -> Self {
        FeasibilityProblem {
            dimension,
            initial_radius,
            r_min,
            cut_depth: 0.0,
            max_cuts: default_max_cuts(dimension),
            max_iterations: default_budget(dimension, initial_radius, r_min),
            initial_cuts: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dimension == 0 {
            return bad("dimension must be positive".into());
        }
        if !(self.r_min > 0.0) {
            return bad(format!("r_min must be positive, got {}", self.r_min));
        }
        if !(self.initial_radius >= self.r_min && self.initial_radius.is_finite()) {
            return bad(format!(
                "initial radius {} must be finite and at least r_min {}",
                self.initial_radius, self.r_min
            ));
        }
        if !(self.cut_depth <= 0.0) {
            return bad(format!("cut depth must be <= 0, got {}", self.cut_depth));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.max_cuts <= self.initial_cuts.len() {
            return bad(format!(
                "max_cuts ({}) must exceed the number of initial cuts ({})",
                self.max_cuts,
                self.initial_cuts.len()
            ));
        }
        Ok(())
    }
}

/// `ceil(64 n log2(R'/r_min))`, at least one.
pub fn default_budget(dimension: usize, initial_radius: f64, r_min: f64) -> usize {
    let ratio = (initial_radius / r_min).max(2.0);
    (64.0 * dimension as f64 * ratio.log2()).ceil().max(1.0) as usize
}

/// Cap on simultaneously active cuts.
pub fn default_max_cuts(dimension: usize) -> usize {
    4 * dimension + 4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// Inscribed-radius estimate fell below `r_min`.
    SizeFloor,
    /// The cuts left no interior.
    InteriorLost,
    /// `max_iterations` queries without a member.
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityVerdict {
    Feasible(Vector),
    DeclaredEmpty(EmptyReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityOutcome {
    pub verdict: FeasibilityVerdict,
    /// Oracle queries made.
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    /// The outer approximation at exit.
    pub final_approx: OuterApprox,
}

pub fn solve_feasibility(
    problem: &FeasibilityProblem,
    oracle: &mut impl SeparationOracle,
) -> Result<FeasibilityOutcome> {
    problem.validate()?;
    let mut approx = OuterApprox::new(problem.dimension, problem.initial_radius)?;
    for cut in &problem.initial_cuts {
        approx.pin_cut(cut.clone())?;
    }
    let mut trace = Vec::new();
    let mut warm: Option<Vector> = None;

    let finish = |verdict, trace: Vec<TraceRow>, approx| FeasibilityOutcome {
        iterations: trace.len(),
        verdict,
        trace,
        final_approx: approx,
    };

    for iter in 0..problem.max_iterations {
        match approx.analytic_center(warm.as_ref()) {
            Ok(_) => {}
            Err(Error::EmptyInterior) => {
                return Ok(finish(FeasibilityVerdict::DeclaredEmpty(EmptyReason::InteriorLost), trace, approx));
            }
            Err(e) => return Err(e),
        }
        if approx.cuts().len() > problem.max_cuts {
            approx.drop_least_binding(problem.max_cuts)?;
        }
        let center = approx.center().cloned().expect("centered above");
        let estimate = approx.inscribed_radius_estimate()?;
        if estimate < problem.r_min {
            return Ok(finish(FeasibilityVerdict::DeclaredEmpty(EmptyReason::SizeFloor), trace, approx));
        }

        let query = oracle.query_for(&center);
        let answer = oracle.separate(&center)?;
        let mut row = TraceRow::new(iter, &center, &query, AnswerTag::Member);
        row.inradius_estimate = Some(estimate);
        row.min_slack = Some(approx.min_slack(&center));
        row.min_conic = approx.conic().and_then(|l| l.iter().copied().reduce(f64::min));
        row.conic_residual = approx.conic_residual();
        row.active_cuts = Some(approx.cuts().len());

        match answer {
            OracleAnswer::Member => {
                trace.push(row);
                return Ok(finish(FeasibilityVerdict::Feasible(center), trace, approx));
            }
            OracleAnswer::Cut(cut) => {
                let offset = cut.offset().min(cut.normal().dot(&center) + problem.cut_depth);
                let cut = Cut::new(cut.normal().clone(), offset)?;
                let added = approx.add_cut(cut)?;
                row.oracle_answer = AnswerTag::Cut;
                row.cut = Some(CutRow::from(added));
                trace.push(row);
            }
        }
        warm = Some(center);
    }
    Ok(finish(FeasibilityVerdict::DeclaredEmpty(EmptyReason::Budget), trace, approx))
}
