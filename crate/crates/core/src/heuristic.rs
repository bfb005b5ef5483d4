//! The correction heuristic: start from `c = p/|p|` and keep nudging `c` away
//! from the maximizer `k_c` and toward `p` until `c·k_c < c·p`.
//!
//! No convergence guarantee; this is the baseline the reductions improve on.

use serde::{Deserialize, Serialize};

use crate::bodies::Body;
use crate::{tol, Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub max_iterations: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { max_iterations: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicStep {
    /// Unit test direction.
    pub direction: Vector,
    pub maximizer: Vector,
    /// `c·k_c - c·p`.
    pub gap: f64,
    /// `gap * (p - k_c)/|p - k_c|`, added to `c` before renormalizing. Absent
    /// on the final step.
    pub update: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeuristicVerdict {
    Separator(Vector),
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicOutcome {
    pub verdict: HeuristicVerdict,
    /// Number of updates performed (`i` at loop exit).
    pub iterations: usize,
    pub trace: Vec<HeuristicStep>,
}

impl HeuristicOutcome {
    /// Support queries issued; one per trace step.
    pub fn oracle_calls(&self) -> usize {
        self.trace.len()
    }
}

pub fn run_heuristic(body: &Body, p: &Vector, cfg: &HeuristicConfig) -> Result<HeuristicOutcome> {
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidConfig("heuristic needs at least one iteration".into()));
    }
    if p.len() != body.dimension() {
        return Err(Error::DimensionMismatch {
            expected: body.dimension(),
            found: p.len(),
        });
    }
    let norm = p.norm();
    if norm < tol::ZERO {
        return Err(Error::ZeroQuery);
    }

    let mut c = p / norm;
    let mut gap = 1.0;
    let mut i = 0;
    let mut trace = Vec::new();
    while gap > 0.0 && i < cfg.max_iterations {
        let k = body.support(&c)?.maximizer;
        gap = c.dot(&k) - c.dot(p);
        if gap < 0.0 {
            trace.push(HeuristicStep {
                direction: c.clone(),
                maximizer: k,
                gap,
                update: None,
            });
            return Ok(HeuristicOutcome {
                verdict: HeuristicVerdict::Separator(c),
                iterations: i,
                trace,
            });
        }
        let toward = p - &k;
        let dist = toward.norm();
        if dist < tol::ZERO {
            return Err(Error::DegenerateUpdate);
        }
        let update = toward * (gap / dist);
        let next = &c + &update;
        trace.push(HeuristicStep {
            direction: c,
            maximizer: k,
            gap,
            update: Some(update),
        });
        c = &next / next.norm();
        i += 1;
    }
    Ok(HeuristicOutcome {
        verdict: HeuristicVerdict::Inconclusive,
        iterations: i,
        trace,
    })
}
