//! Separation from linear optimization.
//!
//! * [`heuristic_reduction`] searches the unit ball of directions for a
//!   separating direction with the analytic-center engine. The first cut
//!   `p/|p|·x >= 0` holds for every separating direction; each further cut is a
//!   [`lemma_cut`] through the queried direction.
//! * [`standard_reduction`] searches `Q_p = K* ∩ {y : p·y >= 1}`, whose points
//!   are exactly the normals `y` of separating planes `y·x = 1`.
//! * [`separate`] dispatches on [`Mode`], including the bare correction
//!   heuristic.

mod lemma;
mod polar;

pub use lemma::lemma_cut;
pub use polar::{ssep_polar, ssep_qp, PolarAnswer, PolarQuery};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analytic_center::{Cut, OuterApprox};
use crate::bodies::Body;
use crate::cutting_plane::{
    default_budget, default_max_cuts, solve_feasibility, EmptyReason, FeasibilityOutcome, FeasibilityProblem,
    FeasibilityVerdict, OracleAnswer, SeparationOracle,
};
use crate::heuristic::{run_heuristic, HeuristicConfig, HeuristicVerdict};
use crate::trace::{AnswerTag, Mode, RunTrace, TraceRow, VerdictRecord};
use crate::{normalize_inf, tol, Error, Result, Vector};

/// Retries with a perturbed direction when the correction cut degenerates.
const MAX_PERTURBATIONS: usize = 3;
const PERTURBATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReductionConfig {
    /// Cut offset relative to the queried center (`<= 0`).
    pub cut_depth: f64,
    pub max_cuts: Option<usize>,
    /// Size floor; defaults per reduction, see [`default_r_min`] and
    /// [`default_r_min_standard`].
    pub r_min: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Seeds the perturbation of degenerate directions.
    pub seed: u64,
    /// Used by [`Mode::Heuristic`] only.
    pub heuristic: HeuristicConfig,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            cut_depth: 0.0,
            max_cuts: None,
            r_min: None,
            max_iterations: None,
            seed: 0,
            heuristic: HeuristicConfig::default(),
        }
    }
}

/// `δ / (4 R sqrt(n))`: size floor on the direction ball.
pub fn default_r_min(delta: f64, outer_radius: f64, n: usize) -> f64 {
    delta / (4.0 * outer_radius * (n as f64).sqrt())
}

/// `δ / (4 (R + 2δ)² sqrt(n))`: size floor inside the polar ball of radius
/// `1/r0`. A point at distance `2δ` from `K` leaves a ball of radius about
/// `δ/(R + 2δ)²` inside `Q_p`.
pub fn default_r_min_standard(delta: f64, outer_radius: f64, n: usize) -> f64 {
    let r = outer_radius + 2.0 * delta;
    delta / (4.0 * r * r * (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InBodyReason {
    /// `p` is numerically the origin, which is interior to every body.
    OriginQuery,
    SizeFloor,
    InteriorLost,
    Budget,
}

impl InBodyReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            InBodyReason::OriginQuery => "origin_query",
            InBodyReason::SizeFloor => "size_floor",
            InBodyReason::InteriorLost => "interior_lost",
            InBodyReason::Budget => "budget",
        }
    }
}

impl From<EmptyReason> for InBodyReason {
    fn from(r: EmptyReason) -> Self {
        match r {
            EmptyReason::SizeFloor => InBodyReason::SizeFloor,
            EmptyReason::InteriorLost => InBodyReason::InteriorLost,
            EmptyReason::Budget => InBodyReason::Budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// `p` is in `S(K, δ)` as far as the configured size floor can tell.
    InBody { delta: f64, reason: InBodyReason },
    /// `separator` has `‖·‖∞ = 1` and `separator·p - h_K(separator) = margin
    /// > 0`. `raw` is the direction as found (unit direction, or the polar
    /// point `y` for the standard reduction).
    Separated {
        separator: Vector,
        margin: f64,
        raw: Vector,
    },
    /// Bare heuristic only.
    Inconclusive,
}

impl Verdict {
    pub fn separator(&self) -> Option<&Vector> {
        match self {
            Verdict::Separated { separator, .. } => Some(separator),
            _ => None,
        }
    }

    pub fn record(&self) -> VerdictRecord {
        match self {
            Verdict::InBody { delta, reason } => VerdictRecord::InBody {
                delta: *delta,
                reason: reason.as_str().to_string(),
            },
            Verdict::Separated { separator, margin, .. } => VerdictRecord::Separated {
                separator: separator.as_slice().to_vec(),
                margin: *margin,
            },
            Verdict::Inconclusive => VerdictRecord::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationVerdict {
    pub verdict: Verdict,
    /// Support-oracle invocations.
    pub oracle_calls: usize,
    /// Engine queries (heuristic mode: updates performed).
    pub iterations: usize,
    pub trace: RunTrace,
    /// Final outer approximation of the engine run, if one was made.
    pub outer: Option<OuterApprox>,
}

pub fn separate(mode: Mode, body: &Body, p: &Vector, delta: f64, cfg: &ReductionConfig) -> Result<SeparationVerdict> {
    match mode {
        Mode::Heuristic => heuristic_mode(body, p, delta, cfg),
        Mode::HeuristicReduction => heuristic_reduction(body, p, delta, cfg),
        Mode::StandardReduction => standard_reduction(body, p, delta, cfg),
    }
}

fn check_query(body: &Body, p: &Vector, delta: f64) -> Result<()> {
    if p.len() != body.dimension() {
        return Err(Error::DimensionMismatch {
            expected: body.dimension(),
            found: p.len(),
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

fn origin_verdict(mode: Mode, delta: f64, started: Instant) -> SeparationVerdict {
    let verdict = Verdict::InBody {
        delta,
        reason: InBodyReason::OriginQuery,
    };
    SeparationVerdict {
        trace: RunTrace {
            mode,
            rows: Vec::new(),
            verdict: verdict.record(),
            oracle_calls: 0,
            wall_time: started.elapsed().as_secs_f64(),
        },
        verdict,
        oracle_calls: 0,
        iterations: 0,
        outer: None,
    }
}

/// The correction heuristic wrapped as a separation run.
pub fn heuristic_mode(body: &Body, p: &Vector, delta: f64, cfg: &ReductionConfig) -> Result<SeparationVerdict> {
    let started = Instant::now();
    check_query(body, p, delta)?;
    if p.norm() < tol::ZERO {
        return Ok(origin_verdict(Mode::Heuristic, delta, started));
    }
    let out = run_heuristic(body, p, &cfg.heuristic)?;
    let rows = out
        .trace
        .iter()
        .enumerate()
        .map(|(i, step)| {
            let tag = if step.update.is_some() {
                AnswerTag::Update
            } else {
                AnswerTag::Member
            };
            let mut row = TraceRow::new(i, &step.direction, &step.direction, tag);
            row.maximizer = Some(step.maximizer.as_slice().to_vec());
            row.gap = Some(step.gap);
            row.support_calls = 1;
            row
        })
        .collect();
    let verdict = match &out.verdict {
        HeuristicVerdict::Separator(c) => separated(c, -out.trace.last().map_or(0.0, |s| s.gap)),
        HeuristicVerdict::Inconclusive => Verdict::Inconclusive,
    };
    Ok(finish(Mode::Heuristic, verdict, rows, out.iterations, None, started))
}

/// `c` rescaled to `‖·‖∞ = 1`, with the margin rescaled to match.
fn separated(raw: &Vector, margin: f64) -> Verdict {
    let scale = raw.amax();
    Verdict::Separated {
        separator: normalize_inf(raw),
        margin: margin / scale,
        raw: raw.clone(),
    }
}

fn finish(
    mode: Mode,
    verdict: Verdict,
    rows: Vec<TraceRow>,
    iterations: usize,
    outer: Option<OuterApprox>,
    started: Instant,
) -> SeparationVerdict {
    let oracle_calls = rows.iter().map(|r| r.support_calls).sum();
    log::debug!("{} finished after {iterations} iterations, {oracle_calls} support calls: {verdict:?}", mode.as_str());
    SeparationVerdict {
        trace: RunTrace {
            mode,
            rows,
            verdict: verdict.record(),
            oracle_calls,
            wall_time: started.elapsed().as_secs_f64(),
        },
        verdict,
        oracle_calls,
        iterations,
        outer,
    }
}

/// What the oracle adapter learned on one query, merged into the engine's
/// trace row afterwards.
#[derive(Debug, Clone)]
struct QueryLog {
    query: Vector,
    maximizer: Option<Vector>,
    gap: Option<f64>,
    support_calls: usize,
}

fn merge(outcome: &mut FeasibilityOutcome, log: Vec<QueryLog>) {
    for (row, entry) in outcome.trace.iter_mut().zip(log) {
        row.query_direction = entry.query.as_slice().to_vec();
        row.maximizer = entry.maximizer.map(|k| k.as_slice().to_vec());
        row.gap = entry.gap;
        row.support_calls = entry.support_calls;
    }
}

/// Direction-space oracle: a center `ω` is "feasible" when `ω/|ω|` separates.
struct DirectionOracle<'a> {
    body: &'a Body,
    p: &'a Vector,
    first: Vector,
    depth: f64,
    rng: ChaCha8Rng,
    origin_recuts: usize,
    found: Option<(Vector, f64)>,
    log: Vec<QueryLog>,
}

impl DirectionOracle<'_> {
    fn perturb(&mut self, c: &Vector) -> Vector {
        loop {
            let g = Vector::from_fn(c.len(), |_, _| self.rng.sample::<f64, _>(StandardNormal));
            let g = &g - c * c.dot(&g);
            let norm = g.norm();
            if norm > 1e-6 {
                let next = c + g * (PERTURBATION / norm);
                return &next / next.norm();
            }
        }
    }
}

impl SeparationOracle for DirectionOracle<'_> {
    fn query_for(&self, center: &Vector) -> Vector {
        let norm = center.norm();
        if norm < tol::ZERO {
            center.clone()
        } else {
            center / norm
        }
    }

    fn separate(&mut self, center: &Vector) -> Result<OracleAnswer> {
        let norm = center.norm();
        if norm < tol::ZERO {
            // Repeat the first cut once to push the center off the origin.
            if self.origin_recuts > 0 {
                return Err(Error::CenterOriginFailure);
            }
            self.origin_recuts += 1;
            self.log.push(QueryLog {
                query: center.clone(),
                maximizer: None,
                gap: None,
                support_calls: 0,
            });
            return Ok(OracleAnswer::Cut(Cut::new(self.first.clone(), 0.0)?));
        }
        let mut c = center / norm;
        for attempt in 0..=MAX_PERTURBATIONS {
            let k = self.body.support(&c)?.maximizer;
            let gap = c.dot(&k) - c.dot(self.p);
            let answer = if gap < 0.0 {
                self.found = Some((c.clone(), -gap));
                Some(OracleAnswer::Member)
            } else {
                match lemma_cut(&c, self.p, &k, self.depth) {
                    Ok(cut) => Some(OracleAnswer::Cut(cut)),
                    Err(Error::DegenerateCut) if attempt < MAX_PERTURBATIONS => None,
                    Err(e) => return Err(e),
                }
            };
            if let Some(answer) = answer {
                self.log.push(QueryLog {
                    query: c,
                    maximizer: Some(k),
                    gap: Some(gap),
                    support_calls: attempt + 1,
                });
                return Ok(answer);
            }
            log::debug!("degenerate cut at {c:?}; perturbing");
            c = self.perturb(&c);
        }
        Err(Error::DegenerateCut)
    }
}

/// Analytic-center search for a separating direction.
pub fn heuristic_reduction(body: &Body, p: &Vector, delta: f64, cfg: &ReductionConfig) -> Result<SeparationVerdict> {
    let started = Instant::now();
    check_query(body, p, delta)?;
    let norm = p.norm();
    if norm < tol::ZERO {
        return Ok(origin_verdict(Mode::HeuristicReduction, delta, started));
    }
    let n = body.dimension();
    let r_min = cfg.r_min.unwrap_or_else(|| default_r_min(delta, body.outer_radius(), n));
    let first = p / norm;
    let mut problem = FeasibilityProblem::new(n, 1.0, r_min);
    problem.cut_depth = cfg.cut_depth;
    problem.max_cuts = cfg.max_cuts.unwrap_or_else(|| default_max_cuts(n));
    problem.max_iterations = cfg.max_iterations.unwrap_or_else(|| default_budget(n, 1.0, r_min));
    problem.initial_cuts = vec![Cut::new(first.clone(), cfg.cut_depth.min(0.0))?];

    let mut oracle = DirectionOracle {
        body,
        p,
        first,
        depth: cfg.cut_depth,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        origin_recuts: 0,
        found: None,
        log: Vec::new(),
    };
    let mut outcome = solve_feasibility(&problem, &mut oracle)?;
    merge(&mut outcome, oracle.log);
    let verdict = match (&outcome.verdict, oracle.found) {
        (FeasibilityVerdict::Feasible(_), Some((c, margin))) => separated(&c, margin),
        (FeasibilityVerdict::Feasible(_), None) => unreachable!("member answers record their direction"),
        (FeasibilityVerdict::DeclaredEmpty(reason), _) => Verdict::InBody {
            delta,
            reason: (*reason).into(),
        },
    };
    Ok(finish(
        Mode::HeuristicReduction,
        verdict,
        outcome.trace,
        outcome.iterations,
        Some(outcome.final_approx),
        started,
    ))
}

/// Polar-space oracle over `Q_p`. Members must also separate strictly.
struct PolarOracle<'a> {
    body: &'a Body,
    p: &'a Vector,
    found: Option<(Vector, f64)>,
    log: Vec<QueryLog>,
}

impl SeparationOracle for PolarOracle<'_> {
    fn separate(&mut self, y: &Vector) -> Result<OracleAnswer> {
        let q = ssep_qp(self.body, self.p, y)?;
        let (maximizer, value) = match &q.support {
            Some((k, v)) => (Some(k.clone()), *v),
            None => (None, 0.0),
        };
        self.log.push(QueryLog {
            query: y.clone(),
            gap: maximizer.as_ref().map(|_| value - 1.0),
            support_calls: usize::from(maximizer.is_some()),
            maximizer,
        });
        match q.answer {
            PolarAnswer::Member => {
                let margin = self.p.dot(y) - value;
                if margin > 0.0 {
                    self.found = Some((y.clone(), margin));
                    Ok(OracleAnswer::Member)
                } else {
                    // On the boundary of Q_p: push toward larger p·y.
                    Ok(OracleAnswer::Cut(Cut::new(self.p.clone(), 1.0)?))
                }
            }
            cut => Ok(OracleAnswer::Cut(cut.as_cut().expect("cut answer")?)),
        }
    }
}

/// Feasibility over `Q_p` inside the polar ball of radius `1/r0`.
pub fn standard_reduction(body: &Body, p: &Vector, delta: f64, cfg: &ReductionConfig) -> Result<SeparationVerdict> {
    let started = Instant::now();
    check_query(body, p, delta)?;
    if p.norm() < tol::ZERO {
        return Ok(origin_verdict(Mode::StandardReduction, delta, started));
    }
    let n = body.dimension();
    let radius = 1.0 / body.inner_radius();
    let r_min = cfg
        .r_min
        .unwrap_or_else(|| default_r_min_standard(delta, body.outer_radius(), n));
    let mut problem = FeasibilityProblem::new(n, radius, r_min.min(radius));
    problem.cut_depth = cfg.cut_depth;
    problem.max_cuts = cfg.max_cuts.unwrap_or_else(|| default_max_cuts(n));
    problem.max_iterations = cfg
        .max_iterations
        .unwrap_or_else(|| default_budget(n, radius, problem.r_min));

    let mut oracle = PolarOracle {
        body,
        p,
        found: None,
        log: Vec::new(),
    };
    let mut outcome = solve_feasibility(&problem, &mut oracle)?;
    merge(&mut outcome, oracle.log);
    let verdict = match (&outcome.verdict, oracle.found) {
        (FeasibilityVerdict::Feasible(_), Some((y, margin))) => separated(&y, margin),
        (FeasibilityVerdict::Feasible(_), None) => unreachable!("member answers record their point"),
        (FeasibilityVerdict::DeclaredEmpty(reason), _) => Verdict::InBody {
            delta,
            reason: (*reason).into(),
        },
    };
    Ok(finish(
        Mode::StandardReduction,
        verdict,
        outcome.trace,
        outcome.iterations,
        Some(outcome.final_approx),
        started,
    ))
}
