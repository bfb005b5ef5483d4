//! Outer approximations `P = {|x| <= radius} ∩ {x : a_i·x >= b_i}` and their
//! analytic centers.
//!
//! The center minimizes the log barrier
//!
//! ```text
//! F(x) = -Σ log(a_i·x - b_i) - log(radius² - x·x)
//! ```
//!
//! and stationarity gives `ω = (radius² - ω·ω)/2 · Σ a_i/(a_i·ω - b_i)`, so the
//! center is a nonnegative combination of the cut normals with weights
//! `λ_i = (radius² - ω·ω) / (2 (a_i·ω - b_i))`.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::{tol, ConstraintRef, Error, Matrix, Result, Vector};

pub const MAX_NEWTON_ITERATIONS: usize = 200;
const ARMIJO: f64 = 0.01;
/// Squared Newton decrement below which full steps are taken.
const QUADRATIC_REGION: f64 = 1e-2;
/// Consecutive non-improving Newton steps at the rounding floor before giving up
/// on the gradient tolerance.
const STALL_LIMIT: usize = 3;
/// Relative slack below which a warm start is moved off its tightest cut.
const TIGHT_SLACK: f64 = 1e-6;
/// Barrier parameters tried by the phase-1 search, as powers of ten.
const PHASE1_MAX_EXPONENT: i32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// Excludes the center it was classified against.
    Deep,
    /// Passes through the center.
    Central,
    /// Leaves the center strictly inside.
    Shallow,
}

/// Halfspace `{x : normal·x >= offset}` with unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    normal: Vector,
    offset: f64,
    kind: CutKind,
}

impl Cut {
    /// Normalizes `normal` and rescales `offset` to match.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let norm = normal.norm();
        if !(norm >= tol::ZERO) || !offset.is_finite() {
            return Err(Error::ZeroDirection { norm });
        }
        Ok(Cut {
            normal: normal / norm,
            offset: offset / norm,
            kind: CutKind::Central,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn kind(&self) -> CutKind {
        self.kind
    }

    pub fn slack(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn classify(&mut self, reference: &Vector) {
        let at = self.normal.dot(reference);
        let eps = 1e-12 * (1.0 + self.offset.abs());
        self.kind = if self.offset > at + eps {
            CutKind::Deep
        } else if self.offset < at - eps {
            CutKind::Shallow
        } else {
            CutKind::Central
        };
    }
}

/// Result of one centering.
#[derive(Debug, Clone, PartialEq)]
pub struct Centering {
    pub center: Vector,
    /// Conic weights `λ_i`, one per cut.
    pub conic: Vec<f64>,
    pub newton_iterations: usize,
    pub gradient_norm: f64,
    /// Whether the phase-1 search was needed to find an interior start.
    pub used_phase1: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterApprox {
    dimension: usize,
    ball_radius: f64,
    cuts: Vec<Cut>,
    pinned: usize,
    center: Option<Vector>,
    conic: Option<Vec<f64>>,
    // Last center, kept for warm starts and cut classification after the
    // center has been invalidated.
    reference: Vector,
    radius_cap: f64,
}

impl OuterApprox {
    pub fn new(dimension: usize, ball_radius: f64) -> Result<Self> {
        if dimension == 0 || !(ball_radius > 0.0 && ball_radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "outer approximation needs n >= 1 and a positive radius (n = {dimension}, radius = {ball_radius})"
            )));
        }
        Ok(OuterApprox {
            dimension,
            ball_radius,
            cuts: Vec::new(),
            pinned: 0,
            center: None,
            conic: None,
            reference: Vector::zeros(dimension),
            radius_cap: ball_radius,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    /// Number of leading cuts that [`Self::drop_least_binding`] never removes.
    pub fn pinned(&self) -> usize {
        self.pinned
    }

    /// The analytic center, if it is current.
    pub fn center(&self) -> Option<&Vector> {
        self.center.as_ref()
    }

    pub fn conic(&self) -> Option<&[f64]> {
        self.conic.as_deref()
    }

    /// Appends a cut and invalidates the center. The cut is classified
    /// against the most recent center (the origin before any centering).
    pub fn add_cut(&mut self, mut cut: Cut) -> Result<&Cut> {
        if cut.normal.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: cut.normal.len(),
            });
        }
        cut.classify(&self.reference);
        self.cuts.push(cut);
        self.center = None;
        self.conic = None;
        Ok(self.cuts.last().unwrap())
    }

    /// Adds a cut that is never dropped. Only allowed while every existing
    /// cut is pinned too.
    pub fn pin_cut(&mut self, cut: Cut) -> Result<&Cut> {
        if self.pinned != self.cuts.len() {
            return Err(Error::InvalidConfig("pinned cuts must precede all others".into()));
        }
        self.add_cut(cut)?;
        self.pinned += 1;
        Ok(self.cuts.last().unwrap())
    }

    /// `radius - |x|` and the slack of every cut; all positive iff `x` is
    /// strictly interior.
    pub fn min_slack(&self, x: &Vector) -> f64 {
        self.cuts
            .iter()
            .map(|c| c.slack(x))
            .fold(self.ball_radius - x.norm(), f64::min)
    }

    pub fn check_interior(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        if !(self.ball_radius * self.ball_radius - x.dot(x) > 0.0) {
            return Err(Error::NotInterior {
                constraint: ConstraintRef::Ball,
            });
        }
        if let Some(i) = self.cuts.iter().position(|c| !(c.slack(x) > 0.0)) {
            return Err(Error::NotInterior {
                constraint: ConstraintRef::Cut(i),
            });
        }
        Ok(())
    }

    pub fn barrier_value(&self, x: &Vector) -> Result<f64> {
        self.check_interior(x)?;
        Ok(barrier(&self.cuts, self.ball_radius, x))
    }

    pub fn barrier_gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_interior(x)?;
        Ok(gradient(&self.cuts, self.ball_radius, x))
    }

    pub fn barrier_hessian(&self, x: &Vector) -> Result<Matrix> {
        self.check_interior(x)?;
        Ok(hessian(&self.cuts, self.ball_radius, x))
    }

    /// Computes and stores the analytic center and conic weights.
    ///
    /// A warm start that is not interior is repaired by stepping along the
    /// normal of the single violated cut; failing that, a phase-1 barrier
    /// search maximizes the smallest cut slack and reports
    /// [`Error::EmptyInterior`] once that maximum is provably nonpositive.
    pub fn analytic_center(&mut self, warm_start: Option<&Vector>) -> Result<Centering> {
        let guess = warm_start.cloned().unwrap_or_else(|| Vector::zeros(self.dimension));
        if guess.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: guess.len(),
            });
        }
        let (start, used_phase1) = if let Some(x) = self.step_off_cut(&guess) {
            (x, false)
        } else if self.check_interior(&guess).is_ok() {
            (guess, false)
        } else {
            (self.phase1(&guess)?, true)
        };

        let objective = CenterBarrier { p: self };
        let run = minimize(&objective, start, tol::NEWTON, |_| false)?;
        let center = run.point;
        let q = self.ball_radius * self.ball_radius - center.dot(&center);
        let conic: Vec<f64> = self.cuts.iter().map(|c| q / (2.0 * c.slack(&center))).collect();

        let estimate = self.min_slack(&center);
        self.radius_cap = self.radius_cap.min(estimate);
        self.reference = center.clone();
        self.center = Some(center.clone());
        self.conic = Some(conic.clone());
        Ok(Centering {
            center,
            conic,
            newton_iterations: run.iterations,
            gradient_norm: run.gradient_norm,
            used_phase1,
        })
    }

    /// `‖ω - Σ λ_i a_i‖` at the stored center.
    pub fn conic_residual(&self) -> Option<f64> {
        let (center, conic) = (self.center.as_ref()?, self.conic.as_ref()?);
        let combo = self
            .cuts
            .iter()
            .zip(conic)
            .fold(Vector::zeros(self.dimension), |acc, (c, l)| acc + &c.normal * *l);
        Some((center - combo).norm())
    }

    /// Removes unpinned cuts with the smallest conic weight until at most
    /// `max_cuts` remain, recentering after each removal. Returns the dropped
    /// cuts in removal order.
    ///
    /// The most recent cut is kept while anything else can go; dropping it
    /// would restore the previous center and the caller would loop.
    pub fn drop_least_binding(&mut self, max_cuts: usize) -> Result<Vec<Cut>> {
        if self.cuts.len() <= max_cuts {
            return Ok(Vec::new());
        }
        let droppable = self.cuts.len() - self.pinned;
        if self.cuts.len() <= 1 || droppable == 0 {
            return Err(Error::CannotDrop(droppable));
        }
        let mut dropped = Vec::new();
        while self.cuts.len() > max_cuts {
            let (Some(center), Some(conic)) = (self.center.clone(), self.conic.as_ref()) else {
                return Err(Error::InvalidConfig("drop requires a computed center".into()));
            };
            let end = if self.cuts.len() - self.pinned > 1 {
                self.cuts.len() - 1
            } else {
                self.cuts.len()
            };
            let Some(index) = (self.pinned..end)
                .min_by(|&a, &b| conic[a].total_cmp(&conic[b]).then(a.cmp(&b)))
            else {
                return Err(Error::CannotDrop(0));
            };
            dropped.push(self.cuts.remove(index));
            self.center = None;
            self.conic = None;
            // Removing a constraint only enlarges P: the old center stays
            // interior.
            self.analytic_center(Some(&center))?;
        }
        Ok(dropped)
    }

    /// Lower bound on the radius of the largest ball inside `P`: the smallest
    /// slack of the current center (every such ball around ω fits), capped by
    /// all earlier estimates so that adding cuts never increases it. The true
    /// inradius is at most `sqrt(n) * (h + 1)` times this value in practice;
    /// only stopping rules rely on it.
    pub fn inscribed_radius_estimate(&self) -> Result<f64> {
        let center = self
            .center
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("inscribed radius requires a computed center".into()))?;
        Ok(self.min_slack(center).min(self.radius_cap).max(0.0))
    }

    /// Documented slack-to-inradius factor `sqrt(n) * (h + 1)`.
    pub fn inradius_factor(&self) -> f64 {
        (self.dimension as f64).sqrt() * (self.cuts.len() + 1) as f64
    }

    /// Moves `w` off the cut with the smallest slack when that cut is violated
    /// or nearly tight (a start on a cut makes the Hessian singular) and every
    /// other constraint has room.
    fn step_off_cut(&self, w: &Vector) -> Option<Vector> {
        let ball = self.ball_radius - w.norm();
        let (i, tight) = self
            .cuts
            .iter()
            .map(|c| c.slack(w))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        let others = self
            .cuts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.slack(w))
            .fold(ball, f64::min);
        if !(others > 0.0) || tight > TIGHT_SLACK * others {
            return None;
        }
        let x = w + &self.cuts[i].normal * (-tight + 0.5 * others);
        self.check_interior(&x).ok().map(|_| x)
    }

    fn phase1(&self, guess: &Vector) -> Result<Vector> {
        let n = self.dimension;
        let mut x0 = guess.clone();
        let norm = x0.norm();
        if !(norm < self.ball_radius) {
            x0 *= 0.5 * self.ball_radius / norm.max(f64::MIN_POSITIVE);
        }
        if self.cuts.is_empty() {
            return Ok(x0);
        }
        let worst = self.cuts.iter().map(|c| c.slack(&x0)).fold(f64::INFINITY, f64::min);
        let mut z = Vector::zeros(n + 1);
        z.rows_mut(0, n).copy_from(&x0);
        z[n] = worst - 1.0;
        let nu = (self.cuts.len() + 1) as f64;
        for exponent in 0..=PHASE1_MAX_EXPONENT {
            let weight = 10f64.powi(exponent);
            let objective = Phase1Barrier { p: self, weight };
            let run = minimize(&objective, z, 1e-9, |z| {
                let x = z.rows(0, n).into_owned();
                self.check_interior(&x).is_ok() && self.min_slack(&x) > 0.0
            })?;
            z = run.point;
            let x = z.rows(0, n).into_owned();
            if self.check_interior(&x).is_ok() {
                return Ok(x);
            }
            if z[n] + nu / weight <= 0.0 {
                return Err(Error::EmptyInterior);
            }
        }
        Err(Error::EmptyInterior)
    }
}

fn barrier(cuts: &[Cut], radius: f64, x: &Vector) -> f64 {
    let q = radius * radius - x.dot(x);
    -cuts.iter().map(|c| c.slack(x).ln()).sum::<f64>() - q.ln()
}

fn gradient(cuts: &[Cut], radius: f64, x: &Vector) -> Vector {
    let q = radius * radius - x.dot(x);
    cuts.iter()
        .fold(x * (2.0 / q), |acc, c| acc - &c.normal / c.slack(x))
}

fn hessian(cuts: &[Cut], radius: f64, x: &Vector) -> Matrix {
    let n = x.len();
    let q = radius * radius - x.dot(x);
    let mut h = Matrix::identity(n, n) * (2.0 / q) + (x * x.transpose()) * (4.0 / (q * q));
    for c in cuts {
        let s = c.slack(x);
        h.ger(1.0 / (s * s), &c.normal, &c.normal, 1.0);
    }
    h
}

trait Objective {
    fn value(&self, z: &Vector) -> Option<f64>;
    fn gradient(&self, z: &Vector) -> Vector;
    fn hessian(&self, z: &Vector) -> Matrix;
}

struct CenterBarrier<'a> {
    p: &'a OuterApprox,
}

impl Objective for CenterBarrier<'_> {
    fn value(&self, x: &Vector) -> Option<f64> {
        self.p.check_interior(x).ok()?;
        Some(barrier(&self.p.cuts, self.p.ball_radius, x))
    }

    fn gradient(&self, x: &Vector) -> Vector {
        gradient(&self.p.cuts, self.p.ball_radius, x)
    }

    fn hessian(&self, x: &Vector) -> Matrix {
        hessian(&self.p.cuts, self.p.ball_radius, x)
    }
}

/// `-weight·t - Σ log(a_i·x - b_i - t) - log(radius² - x·x)` over `z = (x, t)`.
struct Phase1Barrier<'a> {
    p: &'a OuterApprox,
    weight: f64,
}

impl Phase1Barrier<'_> {
    fn split(&self, z: &Vector) -> (Vector, f64) {
        let n = self.p.dimension;
        (z.rows(0, n).into_owned(), z[n])
    }
}

impl Objective for Phase1Barrier<'_> {
    fn value(&self, z: &Vector) -> Option<f64> {
        let (x, t) = self.split(z);
        let q = self.p.ball_radius * self.p.ball_radius - x.dot(&x);
        if !(q > 0.0) {
            return None;
        }
        let mut v = -self.weight * t - q.ln();
        for c in &self.p.cuts {
            let u = c.slack(&x) - t;
            if !(u > 0.0) {
                return None;
            }
            v -= u.ln();
        }
        Some(v)
    }

    fn gradient(&self, z: &Vector) -> Vector {
        let n = self.p.dimension;
        let (x, t) = self.split(z);
        let q = self.p.ball_radius * self.p.ball_radius - x.dot(&x);
        let mut g = Vector::zeros(n + 1);
        g.rows_mut(0, n).copy_from(&(&x * (2.0 / q)));
        g[n] = -self.weight;
        for c in &self.p.cuts {
            let u = c.slack(&x) - t;
            let mut gx = g.rows_mut(0, n);
            gx -= &c.normal / u;
            g[n] += 1.0 / u;
        }
        g
    }

    fn hessian(&self, z: &Vector) -> Matrix {
        let n = self.p.dimension;
        let (x, t) = self.split(z);
        let q = self.p.ball_radius * self.p.ball_radius - x.dot(&x);
        let mut h = Matrix::zeros(n + 1, n + 1);
        let hxx = Matrix::identity(n, n) * (2.0 / q) + (&x * x.transpose()) * (4.0 / (q * q));
        h.view_mut((0, 0), (n, n)).copy_from(&hxx);
        for c in &self.p.cuts {
            let u = c.slack(&x) - t;
            let mut row = Vector::zeros(n + 1);
            row.rows_mut(0, n).copy_from(&c.normal);
            row[n] = -1.0;
            h.ger(1.0 / (u * u), &row, &row, 1.0);
        }
        h
    }
}

struct NewtonRun {
    point: Vector,
    iterations: usize,
    gradient_norm: f64,
}

/// Damped Newton with Armijo backtracking. Stops on the gradient tolerance,
/// when `done` accepts an iterate, or at the numerical floor where the Newton
/// decrement vanishes.
fn minimize(
    objective: &impl Objective,
    start: Vector,
    gradient_tol: f64,
    done: impl Fn(&Vector) -> bool,
) -> Result<NewtonRun> {
    let mut z = start;
    let mut value = objective
        .value(&z)
        .ok_or(Error::Oracle("Newton started outside the domain".into()))?;
    let mut best_gradient = f64::INFINITY;
    let mut stalled = 0;
    for iteration in 0..MAX_NEWTON_ITERATIONS {
        let g = objective.gradient(&z);
        let gnorm = g.norm();
        if gnorm <= gradient_tol || done(&z) {
            return Ok(NewtonRun {
                point: z,
                iterations: iteration,
                gradient_norm: gnorm,
            });
        }
        let h = objective.hessian(&z);
        let chol = Cholesky::new(h).ok_or(Error::NoConvergence(iteration))?;
        let step = -chol.solve(&g);
        let slope = g.dot(&step);
        let decrement = -slope;
        let at_floor = |d: f64| d <= 1e-14 * (1.0 + value.abs());
        // In very thin regions rounding keeps the gradient above tolerance
        // even though the steps no longer change the objective; Newton steps
        // that stop shrinking the gradient there mark the numerical floor.
        if decrement <= 1e-18 * (1.0 + value.abs()) && gnorm > 0.5 * best_gradient {
            stalled += 1;
        } else {
            stalled = 0;
        }
        best_gradient = best_gradient.min(gnorm);
        if decrement <= 1e-24 * (1.0 + value.abs()) || stalled >= STALL_LIMIT {
            return Ok(NewtonRun {
                point: z,
                iterations: iteration,
                gradient_norm: gnorm,
            });
        }

        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            let candidate = &z + &step * t;
            if let Some(v) = objective.value(&candidate) {
                // Inside the quadratic-convergence region the full step is
                // taken; the Armijo test there only measures rounding noise.
                if decrement < QUADRATIC_REGION || v <= value + ARMIJO * t * slope {
                    accepted = Some((candidate, v));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((candidate, v)) => {
                z = candidate;
                value = v;
            }
            None if at_floor(decrement) => {
                return Ok(NewtonRun {
                    point: z,
                    iterations: iteration,
                    gradient_norm: gnorm,
                });
            }
            None => return Err(Error::NoConvergence(iteration)),
        }
    }
    Err(Error::NoConvergence(MAX_NEWTON_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cut(a: &[f64], b: f64) -> Cut {
        Cut::new(vector(a), b).unwrap()
    }

    fn disc_with(cuts: &[(&[f64], f64)]) -> OuterApprox {
        let mut p = OuterApprox::new(cuts.first().map(|c| c.0.len()).unwrap_or(2), 1.0).unwrap();
        for (a, b) in cuts {
            p.add_cut(cut(a, *b)).unwrap();
        }
        p
    }

    #[test]
    fn barrier_examples() {
        let ball = OuterApprox::new(2, 1.0).unwrap();
        assert_eq!(ball.barrier_value(&Vector::zeros(2)).unwrap(), 0.0);
        let half = disc_with(&[(&[1.0, 0.0], 0.0)]);
        let expected = -(0.5f64).ln() - (0.75f64).ln();
        assert!((half.barrier_value(&vector(&[0.5, 0.0])).unwrap() - expected).abs() < 1e-15);
        assert_eq!(
            ball.barrier_value(&vector(&[1.0, 0.0])),
            Err(Error::NotInterior {
                constraint: ConstraintRef::Ball
            })
        );
        assert_eq!(
            half.barrier_value(&vector(&[-0.1, 0.0])),
            Err(Error::NotInterior {
                constraint: ConstraintRef::Cut(0)
            })
        );
    }

    #[test]
    fn center_of_bare_ball_is_origin() {
        for n in [1, 2, 5] {
            let mut p = OuterApprox::new(n, 1.0).unwrap();
            let c = p.analytic_center(Some(&Vector::from_element(n, 0.3 / n as f64))).unwrap();
            assert!(c.center.norm() <= 1e-8);
            assert!(c.conic.is_empty());
        }
    }

    #[test]
    fn center_with_one_halfspace() {
        let mut p = disc_with(&[(&[1.0, 0.0], 0.0)]);
        let c = p.analytic_center(None).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert!((c.center - vector(&[t, 0.0])).norm() <= 1e-9);
        assert!((c.conic[0] - t).abs() <= 1e-9);
        let est = p.inscribed_radius_estimate().unwrap();
        assert!((est - (1.0 - t)).abs() <= 1e-9);
    }

    #[test]
    fn center_with_two_orthogonal_halfspaces() {
        let mut p = disc_with(&[(&[1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0)]);
        let c = p.analytic_center(None).unwrap();
        assert!((c.center - vector(&[0.5, 0.5])).norm() <= 1e-9);
    }

    #[test]
    fn inconsistent_cuts_have_empty_interior() {
        let mut p = disc_with(&[(&[1.0, 0.0], 0.0)]);
        p.analytic_center(None).unwrap();
        p.add_cut(cut(&[-1.0, 0.0], 0.5)).unwrap();
        let warm = p.reference.clone();
        assert_eq!(p.analytic_center(Some(&warm)), Err(Error::EmptyInterior));
    }

    #[test]
    fn touching_cuts_have_empty_interior() {
        let mut p = disc_with(&[(&[1.0, 0.0], 0.0), (&[-1.0, 0.0], 0.0)]);
        assert_eq!(p.analytic_center(None), Err(Error::EmptyInterior));
    }

    #[test]
    fn cut_normals_are_normalized() {
        let c = cut(&[2.0, 0.0], 1.0);
        assert_eq!(c.normal(), &vector(&[1.0, 0.0]));
        assert_eq!(c.offset(), 0.5);
        assert!(Cut::new(vector(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn cut_kinds_follow_the_center() {
        let mut p = OuterApprox::new(2, 1.0).unwrap();
        p.analytic_center(None).unwrap();
        assert_eq!(p.add_cut(cut(&[1.0, 0.0], 0.0)).unwrap().kind(), CutKind::Central);
        assert_eq!(p.add_cut(cut(&[0.0, 1.0], 0.1)).unwrap().kind(), CutKind::Deep);
        assert_eq!(p.add_cut(cut(&[0.0, 1.0], -0.1)).unwrap().kind(), CutKind::Shallow);
        assert!(p.center().is_none());
    }

    #[test]
    fn warm_start_on_central_cut_is_repaired_without_phase1() {
        let mut p = disc_with(&[(&[1.0, 0.0], 0.0)]);
        let first = p.analytic_center(None).unwrap();
        let normal = vector(&[0.0, 1.0]);
        let offset = normal.dot(&first.center);
        p.add_cut(Cut::new(normal, offset).unwrap()).unwrap();
        let second = p.analytic_center(Some(&first.center)).unwrap();
        assert!(!second.used_phase1);
        assert!(p.conic_residual().unwrap() <= 1e-7);
    }

    #[test]
    fn drop_removes_the_slack_cut() {
        let b = -0.05;
        let mut p = OuterApprox::new(2, 1.0).unwrap();
        p.add_cut(cut(&[1.0, 1.0], -0.9 * 2f64.sqrt())).unwrap();
        for a in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            p.add_cut(cut(&a, b)).unwrap();
        }
        let c = p.analytic_center(None).unwrap();
        let far = p.cuts[0].slack(&c.center);
        assert!(p.cuts[1..].iter().all(|k| far >= 10.0 * k.slack(&c.center)));
        let dropped = p.drop_least_binding(4).unwrap();
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].normal(), cut(&[1.0, 1.0], 0.0).normal());
        assert_eq!(p.cuts().len(), 4);
        assert!(p.center().is_some());
    }

    #[test]
    fn newest_cut_is_kept() {
        let mut p = OuterApprox::new(2, 1.0).unwrap();
        for a in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            p.add_cut(cut(&a, -0.05)).unwrap();
        }
        // Loosest of all, but just added.
        p.add_cut(cut(&[1.0, 1.0], -0.9 * 2f64.sqrt())).unwrap();
        p.analytic_center(None).unwrap();
        let dropped = p.drop_least_binding(4).unwrap();
        assert_eq!(dropped.len(), 1);
        assert_eq!(p.cuts().last().unwrap().normal(), cut(&[1.0, 1.0], 0.0).normal());
    }

    #[test]
    fn drop_is_noop_under_the_cap_and_refuses_single_cut() {
        let mut p = disc_with(&[(&[1.0, 0.0], -0.1), (&[0.0, 1.0], -0.1), (&[-1.0, -1.0], -0.1)]);
        p.analytic_center(None).unwrap();
        assert!(p.drop_least_binding(8).unwrap().is_empty());
        let mut single = disc_with(&[(&[1.0, 0.0], 0.0)]);
        single.analytic_center(None).unwrap();
        assert_eq!(single.drop_least_binding(0), Err(Error::CannotDrop(1)));
    }

    #[test]
    fn pinned_cut_survives_dropping() {
        let mut p = OuterApprox::new(2, 1.0).unwrap();
        p.pin_cut(cut(&[1.0, 1.0], -0.99)).unwrap();
        p.add_cut(cut(&[1.0, 0.0], -0.05)).unwrap();
        p.add_cut(cut(&[-1.0, 0.0], -0.05)).unwrap();
        p.analytic_center(None).unwrap();
        p.drop_least_binding(2).unwrap();
        assert_eq!(p.cuts()[0].offset(), cut(&[1.0, 1.0], -0.99).offset());
        assert!(p.pin_cut(cut(&[0.0, 1.0], 0.0)).is_err());
    }

    fn random_p(rng: &mut ChaCha8Rng, n: usize, h: usize) -> OuterApprox {
        let mut p = OuterApprox::new(n, 1.0).unwrap();
        for _ in 0..h {
            let a = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            // Keep a small ball around a fixed interior point feasible.
            let x0 = Vector::from_element(n, 0.1);
            let mut c = Cut::new(a, 0.0).unwrap();
            c.offset = c.normal.dot(&x0) - rng.random_range(0.02..0.5);
            p.add_cut(c).unwrap();
        }
        p
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 100 {
            let n = rng.random_range(2..6);
            let h = rng.random_range(0..8);
            let p = random_p(&mut rng, n, h);
            let x = Vector::from_element(n, 0.1) + Vector::from_fn(n, |_, _| rng.random_range(-0.01..0.01));
            if p.check_interior(&x).is_err() {
                continue;
            }
            let g = p.barrier_gradient(&x).unwrap();
            let eps = 1e-6;
            for i in 0..n {
                let mut e = Vector::zeros(n);
                e[i] = eps;
                let fd = (p.barrier_value(&(&x + &e)).unwrap() - p.barrier_value(&(&x - &e)).unwrap()) / (2.0 * eps);
                assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
            }
            assert!(Cholesky::new(p.barrier_hessian(&x).unwrap()).is_some());
            checked += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conic_certificate_holds(seed in 0u64..10_000, n in 2usize..6, h in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = random_p(&mut rng, n, h);
            let c = p.analytic_center(None).unwrap();
            prop_assert!(c.conic.iter().all(|&l| l >= -1e-9));
            prop_assert!(p.conic_residual().unwrap() <= 1e-7 * (1.0 + c.center.norm()));
            prop_assert!(c.gradient_norm <= tol::NEWTON);
        }

        #[test]
        fn estimate_never_grows_when_cutting(seed in 0u64..10_000, n in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = OuterApprox::new(n, 1.0).unwrap();
            let mut last = f64::INFINITY;
            let mut warm = p.analytic_center(None).unwrap().center;
            for _ in 0..12 {
                let est = p.inscribed_radius_estimate().unwrap();
                prop_assert!(est <= last);
                last = est;
                let a = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let mut c = Cut::new(a, 0.0).unwrap();
                c.offset = c.normal.dot(&warm) - rng.random_range(0.0..0.2) * est;
                p.add_cut(c).unwrap();
                match p.analytic_center(Some(&warm)) {
                    Ok(c) => warm = c.center,
                    Err(Error::EmptyInterior) => break,
                    Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
                }
            }
        }

        #[test]
        fn centering_is_deterministic(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_p(&mut rng, 3, 5);
            let a = p.clone().analytic_center(None).unwrap();
            let b = p.clone().analytic_center(None).unwrap();
            prop_assert_eq!(a.center, b.center);
        }
    }
}
