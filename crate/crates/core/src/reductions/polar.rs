//! Separation over the polar `K* = {y : y·x <= 1 for all x in K}` and over
//! `Q_p = K* ∩ {y : p·y >= 1}`, each from at most one support query.

use crate::analytic_center::Cut;
use crate::bodies::Body;
use crate::{tol, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum PolarAnswer {
    Member,
    /// The target lies in `{q : raw·q <= rhs}` and the queried point violates
    /// it.
    Cut { raw: Vector, rhs: f64 },
}

impl PolarAnswer {
    /// Unit normal of the `<=` halfspace.
    pub fn normal(&self) -> Option<Vector> {
        match self {
            PolarAnswer::Member => None,
            PolarAnswer::Cut { raw, .. } => Some(raw / raw.norm()),
        }
    }

    /// The halfspace in the engine's `>=` orientation.
    pub fn as_cut(&self) -> Option<Result<Cut>> {
        match self {
            PolarAnswer::Member => None,
            PolarAnswer::Cut { raw, rhs } => Some(Cut::new(-raw, -rhs)),
        }
    }
}

/// Answer together with the support query that produced it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarQuery {
    pub answer: PolarAnswer,
    /// `(maximizer, y·maximizer)`.
    pub support: Option<(Vector, f64)>,
}

/// `y in K*` iff `h_K(y) <= 1`; otherwise the maximizer `k` gives
/// `k·q <= 1 < k·y` for every `q` in `K*`.
pub fn ssep_polar(body: &Body, y: &Vector) -> Result<PolarQuery> {
    if y.norm() < tol::ZERO {
        return Ok(PolarQuery {
            answer: PolarAnswer::Member,
            support: None,
        });
    }
    let s = body.support(y)?;
    let answer = if s.value <= 1.0 + tol::POLAR {
        PolarAnswer::Member
    } else {
        PolarAnswer::Cut {
            raw: s.maximizer.clone(),
            rhs: 1.0,
        }
    };
    Ok(PolarQuery {
        answer,
        support: Some((s.maximizer, s.value)),
    })
}

/// Separation over `Q_p`: the halfspace `p·y >= 1` is checked first (as the
/// cut `-p·q <= -1`), then polar membership.
pub fn ssep_qp(body: &Body, p: &Vector, y: &Vector) -> Result<PolarQuery> {
    if p.dot(y) < 1.0 {
        return Ok(PolarQuery {
            answer: PolarAnswer::Cut { raw: -p, rhs: -1.0 },
            support: None,
        });
    }
    ssep_polar(body, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::fixtures::kite_polytope;
    use crate::vector;

    #[test]
    fn polar_vertex_is_member() {
        let q = ssep_polar(&kite_polytope(), &vector(&[3.0, 1.0])).unwrap();
        assert_eq!(q.answer, PolarAnswer::Member);
    }

    #[test]
    fn outside_polar_cut_by_maximizer() {
        let q = ssep_polar(&kite_polytope(), &vector(&[0.0, 2.0])).unwrap();
        assert_eq!(
            q.answer,
            PolarAnswer::Cut {
                raw: vector(&[0.0, 1.0]),
                rhs: 1.0
            }
        );
        let cut = q.answer.as_cut().unwrap().unwrap();
        assert!(cut.slack(&vector(&[0.0, 2.0])) < 0.0);
        // Polar vertices satisfy the cut.
        for v in [[0.0, 1.0], [-1.0, 0.0], [-1.0, -1.0], [3.0, 1.0]] {
            assert!(cut.slack(&vector(&v)) >= -1e-12);
        }
    }

    #[test]
    fn origin_is_in_polar() {
        let q = ssep_polar(&kite_polytope(), &vector(&[0.0, 0.0])).unwrap();
        assert_eq!(q.answer, PolarAnswer::Member);
        assert!(q.support.is_none());
    }

    #[test]
    fn qp_checks_halfspace_first() {
        let p = vector(&[-7.0 / 8.0, -3.0 / 4.0]);
        for y in [[0.0, 0.0], [0.0, 2.0]] {
            let q = ssep_qp(&kite_polytope(), &p, &vector(&y)).unwrap();
            let n = q.answer.normal().unwrap();
            assert!((n + &p / p.norm()).norm() < 1e-15);
            assert!(q.support.is_none());
        }
    }

    #[test]
    fn qp_member_from_scaled_separator() {
        // c = p/|p| separates; scale so that h_K(y) = 1.
        let body = kite_polytope();
        let p = vector(&[-7.0 / 8.0, -3.0 / 4.0]);
        let c = &p / p.norm();
        let y = &c / body.support(&c).unwrap().value;
        assert!(p.dot(&y) >= 1.0);
        assert_eq!(ssep_qp(&body, &p, &y).unwrap().answer, PolarAnswer::Member);
    }
}
