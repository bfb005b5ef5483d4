//! Convex bodies described by their support oracles.
//!
//! Every body contains a ball of radius `inner_radius` around the origin and
//! lies in the ball of radius `outer_radius`. The support oracle is the only
//! access the reductions get; [`distance_to_body`] and [`facets`] are ground
//! truth for tests and the comparison harness.

mod distance;
mod facets;
mod random;

pub use distance::{distance_to_body, Distance};
pub use facets::{depth, facets, Facet};
pub use random::{random_instance, Placement};

use crate::{tol, Error, Matrix, Result, Vector};

/// Geometry of a body, without its radius bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Convex hull of finitely many points.
    VertexPolytope { vertices: Vec<Vector> },
    /// Euclidean ball.
    Ball { center: Vector, radius: f64 },
    /// `{ matrix * x + shift : x in base }`.
    AffineImage {
        base: Box<Shape>,
        matrix: Matrix,
        shift: Vector,
    },
}

/// A full-dimensional convex body together with its radius bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    dimension: usize,
    shape: Shape,
    outer_radius: f64,
    inner_radius: f64,
}

/// Maximizer of a linear functional over a body.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    pub maximizer: Vector,
    pub value: f64,
}

/// Answer of the polar membership test `y in K*`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarMembership {
    Inside,
    /// `separator` is a point of `K` with `separator·y > 1`; it satisfies
    /// `separator·q <= 1` for every `q` in the polar.
    Outside { separator: Vector, value: f64 },
}

impl Body {
    pub fn new(shape: Shape, outer_radius: f64, inner_radius: f64) -> Result<Self> {
        let dimension = shape_dimension(&shape)?;
        let body = Body {
            dimension,
            shape,
            outer_radius,
            inner_radius,
        };
        body.validate()?;
        Ok(body)
    }

    pub fn vertex_polytope(vertices: Vec<Vector>, outer_radius: f64, inner_radius: f64) -> Result<Self> {
        Self::new(Shape::VertexPolytope { vertices }, outer_radius, inner_radius)
    }

    /// Ball centered at `center`; radius bounds are derived when the origin is
    /// interior.
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let c = center.norm();
        Self::new(Shape::Ball { center, radius }, c + radius, radius - c)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// Linear optimization over the body: returns `argmax c·x` and its value.
    /// Vertex ties go to the lowest index.
    pub fn support(&self, c: &Vector) -> Result<SupportResult> {
        if c.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: c.len(),
            });
        }
        let norm = c.norm();
        if !(norm >= tol::ZERO) {
            return Err(Error::ZeroDirection { norm });
        }
        shape_support(&self.shape, c)
    }

    /// Polar membership via one support query.
    pub fn polar_membership(&self, y: &Vector) -> Result<PolarMembership> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: y.len(),
            });
        }
        if y.norm() < tol::ZERO {
            return Ok(PolarMembership::Inside);
        }
        let s = self.support(y)?;
        if s.value <= 1.0 + tol::POLAR {
            Ok(PolarMembership::Inside)
        } else {
            Ok(PolarMembership::Outside {
                separator: s.maximizer,
                value: s.value,
            })
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.dimension;
        let (r, r0) = (self.outer_radius, self.inner_radius);
        if !(r.is_finite() && r0.is_finite() && r0 > 0.0 && r0 <= r) {
            return Err(Error::MalformedBody(format!(
                "radii must satisfy 0 < inner ({r0}) <= outer ({r})"
            )));
        }
        validate_shape(&self.shape, n, r)?;
        // The origin ball must fit along every coordinate direction, and the
        // body must stay inside the outer ball along them.
        let slack = 1e-9 * (1.0 + r);
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut e = Vector::zeros(n);
                e[i] = sign;
                let h = shape_support(&self.shape, &e)?.value;
                if h < r0 - slack {
                    return Err(Error::MalformedBody(format!(
                        "inner radius {r0} exceeds support {h} along {}e{}",
                        if sign > 0.0 { "+" } else { "-" },
                        i + 1
                    )));
                }
                if h > r + slack {
                    return Err(Error::MalformedBody(format!(
                        "support {h} exceeds outer radius {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`Body::support`].
pub fn support(body: &Body, c: &Vector) -> Result<SupportResult> {
    body.support(c)
}

/// Free-function form of [`Body::polar_membership`].
pub fn polar_membership(body: &Body, c: &Vector) -> Result<PolarMembership> {
    body.polar_membership(c)
}

fn shape_dimension(shape: &Shape) -> Result<usize> {
    match shape {
        Shape::VertexPolytope { vertices } => vertices
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::MalformedBody("vertex list is empty".into())),
        Shape::Ball { center, .. } => Ok(center.len()),
        Shape::AffineImage { shift, .. } => Ok(shift.len()),
    }
}

fn validate_shape(shape: &Shape, n: usize, outer: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::MalformedBody("dimension must be positive".into()));
    }
    let finite = |v: &Vector| v.iter().all(|x| x.is_finite());
    match shape {
        Shape::VertexPolytope { vertices } => {
            if vertices.is_empty() {
                return Err(Error::MalformedBody("vertex list is empty".into()));
            }
            for (i, v) in vertices.iter().enumerate() {
                if v.len() != n {
                    return Err(Error::MalformedBody(format!(
                        "vertex {i} has length {}, expected {n}",
                        v.len()
                    )));
                }
                if !finite(v) {
                    return Err(Error::MalformedBody(format!("vertex {i} is not finite")));
                }
                if v.norm() > outer * (1.0 + 1e-12) {
                    return Err(Error::MalformedBody(format!(
                        "vertex {i} has norm {} beyond outer radius {outer}",
                        v.norm()
                    )));
                }
            }
        }
        Shape::Ball { center, radius } => {
            if center.len() != n || !finite(center) {
                return Err(Error::MalformedBody("bad ball center".into()));
            }
            if !(*radius > 0.0 && radius.is_finite()) {
                return Err(Error::MalformedBody(format!("ball radius {radius} not positive")));
            }
        }
        Shape::AffineImage { base, matrix, shift } => {
            if matrix.nrows() != n || matrix.ncols() != n || shift.len() != n {
                return Err(Error::MalformedBody("affine map must be n x n".into()));
            }
            if !matrix.iter().all(|x| x.is_finite()) || !finite(shift) {
                return Err(Error::MalformedBody("affine map is not finite".into()));
            }
            if shape_dimension(base)? != n {
                return Err(Error::MalformedBody("affine base has wrong dimension".into()));
            }
            validate_shape(base, n, f64::INFINITY)?;
        }
    }
    Ok(())
}

fn shape_support(shape: &Shape, c: &Vector) -> Result<SupportResult> {
    match shape {
        Shape::VertexPolytope { vertices } => {
            let mut best = 0;
            let mut best_value = vertices[0].dot(c);
            for (i, v) in vertices.iter().enumerate().skip(1) {
                let value = v.dot(c);
                if value > best_value {
                    best = i;
                    best_value = value;
                }
            }
            Ok(SupportResult {
                maximizer: vertices[best].clone(),
                value: best_value,
            })
        }
        Shape::Ball { center, radius } => {
            let norm = c.norm();
            let maximizer = center + c * (*radius / norm);
            Ok(SupportResult {
                value: c.dot(center) + radius * norm,
                maximizer,
            })
        }
        Shape::AffineImage { base, matrix, shift } => {
            let pulled = matrix.tr_mul(c);
            let norm = pulled.norm();
            if norm < tol::ZERO {
                return Err(Error::ZeroDirection { norm });
            }
            let inner = shape_support(base, &pulled)?;
            let maximizer = matrix * &inner.maximizer + shift;
            Ok(SupportResult {
                value: inner.value + c.dot(shift),
                maximizer,
            })
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::vector;
    use proptest::prelude::*;

    #[test]
    fn ball_support_scales_unit_direction() {
        let s = unit_disc().support(&vector(&[3.0, 4.0])).unwrap();
        assert!((s.maximizer - vector(&[0.6, 0.8])).norm() < 1e-15);
        assert!((s.value - 5.0).abs() < 1e-15);
    }

    #[test]
    fn polytope_support_scans_vertices() {
        let k = kite_polytope();
        let s = k.support(&vector(&[-7.0 / 8.0, -3.0 / 4.0])).unwrap();
        assert_eq!(s.maximizer, vector(&[-1.0, 0.0]));
        assert_eq!(s.value, 7.0 / 8.0);
    }

    #[test]
    fn polytope_support_breaks_ties_by_index() {
        let s = kite_polytope().support(&vector(&[0.0, 1.0])).unwrap();
        assert_eq!(s.maximizer, vector(&[0.0, 1.0]));
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn support_rejects_zero_and_wrong_length() {
        let k = kite_polytope();
        assert!(matches!(k.support(&vector(&[0.0, 0.0])), Err(Error::ZeroDirection { .. })));
        assert!(matches!(
            k.support(&vector(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn polar_membership_examples() {
        let k = kite_polytope();
        assert_eq!(k.polar_membership(&vector(&[3.0, 1.0])).unwrap(), PolarMembership::Inside);
        assert_eq!(k.polar_membership(&vector(&[0.0, 0.0])).unwrap(), PolarMembership::Inside);
        match k.polar_membership(&vector(&[0.0, 2.0])).unwrap() {
            PolarMembership::Outside { separator, value } => {
                assert_eq!(separator, vector(&[0.0, 1.0]));
                assert_eq!(value, 2.0);
            }
            other => panic!("expected Outside, got {other:?}"),
        }
    }

    #[test]
    fn polar_vertices_have_unit_support() {
        let k = kite_polytope();
        let polar = [[0.0, 1.0], [-1.0, 0.0], [-1.0, -1.0], [3.0, 1.0]];
        for y in polar {
            let v = k.support(&vector(&y)).unwrap().value;
            assert!((v - 1.0).abs() <= 1e-12, "{y:?}: {v}");
        }
        // And the other way round: K's vertices have support 1 over K*.
        let polar_body = Body::vertex_polytope(
            polar.iter().map(|y| vector(y)).collect(),
            10f64.sqrt(),
            1.0 / 5f64.sqrt(),
        )
        .unwrap();
        for x in [[0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0], [1.0, -2.0]] {
            let v = polar_body.support(&vector(&x)).unwrap().value;
            assert!((v - 1.0).abs() <= 1e-12, "{x:?}: {v}");
        }
    }

    #[test]
    fn affine_image_composes_oracles() {
        let stretch = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let body = Body::new(
            Shape::AffineImage {
                base: Box::new(Shape::Ball {
                    center: Vector::zeros(2),
                    radius: 1.0,
                }),
                matrix: stretch,
                shift: vector(&[0.1, 0.0]),
            },
            2.1,
            0.4,
        )
        .unwrap();
        let s = body.support(&vector(&[1.0, 0.0])).unwrap();
        assert!((s.value - 2.1).abs() < 1e-14);
        assert!((s.maximizer - vector(&[2.1, 0.0])).norm() < 1e-14);
        let s = body.support(&vector(&[0.0, 1.0])).unwrap();
        assert!((s.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn malformed_bodies_rejected() {
        assert!(Body::vertex_polytope(vec![], 1.0, 0.5).is_err());
        let ragged = vec![vector(&[1.0, 0.0]), vector(&[1.0])];
        assert!(Body::vertex_polytope(ragged, 2.0, 0.1).is_err());
        // origin not interior
        let tri = vec![vector(&[1.0, 0.0]), vector(&[2.0, 0.0]), vector(&[1.0, 1.0])];
        assert!(Body::vertex_polytope(tri, 3.0, 0.1).is_err());
        // inner radius larger than outer
        assert!(Body::new(
            Shape::Ball {
                center: Vector::zeros(2),
                radius: 1.0
            },
            1.0,
            2.0
        )
        .is_err());
    }

    fn random_polytope() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
        (2usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(-2.0..2.0f64, n), n + 1..2 * n + 4),
                prop::collection::vec(-1.0..1.0f64, n),
                prop::collection::vec(0.0..1.0f64, 2 * n + 4),
            )
        })
    }

    fn unchecked(vertices: Vec<Vector>) -> Body {
        let r = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Body {
            dimension: vertices[0].len(),
            shape: Shape::VertexPolytope { vertices },
            outer_radius: r,
            inner_radius: 1e-3,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn support_is_vertex_max((vs, c, _) in random_polytope()) {
            let c = vector(&c);
            prop_assume!(c.norm() > 1e-6);
            let vertices: Vec<Vector> = vs.iter().map(|v| vector(v)).collect();
            let body = unchecked(vertices.clone());
            let s = body.support(&c).unwrap();
            let best = vertices.iter().map(|v| v.dot(&c)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(s.value, best);
            prop_assert_eq!(s.maximizer.dot(&c), s.value);
        }

        #[test]
        fn support_dominates_convex_combinations((vs, c, w) in random_polytope()) {
            let c = vector(&c);
            prop_assume!(c.norm() > 1e-6);
            let vertices: Vec<Vector> = vs.iter().map(|v| vector(v)).collect();
            let weights = &w[..vertices.len()];
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-3);
            let x = vertices
                .iter()
                .zip(weights)
                .fold(Vector::zeros(c.len()), |acc, (v, wi)| acc + v * (wi / total));
            let s = unchecked(vertices).support(&c).unwrap();
            prop_assert!(c.dot(&x) <= s.value + 1e-12);
        }
    }
}
