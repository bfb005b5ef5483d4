//! Euclidean distance from a point to a body, using only its support oracle.
//!
//! Wolfe's minimum-norm-point iteration: a Gilbert step proposes the support
//! point minimizing the linearization, then the corral of active support
//! points is re-optimized over its affine hull. The corral stays affinely
//! independent, so it holds at most `n + 1` points.

use nalgebra::DMatrix;

use super::Body;
use crate::{Error, Result, Vector};

const MAX_ITERATIONS: usize = 10_000;
const WEIGHT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Distance {
    /// Within `tol` of the true distance; exactly zero when the point is
    /// within `tol` of the body.
    pub distance: f64,
    /// A point of the body (convex combination of support points).
    pub witness: Vector,
    pub iterations: usize,
}

pub fn distance_to_body(body: &Body, p: &Vector, tolerance: f64) -> Result<Distance> {
    if p.len() != body.dimension() {
        return Err(Error::DimensionMismatch {
            expected: body.dimension(),
            found: p.len(),
        });
    }
    // Work in coordinates centered at p; the origin of K is a valid start.
    let mut corral: Vec<Vector> = vec![-p];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = -p;

    for iteration in 0..MAX_ITERATIONS {
        let norm = x.norm();
        if norm <= tolerance {
            return Ok(Distance {
                distance: 0.0,
                witness: &x + p,
                iterations: iteration,
            });
        }
        let q = body.support(&-&x)?.maximizer - p;
        let gap = x.dot(&x) - x.dot(&q);
        let floor = 1e-14 * norm * norm.max(q.norm());
        let seen = corral.iter().any(|s| (s - &q).norm() <= 1e-14 * (1.0 + q.norm()));
        if gap <= tolerance * norm || gap <= floor || seen {
            return Ok(Distance {
                distance: norm,
                witness: &x + p,
                iterations: iteration,
            });
        }

        corral.push(q);
        weights.push(0.0);
        x = minor_cycle(&mut corral, &mut weights, &x);
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}

/// Moves `x` to the minimum-norm point of the corral's convex hull, dropping
/// points whose weight vanishes on the way.
fn minor_cycle(corral: &mut Vec<Vector>, weights: &mut Vec<f64>, x: &Vector) -> Vector {
    let mut x = x.clone();
    loop {
        let Some(alpha) = affine_minimizer(corral) else {
            // Numerically dependent corral: fall back to a plain Gilbert step
            // toward the newest point and restart from the two-point corral.
            let q = corral.last().unwrap().clone();
            let d = &q - &x;
            let step = (-x.dot(&d) / d.dot(&d)).clamp(0.0, 1.0);
            let next = &x + d * step;
            let prev = x.clone();
            corral.clear();
            weights.clear();
            corral.extend([prev, q]);
            weights.extend([1.0 - step, step]);
            prune(corral, weights);
            return next;
        };
        if alpha.iter().all(|&a| a > WEIGHT_EPS) {
            *weights = alpha;
            return combine(corral, weights);
        }
        let theta = weights
            .iter()
            .zip(&alpha)
            .filter(|(_, &a)| a <= WEIGHT_EPS)
            .map(|(&w, &a)| w / (w - a))
            .fold(1.0, f64::min)
            .clamp(0.0, 1.0);
        for (w, a) in weights.iter_mut().zip(&alpha) {
            *w = theta * a + (1.0 - theta) * *w;
        }
        // The blocking point(s) leave the corral.
        let min_index = weights
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        if weights[min_index] <= WEIGHT_EPS {
            weights[min_index] = 0.0;
        }
        prune(corral, weights);
        x = combine(corral, weights);
        if corral.len() == 1 {
            return x;
        }
    }
}

fn prune(corral: &mut Vec<Vector>, weights: &mut Vec<f64>) {
    let mut i = 0;
    while i < corral.len() {
        if weights[i] <= WEIGHT_EPS && corral.len() > 1 {
            corral.remove(i);
            weights.remove(i);
        } else {
            i += 1;
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
}

fn combine(corral: &[Vector], weights: &[f64]) -> Vector {
    corral
        .iter()
        .zip(weights)
        .fold(Vector::zeros(corral[0].len()), |acc, (s, &w)| acc + s * w)
}

/// Weights `alpha` (summing to one) of the minimum-norm point of the affine
/// hull. Solved as least squares on the differences `s_i - s_0`, which keeps
/// the conditioning of the corral itself rather than of its Gram matrix.
fn affine_minimizer(corral: &[Vector]) -> Option<Vec<f64>> {
    let k = corral.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let n = corral[0].len();
    let base = &corral[0];
    let diffs = DMatrix::<f64>::from_fn(n, k - 1, |r, c| corral[c + 1][r] - base[r]);
    let svd = diffs.svd(true, true);
    let largest = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-13 * largest.max(1e-300) {
        return None;
    }
    let beta = svd.solve(&-base, 0.0).ok()?;
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    if !alpha.iter().all(|a| a.is_finite()) {
        return None;
    }
    Some(alpha)
}
