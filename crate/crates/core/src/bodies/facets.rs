//! Brute-force facet enumeration for small vertex polytopes.
//!
//! Every `n`-subset of the points spanning a hyperplane with all points on one
//! side yields a facet. Cost is `C(m, n)` small eigenproblems, which is fine
//! for the dimensions the generator and harness use.

use itertools::Itertools;
use nalgebra::SymmetricEigen;

use crate::{Error, Matrix, Result, Vector};

/// Upper bound on the number of vertex subsets examined.
pub const MAX_SUBSETS: u128 = 2_000_000;

/// Halfspace `{x : normal·x <= offset}` with unit `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
}

impl Facet {
    pub fn slack(&self, x: &Vector) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

fn binomial(m: usize, k: usize) -> u128 {
    let k = k.min(m.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc * (m - i) as u128 / (i + 1) as u128)
}

/// Facets of `conv(points)` for a full-dimensional point set that contains
/// the origin in its interior (every returned facet has positive offset).
pub fn facets(points: &[Vector]) -> Result<Vec<Facet>> {
    let m = points.len();
    let n = points.first().map(|p| p.len()).unwrap_or(0);
    if n == 0 || m < n + 1 {
        return Err(Error::DegenerateInstance(format!(
            "{m} points cannot span a full-dimensional polytope in dimension {n}"
        )));
    }
    if binomial(m, n) > MAX_SUBSETS {
        return Err(Error::DegenerateInstance(format!(
            "C({m}, {n}) vertex subsets exceed the enumeration budget"
        )));
    }
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut out: Vec<Facet> = Vec::new();
    for subset in (0..m).combinations(n) {
        let base = &points[subset[0]];
        let mut diffs = Matrix::zeros(n - 1, n);
        for (row, &j) in subset.iter().skip(1).enumerate() {
            diffs.set_row(row, &(&points[j] - base).transpose());
        }
        let gram = diffs.tr_mul(&diffs);
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        // Affinely dependent subsets have a second null direction.
        if n > 1 && eig.eigenvalues[order[1]] <= 1e-12 * scale * scale {
            continue;
        }
        let mut normal: Vector = eig.eigenvectors.column(order[0]).into_owned();
        normal /= normal.norm();
        let mut offset = normal.dot(base);
        if offset < 0.0 {
            normal = -normal;
            offset = -offset;
        }
        let tol = 1e-10 * (1.0 + scale);
        if offset <= tol {
            continue;
        }
        if points.iter().all(|p| normal.dot(p) <= offset + tol)
            && !out
                .iter()
                .any(|f| (&f.normal - &normal).norm() < 1e-9 && (f.offset - offset).abs() < tol)
        {
            out.push(Facet { normal, offset });
        }
    }
    if out.len() < n + 1 {
        return Err(Error::DegenerateInstance(
            "point set is not full-dimensional around the origin".into(),
        ));
    }
    Ok(out)
}

/// Depth of `p` inside the polytope: the largest radius of a ball around `p`
/// contained in it (negative when `p` is outside some facet).
pub fn depth(facets: &[Facet], p: &Vector) -> f64 {
    facets.iter().map(|f| f.slack(p)).fold(f64::INFINITY, f64::min)
}
