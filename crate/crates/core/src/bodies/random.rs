use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::facets::{depth, facets};
use super::{distance_to_body, Body};
use crate::{Error, Result, Vector};

const MAX_ATTEMPTS: usize = 64;
/// Generated polytopes must contain an origin ball at least this large.
const MIN_INNER_RADIUS: f64 = 0.05;

/// Where the query point goes relative to the generated body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "side", content = "margin")]
pub enum Placement {
    /// Ball of radius `margin` around `p` lies in `K`.
    Inside(f64),
    /// `dist(p, K) >= margin`.
    Outside(f64),
}

fn unit_gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Random vertex polytope around the origin plus a query point, deterministic
/// in `seed`. Inner radius is the exact facet distance from the origin.
pub fn random_instance(
    n: usize,
    num_vertices: usize,
    seed: u64,
    placement: Placement,
) -> Result<(Body, Vector)> {
    if n < 2 || num_vertices < n + 1 {
        return Err(Error::InvalidConfig(format!(
            "need n >= 2 and at least n + 1 vertices (n = {n}, vertices = {num_vertices})"
        )));
    }
    let margin = match placement {
        Placement::Inside(m) | Placement::Outside(m) => m,
    };
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidConfig(format!("margin {margin} must be nonnegative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..MAX_ATTEMPTS {
        let mut vertices: Vec<Vector> = (0..num_vertices)
            .map(|_| unit_gaussian(&mut rng, n) * rng.random_range(0.5..1.5))
            .collect();
        let centroid = vertices.iter().fold(Vector::zeros(n), |acc, v| acc + v) / num_vertices as f64;
        vertices.iter_mut().for_each(|v| *v -= &centroid);

        let Ok(fs) = facets(&vertices) else { continue };
        let inner = fs.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
        if inner < MIN_INNER_RADIUS {
            continue;
        }
        let outer = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let body = Body::vertex_polytope(vertices, outer, inner)?;

        let u = unit_gaussian(&mut rng, n);
        let p = match placement {
            Placement::Outside(m) => {
                // The supporting hyperplane in direction u certifies the margin.
                let k = body.support(&u)?.maximizer;
                let p = k + &u * (m * (1.0 + rng.random::<f64>()));
                let d = distance_to_body(&body, &p, 1e-10)?;
                if d.distance < m {
                    continue;
                }
                p
            }
            Placement::Inside(m) => {
                if inner <= m {
                    continue;
                }
                // Furthest point of K along u, then shrink toward the origin
                // so that the convex hull with the origin ball leaves room m.
                let reach = fs
                    .iter()
                    .filter(|f| f.normal.dot(&u) > 0.0)
                    .map(|f| f.offset / f.normal.dot(&u))
                    .fold(f64::INFINITY, f64::min);
                let s = rng.random::<f64>() * (1.0 - m / inner);
                let p = &u * (s * reach);
                if depth(&fs, &p) < m {
                    continue;
                }
                p
            }
        };
        return Ok((body, p));
    }
    Err(Error::DegenerateInstance(format!(
        "no valid instance after {MAX_ATTEMPTS} attempts (n = {n}, vertices = {num_vertices})"
    )))
}
