use crate::analytic_center::Cut;
use crate::{tol, Error, Result, Vector};

/// Cut through the queried direction `c` after the support oracle returned
/// `k` with `c·k >= c·p`.
///
/// `ā = (p - k) - (c·(p - k)) c` is orthogonal to `c`, and every separating
/// direction `m` with `m·c >= 0` has `m·ā > 0`, so the cut
/// `{x : ā/|ā| · x >= offset}` with `offset <= 0` keeps all of them.
pub fn lemma_cut(c: &Vector, p: &Vector, k: &Vector, offset: f64) -> Result<Cut> {
    if c.len() != p.len() || k.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: if c.len() != p.len() { c.len() } else { k.len() },
        });
    }
    let diff = p - k;
    let bar = &diff - c * c.dot(&diff);
    if bar.norm() < tol::ZERO {
        return Err(Error::DegenerateCut);
    }
    Cut::new(bar, offset)
}
