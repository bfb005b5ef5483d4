//! Batch comparison of the separation modes against the distance oracle.
//!
//! Each instance runs independently; with the `parallel` feature the runs are
//! spread over the rayon pool, and the report is assembled in corpus order
//! either way.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic_center::Cut;
use crate::bodies::{depth, distance_to_body, facets, random_instance, Body, Placement, Shape};
use crate::cutting_plane::{solve_feasibility, FeasibilityProblem, FeasibilityVerdict, OracleAnswer};
use crate::io::{InstanceFile, VerdictKind, SCHEMA_VERSION};
use crate::reductions::{separate, ReductionConfig, Verdict};
use crate::trace::Mode;
use crate::{Error, Result, Vector};

/// Tolerance of the ground-truth distance computation.
const TRUTH_TOLERANCE: f64 = 1e-10;
/// Instances count as clear when they are this many `δ` from the boundary.
pub const CLEAR_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

fn run_all<T: Sync, U: Send>(items: &[T], execution: Execution, f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    match execution {
        Execution::Sequential => items.iter().map(f).collect(),
        Execution::Parallel => parallel_map(items, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

/// A corpus member; unreadable files keep their error.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub instance: std::result::Result<InstanceFile, String>,
}

/// Every `*.json` file of `dir`, sorted by name.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| CorpusEntry {
            id: path.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
            instance: InstanceFile::load(&path).map_err(|e| e.to_string()),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub dims: Vec<usize>,
    pub per_dim: usize,
    pub seed: u64,
    pub delta: f64,
}

/// Random polytopes with `2n + 2` vertices, alternating outside and inside
/// query points at `2δ` from the boundary.
pub fn generate_corpus(spec: &GeneratorSpec) -> Result<Vec<CorpusEntry>> {
    let margin = CLEAR_FACTOR * spec.delta;
    let mut out = Vec::new();
    for &n in &spec.dims {
        for i in 0..spec.per_dim {
            let seed = spec.seed.wrapping_mul(1_000_003).wrapping_add((n * 100_000 + i) as u64);
            let placement = if i % 2 == 0 {
                Placement::Outside(margin)
            } else {
                Placement::Inside(margin)
            };
            let (body, p) = random_instance(n, 2 * n + 2, seed, placement)?;
            out.push(CorpusEntry {
                id: format!("n{n}-{i:03}"),
                instance: Ok(InstanceFile::new(&body, &p, spec.delta)),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueStatus {
    Outside,
    Inside,
}

/// One mode's result on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub verdict: Option<VerdictKind>,
    pub oracle_calls: usize,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub separator: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
    /// `c·p - h_K(c) > 0` rechecked with the support oracle.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub separator_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl ModeResult {
    fn run(mode: Mode, body: &Body, p: &Vector, delta: f64, cfg: &ReductionConfig) -> Self {
        match separate(mode, body, p, delta, cfg) {
            Ok(run) => {
                let (verdict, separator, margin, verified) = match &run.verdict {
                    Verdict::Separated { separator, margin, .. } => {
                        let verified = body
                            .support(separator)
                            .map(|s| separator.dot(p) - s.value > 0.0 && separator.dot(p) > 0.0)
                            .unwrap_or(false);
                        (
                            VerdictKind::Separated,
                            Some(separator.as_slice().to_vec()),
                            Some(*margin),
                            Some(verified),
                        )
                    }
                    Verdict::InBody { .. } => (VerdictKind::InBody, None, None, None),
                    Verdict::Inconclusive => (VerdictKind::Inconclusive, None, None, None),
                };
                ModeResult {
                    verdict: Some(verdict),
                    oracle_calls: run.oracle_calls,
                    iterations: run.iterations,
                    separator,
                    margin,
                    separator_verified: verified,
                    error: None,
                }
            }
            Err(e) => ModeResult {
                verdict: None,
                oracle_calls: 0,
                iterations: 0,
                separator: None,
                margin: None,
                separator_verified: None,
                error: Some(e.to_string()),
            },
        }
    }

    fn separated(&self) -> Option<bool> {
        self.verdict.map(|v| v == VerdictKind::Separated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub id: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth: Option<TrueStatus>,
    /// Distance from `p` to the body.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distance: Option<f64>,
    /// Radius of the largest ball around `p` inside the body, when computable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<f64>,
    /// `p` is at least `2δ` from the boundary.
    pub clear_margin: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub heuristic: Option<ModeResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub heuristic_reduction: Option<ModeResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub standard_reduction: Option<ModeResult>,
    /// Both reductions agree with each other, with the truth on clear
    /// instances, and every separator passes the support recheck.
    pub agreement: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    pub mode: Mode,
    pub runs: usize,
    pub mean_calls: f64,
    pub median_calls: f64,
    /// Means over instances with `p` outside / inside the body.
    pub mean_calls_outside: Option<f64>,
    pub mean_calls_inside: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub instances: usize,
    pub clear_instances: usize,
    /// Clear-margin instances without agreement.
    pub disagreements: usize,
    pub unclear_disagreements: usize,
    pub failed_rows: usize,
    pub modes: Vec<ModeStats>,
}

/// Iterations of the engine on `{x in B_n : x_1 >= 1 - t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub n: usize,
    pub t: f64,
    pub iterations: usize,
    /// `64 n log2(1/t)`.
    pub cap: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub rows: Vec<ComparisonRow>,
    pub aggregates: Aggregates,
    #[serde(default)]
    pub budget: Vec<BudgetRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareConfig {
    pub reduction: ReductionConfig,
    pub execution: Execution,
    /// Also run the bare correction heuristic.
    pub include_heuristic: bool,
}

fn truth(body: &Body, p: &Vector) -> Result<(TrueStatus, f64, Option<f64>)> {
    let distance = distance_to_body(body, p, TRUTH_TOLERANCE)?.distance;
    let depth = match body.shape() {
        Shape::VertexPolytope { vertices } => Some(depth(&facets(vertices)?, p)),
        Shape::Ball { center, radius } => Some(radius - (p - center).norm()),
        Shape::AffineImage { .. } => None,
    };
    let status = if distance > 0.0 {
        TrueStatus::Outside
    } else {
        TrueStatus::Inside
    };
    Ok((status, distance, depth))
}

fn compare_one(entry: &CorpusEntry, cfg: &CompareConfig) -> ComparisonRow {
    let mut row = ComparisonRow {
        id: entry.id.clone(),
        n: 0,
        truth: None,
        distance: None,
        depth: None,
        clear_margin: false,
        heuristic: None,
        heuristic_reduction: None,
        standard_reduction: None,
        agreement: false,
        error: None,
    };
    let loaded = entry
        .instance
        .clone()
        .and_then(|inst| Ok((inst.body().map_err(|e| e.to_string())?, inst.query(), inst.delta)));
    let (body, p, delta) = match loaded {
        Ok(x) => x,
        Err(e) => {
            row.error = Some(e);
            return row;
        }
    };
    row.n = body.dimension();
    match truth(&body, &p) {
        Ok((status, distance, depth)) => {
            row.truth = Some(status);
            row.distance = Some(distance);
            row.depth = depth;
            let clear = CLEAR_FACTOR * delta;
            row.clear_margin = match status {
                TrueStatus::Outside => distance >= clear - TRUTH_TOLERANCE,
                TrueStatus::Inside => depth.is_some_and(|d| d >= clear - TRUTH_TOLERANCE),
            };
        }
        Err(e) => row.error = Some(format!("ground truth: {e}")),
    }

    if cfg.include_heuristic {
        row.heuristic = Some(ModeResult::run(Mode::Heuristic, &body, &p, delta, &cfg.reduction));
    }
    let ours = ModeResult::run(Mode::HeuristicReduction, &body, &p, delta, &cfg.reduction);
    let standard = ModeResult::run(Mode::StandardReduction, &body, &p, delta, &cfg.reduction);
    let verified = [&ours, &standard]
        .iter()
        .all(|r| r.separator_verified.unwrap_or(true));
    row.agreement = match (ours.separated(), standard.separated()) {
        (Some(a), Some(b)) => {
            let truthful = match (row.clear_margin, row.truth) {
                (true, Some(status)) => a == (status == TrueStatus::Outside),
                _ => true,
            };
            a == b && truthful && verified
        }
        _ => false,
    };
    if row.error.is_none() {
        row.error = ours.error.clone().or_else(|| standard.error.clone());
    }
    row.heuristic_reduction = Some(ours);
    row.standard_reduction = Some(standard);
    row
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        0.5 * (xs[mid - 1] + xs[mid])
    } else {
        xs[mid]
    }
}

fn mode_stats(rows: &[ComparisonRow], mode: Mode) -> Option<ModeStats> {
    let pick = |r: &ComparisonRow| match mode {
        Mode::Heuristic => r.heuristic.clone(),
        Mode::HeuristicReduction => r.heuristic_reduction.clone(),
        Mode::StandardReduction => r.standard_reduction.clone(),
    };
    let runs: Vec<(Option<TrueStatus>, f64)> = rows
        .iter()
        .filter_map(|r| pick(r).filter(|m| m.error.is_none()).map(|m| (r.truth, m.oracle_calls as f64)))
        .collect();
    if runs.is_empty() {
        return None;
    }
    let mut all: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let side = |s: TrueStatus| -> Vec<f64> { runs.iter().filter(|r| r.0 == Some(s)).map(|r| r.1).collect() };
    Some(ModeStats {
        mode,
        runs: runs.len(),
        mean_calls: mean(&all).unwrap_or(0.0),
        median_calls: median(&mut all),
        mean_calls_outside: mean(&side(TrueStatus::Outside)),
        mean_calls_inside: mean(&side(TrueStatus::Inside)),
    })
}

pub fn compare(entries: &[CorpusEntry], cfg: &CompareConfig) -> ComparisonReport {
    let rows = run_all(entries, cfg.execution, |e| compare_one(e, cfg));
    let modes = [Mode::Heuristic, Mode::HeuristicReduction, Mode::StandardReduction]
        .into_iter()
        .filter_map(|m| mode_stats(&rows, m))
        .collect();
    let aggregates = Aggregates {
        instances: rows.len(),
        clear_instances: rows.iter().filter(|r| r.clear_margin).count(),
        disagreements: rows.iter().filter(|r| r.clear_margin && !r.agreement).count(),
        unclear_disagreements: rows.iter().filter(|r| !r.clear_margin && !r.agreement).count(),
        failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
        modes,
    };
    for r in rows.iter().filter(|r| r.clear_margin && !r.agreement) {
        log::warn!("disagreement on clear instance {}", r.id);
    }
    ComparisonReport {
        schema_version: SCHEMA_VERSION,
        rows,
        aggregates,
        budget: Vec::new(),
    }
}

/// Engine iterations to find a point of `{x in B_n : x_1 >= 1 - t}` with an
/// exact separation oracle.
pub fn budget_run(n: usize, t: f64) -> Result<BudgetRow> {
    let level = 1.0 - t;
    let mut axis = Vector::zeros(n);
    axis[0] = 1.0;
    let cut = Cut::new(axis, level)?;
    let mut oracle = |x: &Vector| -> Result<OracleAnswer> {
        Ok(if x[0] >= level {
            OracleAnswer::Member
        } else {
            OracleAnswer::Cut(cut.clone())
        })
    };
    // The cap holds a ball of radius about t/2; stop well below that.
    let problem = FeasibilityProblem::new(n, 1.0, t / 16.0);
    let out = solve_feasibility(&problem, &mut oracle)?;
    Ok(BudgetRow {
        n,
        t,
        iterations: out.iterations,
        cap: 64.0 * n as f64 * (1.0 / t).log2(),
        feasible: matches!(out.verdict, FeasibilityVerdict::Feasible(_)),
    })
}

pub fn budget_table(dims: &[usize], ts: &[f64], execution: Execution) -> Result<Vec<BudgetRow>> {
    let cases: Vec<(usize, f64)> = dims.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
    run_all(&cases, execution, |&(n, t)| budget_run(n, t)).into_iter().collect()
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    n: usize,
    truth: Option<TrueStatus>,
    distance: Option<f64>,
    depth: Option<f64>,
    clear_margin: bool,
    heuristic_verdict: Option<VerdictKind>,
    heuristic_calls: Option<usize>,
    heuristic_reduction_verdict: Option<VerdictKind>,
    heuristic_reduction_calls: Option<usize>,
    standard_reduction_verdict: Option<VerdictKind>,
    standard_reduction_calls: Option<usize>,
    agreement: bool,
    error: Option<&'a str>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per instance.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = csv::Writer::from_writer(Vec::new());
        let verdict = |m: &Option<ModeResult>| m.as_ref().and_then(|m| m.verdict);
        let calls = |m: &Option<ModeResult>| m.as_ref().map(|m| m.oracle_calls);
        for r in &self.rows {
            out.serialize(CsvRow {
                id: &r.id,
                n: r.n,
                truth: r.truth,
                distance: r.distance,
                depth: r.depth,
                clear_margin: r.clear_margin,
                heuristic_verdict: verdict(&r.heuristic),
                heuristic_calls: calls(&r.heuristic),
                heuristic_reduction_verdict: verdict(&r.heuristic_reduction),
                heuristic_reduction_calls: calls(&r.heuristic_reduction),
                standard_reduction_verdict: verdict(&r.standard_reduction),
                standard_reduction_calls: calls(&r.standard_reduction),
                agreement: r.agreement,
                error: r.error.as_deref(),
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = out.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `path` (JSON) and the same path with a `.csv` extension.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
        fs::write(path, self.to_json()? + "\n").map_err(io)?;
        fs::write(path.with_extension("csv"), self.to_csv()?).map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(per_dim: usize) -> GeneratorSpec {
        GeneratorSpec {
            dims: vec![2, 3],
            per_dim,
            seed: 5,
            delta: 1e-3,
        }
    }

    #[test]
    fn generated_corpus_agrees() {
        let entries = generate_corpus(&spec(6)).unwrap();
        let report = compare(&entries, &CompareConfig::default());
        assert_eq!(report.aggregates.instances, 12);
        assert_eq!(report.aggregates.clear_instances, 12);
        assert_eq!(report.aggregates.disagreements, 0);
        assert_eq!(report.aggregates.modes.len(), 2);
    }

    #[test]
    fn sequential_and_parallel_match() {
        let entries = generate_corpus(&spec(4)).unwrap();
        let mut cfg = CompareConfig {
            include_heuristic: true,
            ..Default::default()
        };
        let par = compare(&entries, &cfg);
        cfg.execution = Execution::Sequential;
        let seq = compare(&entries, &cfg);
        let strip = |r: &ComparisonReport| {
            r.rows
                .iter()
                .map(|x| (x.id.clone(), x.agreement, x.heuristic_reduction.clone(), x.standard_reduction.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&par), strip(&seq));
        assert_eq!(par.aggregates.modes.len(), 3);
    }

    #[test]
    fn empty_corpus_gives_empty_report() {
        let report = compare(&[], &CompareConfig::default());
        assert!(report.rows.is_empty());
        assert_eq!(report.aggregates.disagreements, 0);
        assert!(report.aggregates.modes.is_empty());
        assert_eq!(report.to_csv().unwrap(), "");
    }

    #[test]
    fn malformed_entry_is_flagged() {
        let mut entries = generate_corpus(&spec(1)).unwrap();
        entries.push(CorpusEntry {
            id: "broken".into(),
            instance: Err("bad json".into()),
        });
        let report = compare(&entries, &CompareConfig::default());
        let broken = report.rows.iter().find(|r| r.id == "broken").unwrap();
        assert_eq!(broken.error.as_deref(), Some("bad json"));
        assert!(!broken.clear_margin);
        assert_eq!(report.aggregates.failed_rows, 1);
        assert_eq!(report.aggregates.disagreements, 0);
    }

    #[test]
    fn budget_rows_respect_cap() {
        for row in budget_table(&[2, 4], &[1e-1, 1e-2], Execution::Sequential).unwrap() {
            assert!(row.feasible);
            assert!((row.iterations as f64) <= row.cap, "{row:?}");
        }
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
