//! Instance files, result records and 2-D trace export.
//!
//! Floats are written by `serde_json` in shortest round-trip form, so parsing
//! a written file gives back bit-identical values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bodies::{Body, Shape};
use crate::reductions::{SeparationVerdict, Verdict};
use crate::trace::{Mode, RunTrace};
use crate::{tol, Error, Matrix, Result, Vector};

pub const SCHEMA_VERSION: u32 = 1;

/// Exit status for `separate`: separated.
pub const EXIT_SEPARATED: i32 = 0;
pub const EXIT_IN_BODY: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
/// Malformed input or arguments.
pub const EXIT_USAGE: i32 = 64;
/// Solver failure.
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    VertexPolytope {
        vertices: Vec<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `matrix` is given row by row.
    AffineImage {
        base: Box<BodySpec>,
        matrix: Vec<Vec<f64>>,
        shift: Vec<f64>,
    },
}

impl BodySpec {
    fn to_shape(&self, n: usize) -> Result<Shape> {
        let vec_of = |xs: &[f64], what: &str| -> Result<Vector> {
            if xs.len() != n {
                return Err(Error::Parse(format!("{what} has length {}, expected {n}", xs.len())));
            }
            Ok(Vector::from_column_slice(xs))
        };
        Ok(match self {
            BodySpec::VertexPolytope { vertices } => Shape::VertexPolytope {
                vertices: vertices.iter().map(|v| vec_of(v, "vertex")).collect::<Result<_>>()?,
            },
            BodySpec::Ball { center, radius } => Shape::Ball {
                center: vec_of(center, "ball center")?,
                radius: *radius,
            },
            BodySpec::AffineImage { base, matrix, shift } => {
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::Parse(format!("affine matrix must be {n}x{n}")));
                }
                Shape::AffineImage {
                    base: Box::new(base.to_shape(n)?),
                    matrix: Matrix::from_fn(n, n, |i, j| matrix[i][j]),
                    shift: vec_of(shift, "affine shift")?,
                }
            }
        })
    }

    fn from_shape(shape: &Shape) -> Self {
        match shape {
            Shape::VertexPolytope { vertices } => BodySpec::VertexPolytope {
                vertices: vertices.iter().map(|v| v.as_slice().to_vec()).collect(),
            },
            Shape::Ball { center, radius } => BodySpec::Ball {
                center: center.as_slice().to_vec(),
                radius: *radius,
            },
            Shape::AffineImage { base, matrix, shift } => BodySpec::AffineImage {
                base: Box::new(BodySpec::from_shape(base)),
                matrix: matrix.row_iter().map(|r| r.iter().copied().collect()).collect(),
                shift: shift.as_slice().to_vec(),
            },
        }
    }
}

/// On-disk separation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dimension: usize,
    pub body: BodySpec,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub query_point: Vec<f64>,
    pub delta: f64,
}

impl InstanceFile {
    pub fn new(body: &Body, query: &Vector, delta: f64) -> Self {
        InstanceFile {
            dimension: body.dimension(),
            body: BodySpec::from_shape(body.shape()),
            outer_radius: body.outer_radius(),
            inner_radius: body.inner_radius(),
            query_point: query.as_slice().to_vec(),
            delta,
        }
    }

    /// Parses and validates; the body itself is checked by [`Self::body`].
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        if self.query_point.len() != self.dimension {
            return Err(Error::Parse(format!(
                "query_point has length {}, expected {}",
                self.query_point.len(),
                self.dimension
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Parse(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn body(&self) -> Result<Body> {
        Body::new(self.body.to_shape(self.dimension)?, self.outer_radius, self.inner_radius)
    }

    pub fn query(&self) -> Vector {
        Vector::from_column_slice(&self.query_point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub zero: f64,
    pub support: f64,
    pub polar: f64,
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: tol::ZERO,
            support: tol::SUPPORT,
            polar: tol::POLAR,
            newton: tol::NEWTON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Separated,
    InBody,
    Inconclusive,
}

/// Stdout record of `separate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub mode: Mode,
    pub verdict: VerdictKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub separator: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    pub delta: f64,
    pub oracle_calls: usize,
    pub iterations: usize,
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace_path: Option<String>,
    pub tolerances: Tolerances,
}

impl ResultRecord {
    pub fn new(run: &SeparationVerdict, delta: f64, trace_path: Option<String>) -> Self {
        let (verdict, separator, margin, reason) = match &run.verdict {
            Verdict::Separated { separator, margin, .. } => (
                VerdictKind::Separated,
                Some(separator.as_slice().to_vec()),
                Some(*margin),
                None,
            ),
            Verdict::InBody { reason, .. } => (VerdictKind::InBody, None, None, Some(reason.as_str().to_string())),
            Verdict::Inconclusive => (VerdictKind::Inconclusive, None, None, None),
        };
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            mode: run.trace.mode,
            verdict,
            separator,
            margin,
            reason,
            delta,
            oracle_calls: run.oracle_calls,
            iterations: run.iterations,
            wall_time: run.trace.wall_time,
            trace_path,
            tolerances: Tolerances::default(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            VerdictKind::Separated => EXIT_SEPARATED,
            VerdictKind::InBody => EXIT_IN_BODY,
            VerdictKind::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

/// Stdout record when a command fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub schema_version: u32,
    pub error: ErrorBody,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord {
            schema_version: SCHEMA_VERSION,
            error: ErrorBody {
                code: e.code().to_string(),
                message: e.to_string(),
            },
        }
    }
}

/// Exit status for an error: malformed input is a usage error.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::MalformedBody(_) | Error::InvalidConfig(_) | Error::DimensionNot2D(_) => {
            EXIT_USAGE
        }
        _ => EXIT_SOFTWARE,
    }
}

#[derive(Debug, Serialize)]
struct Trace2dRow {
    iteration: usize,
    center_x: f64,
    center_y: f64,
    cut_ax: Option<f64>,
    cut_ay: Option<f64>,
    cut_b: Option<f64>,
}

/// CSV with columns `iteration,center_x,center_y,cut_ax,cut_ay,cut_b`, one row
/// per trace row; cut fields are empty when the query produced no cut.
pub fn trace2d_csv(trace: &RunTrace) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for row in &trace.rows {
        if row.center.len() != 2 {
            return Err(Error::DimensionNot2D(row.center.len()));
        }
        out.serialize(Trace2dRow {
            iteration: row.iter,
            center_x: row.center[0],
            center_y: row.center[1],
            cut_ax: row.cut.as_ref().map(|c| c.a[0]),
            cut_ay: row.cut.as_ref().map(|c| c.a[1]),
            cut_b: row.cut.as_ref().map(|c| c.b),
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    if trace.rows.is_empty() {
        return Ok("iteration,center_x,center_y,cut_ax,cut_ay,cut_b\n".into());
    }
    let bytes = out.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::fixtures::*;
    use crate::bodies::{random_instance, Placement};
    use crate::reductions::{separate, ReductionConfig};
    use crate::vector;
    use proptest::prelude::*;

    const KITE: &str = r#"{
        "dimension": 2,
        "body": {"type": "vertex_polytope", "vertices": [[0, 1], [-1, 1], [-1, 0], [1, -2]]},
        "outer_radius": 2.23606797749979,
        "inner_radius": 0.31622776601683794,
        "query_point": [-0.875, -0.75],
        "delta": 0.001
    }"#;

    #[test]
    fn parses_kite_instance() {
        let inst = InstanceFile::from_json(KITE).unwrap();
        assert_eq!(inst.body().unwrap().shape(), kite_polytope().shape());
        assert_eq!(inst.query(), vector(&[-0.875, -0.75]));
    }

    #[test]
    fn rejects_bad_files() {
        let zero = KITE.replace("\"dimension\": 2", "\"dimension\": 0");
        assert!(matches!(InstanceFile::from_json(&zero), Err(Error::Parse(_))));
        let extra = KITE.replace("\"delta\": 0.001", "\"delta\": 0.001, \"colour\": 3");
        assert!(InstanceFile::from_json(&extra).is_err());
        let extra_body = KITE.replace("\"type\": \"vertex_polytope\",", "\"type\": \"vertex_polytope\", \"x\": 1,");
        assert!(InstanceFile::from_json(&extra_body).is_err());
        let short = KITE.replace("[-0.875, -0.75]", "[-0.875]");
        assert!(InstanceFile::from_json(&short).is_err());
        let bad_vertex = KITE.replace("[1, -2]", "[1, -2, 3]");
        assert!(InstanceFile::from_json(&bad_vertex).unwrap().body().is_err());
        assert!(InstanceFile::from_json("{").is_err());
    }

    #[test]
    fn ball_and_affine_round_trip() {
        let text = r#"{"dimension": 2,
            "body": {"type": "affine_image",
                     "base": {"type": "ball", "center": [0, 0], "radius": 1},
                     "matrix": [[2, 0], [0, 0.5]], "shift": [0, 0]},
            "outer_radius": 2, "inner_radius": 0.5, "query_point": [3, 0], "delta": 0.01}"#;
        let inst = InstanceFile::from_json(text).unwrap();
        let body = inst.body().unwrap();
        assert!((body.support(&vector(&[1.0, 0.0])).unwrap().value - 2.0).abs() < 1e-15);
        let again = InstanceFile::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn result_record_schema() {
        let body = kite_polytope();
        let p = vector(&[-0.875, -0.75]);
        let run = separate(Mode::HeuristicReduction, &body, &p, 1e-3, &ReductionConfig::default()).unwrap();
        let rec = ResultRecord::new(&run, 1e-3, None);
        assert_eq!(rec.exit_code(), EXIT_SEPARATED);
        let json: serde_json::Value = serde_json::to_value(&rec).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["verdict"], "separated");
        assert_eq!(json["mode"], "heuristic_reduction");
        assert!(json.get("trace_path").is_none());
        assert_eq!(json["tolerances"]["polar"], 1e-9);
    }

    #[test]
    fn error_codes() {
        assert_eq!(error_exit_code(&Error::Parse("x".into())), EXIT_USAGE);
        assert_eq!(error_exit_code(&Error::NoConvergence(3)), EXIT_SOFTWARE);
        let rec = ErrorRecord::from(&Error::DimensionNot2D(3));
        assert_eq!(rec.error.code, "dimension_not_2d");
    }

    #[test]
    fn trace2d_single_query() {
        let run = separate(
            Mode::HeuristicReduction,
            &kite_polytope(),
            &vector(&[-0.875, -0.75]),
            1e-3,
            &ReductionConfig::default(),
        )
        .unwrap();
        let csv = trace2d_csv(&run.trace).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,center_x,center_y,cut_ax,cut_ay,cut_b");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].ends_with(",,,"));
    }

    #[test]
    fn trace2d_rejects_3d() {
        let (body, p) = random_instance(3, 6, 0, Placement::Outside(0.1)).unwrap();
        let run = separate(Mode::StandardReduction, &body, &p, 1e-3, &ReductionConfig::default()).unwrap();
        assert_eq!(trace2d_csv(&run.trace), Err(Error::DimensionNot2D(3)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn instance_round_trip_is_idempotent(seed in 0u64..1000, n in 2usize..5, outside in any::<bool>()) {
            let placement = if outside { Placement::Outside(0.1) } else { Placement::Inside(0.01) };
            let (body, p) = random_instance(n, n + 3, seed, placement).unwrap();
            let inst = InstanceFile::new(&body, &p, 1e-3);
            let once = inst.to_json().unwrap();
            let parsed = InstanceFile::from_json(&once).unwrap();
            prop_assert_eq!(&parsed, &inst);
            prop_assert_eq!(parsed.to_json().unwrap(), once);
            prop_assert_eq!(parsed.body().unwrap(), body);
        }
    }
}
