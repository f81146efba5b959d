//! File formats, run configuration and verification reports.
//!
//! Triple files are JSON objects `{"n": 2, "X": [[[re, im], ...], ...], "Y": ..., "Z": ...}`
//! with row-major matrices. Spectral files hold `alpha`, `beta`, `lambda`
//! and `mu` as arrays of `[re, im]` pairs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::eigenflow::Trajectory;
use crate::error::{Error, Result};
use crate::matrix_kernel::{ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL};
use crate::tau_engine::GridValue;
use crate::time::DEFAULT_MAX_INDEX;
use crate::triples::{SpectralSolitonData, Triple};

fn object(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text)? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::format("<root>", "expected a JSON object")),
    }
}

fn field<T: serde::de::DeserializeOwned>(map: &Map<String, Value>, name: &str) -> Result<T> {
    let value = map.get(name).ok_or_else(|| Error::format(name, "missing"))?;
    serde_json::from_value(value.clone()).map_err(|e| Error::format(name, e.to_string()))
}

pub fn parse_triple(text: &str) -> Result<Triple> {
    let map = object(text)?;
    let n: usize = field(&map, "n")?;
    let mut mats = Vec::with_capacity(3);
    for name in ["X", "Y", "Z"] {
        let m: ComplexMatrix = field(&map, name)?;
        if m.n() != n {
            return Err(Error::format(name, format!("expected {n}x{n}, found {0}x{0}", m.n())));
        }
        mats.push(m);
    }
    let z = mats.pop().expect("three matrices");
    let y = mats.pop().expect("three matrices");
    let x = mats.pop().expect("three matrices");
    Triple::new(x, y, z)
}

#[derive(Serialize)]
struct TripleFile<'a> {
    n: usize,
    #[serde(rename = "X")]
    x: &'a ComplexMatrix,
    #[serde(rename = "Y")]
    y: &'a ComplexMatrix,
    #[serde(rename = "Z")]
    z: &'a ComplexMatrix,
}

pub fn triple_to_json(m: &Triple) -> String {
    let file = TripleFile {
        n: m.n(),
        x: m.x(),
        y: m.y(),
        z: m.z(),
    };
    serde_json::to_string_pretty(&file).expect("matrices serialize") + "\n"
}

pub fn read_triple(path: &Path) -> Result<Triple> {
    parse_triple(&std::fs::read_to_string(path)?)
}

pub fn write_triple(path: &Path, m: &Triple) -> Result<()> {
    std::fs::write(path, triple_to_json(m))?;
    Ok(())
}

pub fn parse_spectral(text: &str) -> Result<SpectralSolitonData> {
    let map = object(text)?;
    let alpha: ComplexVector = field(&map, "alpha")?;
    let beta: ComplexVector = field(&map, "beta")?;
    let lambda: ComplexVector = field(&map, "lambda")?;
    let mu: ComplexVector = field(&map, "mu")?;
    SpectralSolitonData::new(alpha.0, beta.0, lambda.0, mu.0)
}

pub fn spectral_to_json(data: &SpectralSolitonData) -> String {
    serde_json::to_string_pretty(data).expect("vectors serialize") + "\n"
}

pub fn read_spectral(path: &Path) -> Result<SpectralSolitonData> {
    parse_spectral(&std::fs::read_to_string(path)?)
}

pub fn write_spectral(path: &Path, data: &SpectralSolitonData) -> Result<()> {
    std::fs::write(path, spectral_to_json(data))?;
    Ok(())
}

/// `x,y,t,re,im` rows.
pub fn grid_csv(values: &[GridValue]) -> String {
    let mut out = String::from("x,y,t,re,im\n");
    for g in values {
        writeln!(out, "{},{},{},{},{}", g.x, g.y, g.t, g.value.re, g.value.im).expect("string write");
    }
    out
}

fn q_header(n: usize, suffix: &str) -> String {
    (1..=n)
        .map(|i| format!("re_Q{i}{suffix},im_Q{i}{suffix}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// `t,re_Q1,im_Q1,...` rows.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.big_q.first().map_or(0, |q| q.len());
    let mut out = format!("t,{}\n", q_header(n, ""));
    for (t, q) in traj.times.iter().zip(&traj.big_q) {
        out.push_str(&t.to_string());
        for z in q.iter() {
            write!(out, ",{},{}", z.re, z.im).expect("string write");
        }
        out.push('\n');
    }
    out
}

/// Two trajectories on a common grid side by side:
/// `t,re_Q1,im_Q1,...,re_Q1_<tag>,im_Q1_<tag>,...`.
pub fn comparison_csv(first: &Trajectory, second: &Trajectory, tag: &str) -> String {
    let n = first.big_q.first().map_or(0, |q| q.len());
    let mut out = format!("t,{},{}\n", q_header(n, ""), q_header(n, &format!("_{tag}")));
    for ((t, a), b) in first.times.iter().zip(&first.big_q).zip(&second.big_q) {
        out.push_str(&t.to_string());
        for z in a.iter().chain(b.iter()) {
            write!(out, ",{},{}", z.re, z.im).expect("string write");
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol_rank: f64,
    pub tol_identity: f64,
    pub max_time_index: usize,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol_rank: DEFAULT_RANK_TOL,
            tol_identity: 1e-9,
            max_time_index: DEFAULT_MAX_INDEX,
            output_path: None,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_rank > 0.0) {
            return Err(Error::format("tol_rank", "must be positive"));
        }
        if !(self.tol_identity > 0.0) {
            return Err(Error::format("tol_identity", "must be positive"));
        }
        if self.max_time_index < 1 {
            return Err(Error::format("max_time_index", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: String,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    /// Residuals must stay at or below the tolerance.
    #[default]
    Identity,
    /// Residuals must exceed the tolerance; used for negative controls.
    NegativeControl,
}

/// Outcome of one named check over many instances. `pass` holds exactly
/// when `failures` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    #[serde(default)]
    pub kind: ReportKind,
    pub instances: usize,
    pub max_relative_residual: f64,
    pub tolerance: f64,
    pub failures: Vec<Failure>,
    pub pass: bool,
    /// Extra reported quantities that are not gated.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<(String, f64)>,
}

impl VerificationReport {
    pub fn new(check_name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            check_name: check_name.into(),
            kind: ReportKind::Identity,
            instances: 0,
            max_relative_residual: 0.0,
            tolerance,
            failures: Vec::new(),
            pass: true,
            notes: Vec::new(),
        }
    }

    /// A report whose instances pass only when the residual exceeds
    /// `threshold`.
    pub fn negative_control(check_name: impl Into<String>, threshold: f64) -> Self {
        Self {
            kind: ReportKind::NegativeControl,
            ..Self::new(check_name, threshold)
        }
    }

    pub fn record(&mut self, instance: impl Into<String>, residual: f64) {
        self.instances += 1;
        if residual.is_nan() || residual > self.max_relative_residual {
            self.max_relative_residual = residual;
        }
        let ok = match self.kind {
            ReportKind::Identity => residual <= self.tolerance,
            ReportKind::NegativeControl => residual > self.tolerance,
        };
        if !ok {
            self.failures.push(Failure {
                instance: instance.into(),
                residual,
            });
        }
        self.pass = self.failures.is_empty();
    }

    /// Records an instance that could not be evaluated.
    pub fn record_error(&mut self, instance: impl Into<String>, err: &Error) {
        self.record(format!("{}: {err}", instance.into()), f64::INFINITY);
    }

    pub fn note(&mut self, key: impl Into<String>, value: f64) {
        self.notes.push((key.into(), value));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let bound = match self.kind {
            ReportKind::Identity => "tolerance",
            ReportKind::NegativeControl => "control threshold",
        };
        format!(
            "{}: {} ({} instances, max residual {:.3e}, {bound} {:.1e}, {} failures)",
            self.check_name,
            if self.pass { "PASS" } else { "FAIL" },
            self.instances,
            self.max_relative_residual,
            self.tolerance,
            self.failures.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::c;
    use crate::rng::SeededRng;
    use crate::triples::rational_example;

    #[test]
    fn triple_round_trip_is_bitwise() {
        let mut rng = SeededRng::new(30);
        let m = Triple::new(rng.matrix(3, 1.0), rng.matrix(3, 1.0), rng.matrix(3, 1.0)).unwrap();
        let back = parse_triple(&triple_to_json(&m)).unwrap();
        for (a, b) in [(m.x(), back.x()), (m.y(), back.y()), (m.z(), back.z())] {
            for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
                assert_eq!(p.re.to_bits(), q.re.to_bits());
                assert_eq!(p.im.to_bits(), q.im.to_bits());
            }
        }
    }

    #[test]
    fn missing_matrix_is_named() {
        let text = triple_to_json(&rational_example(c(2.0, 0.0)));
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("Z");
        match parse_triple(&v.to_string()) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "Z"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_dimension_is_named() {
        let text = r#"{"n": 2, "X": [[[1,0]]], "Y": [[[1,0]]], "Z": [[[1,0]]]}"#;
        match parse_triple(text) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "X"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spectral_errors_name_field() {
        let text = r#"{"alpha": [[1,0]], "beta": [[0,0]], "lambda": [[1,0]], "mu": [[-1,0]]}"#;
        match parse_spectral(text) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "beta"),
            other => panic!("{other:?}"),
        }
        let text = r#"{"alpha": [[1,0]], "beta": [[1,0]], "lambda": [[1,0]]}"#;
        match parse_spectral(text) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "mu"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_pass_iff_no_failures() {
        let mut r = VerificationReport::new("demo", 1e-9);
        r.record("a", 1e-12);
        assert!(r.pass);
        r.record("b", 1e-3);
        assert!(!r.pass);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.max_relative_residual, 1e-3);
        let mut r = VerificationReport::new("nan", 1.0);
        r.record("x", f64::NAN);
        assert!(!r.pass);
        let mut r = VerificationReport::negative_control("control", 1e-3);
        r.record("big", 0.5);
        assert!(r.pass);
        r.record("small", 1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let cfg = RunConfig {
            tol_rank: 0.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grid_header() {
        let g = [GridValue {
            x: 1.0,
            y: 0.0,
            t: -0.5,
            value: c(0.25, 0.0),
        }];
        assert_eq!(grid_csv(&g), "x,y,t,re,im\n1,0,-0.5,0.25,0\n");
    }
}
