use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use convspec_core::forward::RootReport;
use convspec_core::{Error, Spectrum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest as _, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest(path: &Path) -> Result<FileDigest, Error> {
    let bytes = fs::read(path)?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

#[derive(Debug, Serialize)]
pub struct EigenRow {
    pub k: usize,
    pub lambda: [f64; 2],
    pub kappa: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_disc: Option<bool>,
}

pub fn eigen_table(s: &Spectrum, roots: Option<&[RootReport]>) -> Vec<EigenRow> {
    s.values()
        .iter()
        .zip(s.kappa())
        .enumerate()
        .map(|(k, (l, kappa))| {
            let root = roots.and_then(|r| r.get(k));
            EigenRow {
                k,
                lambda: [l.re, l.im],
                kappa: [kappa.re, kappa.im],
                residual: root.map(|r| r.residual),
                method: root.map(|r| match r.method {
                    convspec_core::forward::RootMethod::Newton => "newton",
                    convspec_core::forward::RootMethod::Continuation => "continuation",
                }),
                in_disc: root.map(|r| r.in_disc),
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `measured <= limit`.
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            limit,
            pass: measured <= limit,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: BTreeMap<&'static str, FileDigest>,
    pub settings: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eigenvalues: Vec<EigenRow>,
    pub outputs: BTreeMap<&'static str, FileDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<&'static str, f64>>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn setting(&mut self, key: &'static str, value: impl Serialize) {
        self.settings.insert(key, json!(value));
    }

    pub fn result(&mut self, key: &'static str, value: impl Serialize) {
        self.results.insert(key, json!(value));
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}

pub fn error_object(command: &str, e: &Error) -> Value {
    let kind = match e {
        Error::IndexOutOfRange { .. } => "index-out-of-range",
        Error::GridMismatch { .. } => "grid-mismatch",
        Error::EmptyGrid => "empty-grid",
        Error::LengthMismatch { .. } => "length-mismatch",
        Error::NonFinite { .. } => "non-finite",
        Error::Schema { .. } => "schema",
        Error::DenseIndex { .. } => "dense-index",
        Error::InvalidArgument(_) => "invalid-argument",
        Error::SingularStep { .. } => "singular-step",
        Error::NoConvergence { .. } => "no-convergence",
        Error::MultipleRoot { .. } => "multiple-root",
        Error::MainEquation { .. } => "main-equation",
        Error::UnknownStrategy { .. } => "unknown-strategy",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    };
    let mut obj = json!({ "kind": kind, "message": e.to_string(), "exit_code": exit_code(e) });
    match e {
        Error::Schema { line, .. } => obj["row"] = json!(line),
        Error::NonFinite { index, .. } => obj["row"] = json!(index),
        Error::DenseIndex { found, .. } => obj["k"] = json!(found),
        Error::NoConvergence { k, .. } | Error::MultipleRoot { k, .. } => obj["k"] = json!(k),
        _ => {}
    }
    json!({ "command": command, "error": obj })
}
