//! CSV files for sampled functions and spectra, and the JSON run manifest.
//!
//! Function files have the header `x,re,im` and one row per grid node with `x`
//! ascending from 0 to π. Spectrum files have the header `k,re,im` with dense
//! indices from 0. Numbers are written with 17 significant digits so a write
//! followed by a read reproduces every sample exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, DEFAULT_GRID_N};
use crate::spectrum::{BoundaryCoefficients, Spectrum};

const FUNCTION_HEADER: [&str; 3] = ["x", "re", "im"];
const SPECTRUM_HEADER: [&str; 3] = ["k", "re", "im"];

/// Relative slack when matching the `x` column against grid nodes.
const X_TOLERANCE: f64 = 1e-9;

fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

fn parse_field(field: &str, line: usize, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Schema {
        line,
        message: format!("column '{column}': {e}"),
    })
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Schema {
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

fn data_rows(text: &str, header: [&str; 3]) -> Result<Vec<(usize, [f64; 3])>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let head = records
        .next()
        .ok_or_else(|| Error::Schema {
            line: 1,
            message: "empty file".into(),
        })?
        .map_err(csv_error)?;
    if !head.iter().eq(header) {
        return Err(Error::Schema {
            line: record_line(&head),
            message: format!("expected header '{}', found '{}'", header.join(","), head.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() != 3 {
            return Err(Error::Schema {
                line,
                message: format!("expected 3 columns, found {}", record.len()),
            });
        }
        let mut parsed = [0.0; 3];
        for (slot, (field, column)) in parsed.iter_mut().zip(record.iter().zip(header)) {
            *slot = parse_field(field, line, column)?;
        }
        if parsed.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "input file row",
                index: line,
            });
        }
        rows.push((line, parsed));
    }
    Ok(rows)
}

pub fn parse_function(text: &str) -> Result<SampledFunction> {
    let rows = data_rows(text, FUNCTION_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::Schema {
            line: rows.first().map_or(1, |r| r.0),
            message: "a function file needs at least two rows".into(),
        });
    }
    let grid = Grid::new(rows.len() - 1)?;
    for (i, (line, [x, _, _])) in rows.iter().enumerate() {
        let expected = grid.point(i);
        if (x - expected).abs() > X_TOLERANCE * (1.0 + expected) {
            return Err(Error::Schema {
                line: *line,
                message: format!("x = {x} does not match grid node x_{i} = {expected}"),
            });
        }
    }
    let values = rows
        .iter()
        .map(|(_, [_, re, im])| Complex64::new(*re, *im))
        .collect();
    SampledFunction::new(grid, values)
}

pub fn format_function(f: &SampledFunction) -> String {
    let mut out = String::from("x,re,im\n");
    for (x, v) in f.grid().points().zip(f.values()) {
        out.push_str(&format!("{},{},{}\n", fmt_f64(x), fmt_f64(v.re), fmt_f64(v.im)));
    }
    out
}

pub fn read_function(path: impl AsRef<Path>) -> Result<SampledFunction> {
    parse_function(&fs::read_to_string(path)?)
}

/// Reads a function and checks that it lives on `grid`.
pub fn read_function_on(path: impl AsRef<Path>, grid: Grid) -> Result<SampledFunction> {
    let f = read_function(path)?;
    grid.check_same(&f.grid())?;
    Ok(f)
}

pub fn write_function(f: &SampledFunction, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &format_function(f))
}

pub fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let rows = data_rows(text, SPECTRUM_HEADER)?;
    let mut values = Vec::with_capacity(rows.len());
    for (expected, (line, [k, re, im])) in rows.iter().enumerate() {
        if k.fract() != 0.0 || *k < 0.0 {
            return Err(Error::Schema {
                line: *line,
                message: format!("index k = {k} is not a non-negative integer"),
            });
        }
        let found = *k as usize;
        if found != expected {
            return Err(Error::DenseIndex { expected, found });
        }
        values.push(Complex64::new(*re, *im));
    }
    Spectrum::new(values)
}

pub fn format_spectrum(s: &Spectrum) -> String {
    let mut out = String::from("k,re,im\n");
    for (k, v) in s.values().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", k, fmt_f64(v.re), fmt_f64(v.im)));
    }
    out
}

pub fn read_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    parse_spectrum(&fs::read_to_string(path)?)
}

pub fn write_spectrum(s: &Spectrum, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &format_spectrum(s))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    file.flush()?;
    Ok(())
}

fn default_n() -> usize {
    DEFAULT_GRID_N
}

fn default_num_eigs() -> usize {
    100
}

fn default_nu_max() -> usize {
    60
}

fn default_tol() -> f64 {
    1e-12
}

fn zero_pair() -> [f64; 2] {
    [0.0, 0.0]
}

/// Run manifest: `{ "n", "h": [re, im], "H": [re, im], "num_eigs", "nu_max", "tol" }`.
///
/// `nu_max` caps the number of convolution powers in every series, `tol` is the
/// series truncation threshold. Missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "zero_pair")]
    pub h: [f64; 2],
    #[serde(rename = "H", default = "zero_pair")]
    pub big_h: [f64; 2],
    #[serde(default = "default_num_eigs")]
    pub num_eigs: usize,
    #[serde(default = "default_nu_max")]
    pub nu_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            n: default_n(),
            h: zero_pair(),
            big_h: zero_pair(),
            num_eigs: default_num_eigs(),
            nu_max: default_nu_max(),
            tol: default_tol(),
        }
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyGrid);
        }
        if self.num_eigs == 0 {
            return Err(Error::InvalidArgument("num_eigs must be >= 1".into()));
        }
        if self.nu_max == 0 {
            return Err(Error::InvalidArgument("nu_max must be >= 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        self.boundary()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n)
    }

    pub fn boundary(&self) -> Result<BoundaryCoefficients> {
        BoundaryCoefficients::new(
            Complex64::new(self.h[0], self.h[1]),
            Complex64::new(self.big_h[0], self.big_h[1]),
        )
    }
}
