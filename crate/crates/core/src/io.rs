//! Grid files: CSV, JSON and 16-bit PGM.
//!
//! Every output is a [`Table`]: a matrix with a uniformly sampled row axis
//! and column axis plus free-form `key=value` metadata.
//!
//! CSV files start with `#` comment lines carrying the metadata, followed by
//! one line per row. Values use the shortest decimal that round-trips, so
//! reading a file back gives bit-identical numbers. Sweep tables are
//! *labeled*: a header line lists the column coordinates and every row
//! starts with its row coordinate.
//!
//! ```text
//! # kind=cascade
//! # rows=omega1:0:3:201
//! # cols=omega2:0:3:201
//! # gamma=0.6
//! 0.0123,0.0131,...
//! ```
//!
//! JSON files hold `{"kind", "axes": {"rows", "cols"}, "meta", "values"}`
//! with missing values as `null`. PGM files are binary `P5` with a maxval of
//! 65535, samples min-max scaled over the finite values, rows in the same
//! order as the CSV and the metadata in a single comment line.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dimer::DimerParams;
use crate::entanglement::{EntropySource, SweepResult};
use crate::error::IoError;
use crate::grid::{Axis, IntensityGrid};
use crate::scattering::{ScatterGrid, ScatterInput, ScatterLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Pgm,
}

impl OutputFormat {
    /// Format implied by a file extension, if any.
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            "pgm" => Some(OutputFormat::Pgm),
            _ => None,
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "pgm" => Ok(OutputFormat::Pgm),
            other => Err(format!(
                "unknown format '{other}' (expected csv, json or pgm)"
            )),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Pgm => "pgm",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl TableAxis {
    fn from_axis(name: &str, axis: &Axis) -> Self {
        Self {
            name: name.to_string(),
            min: axis.min,
            max: axis.max,
            n: axis.n,
        }
    }

    /// The `i`-th coordinate; matches [`Axis::value`].
    pub fn value(&self, i: usize) -> f64 {
        if self.n <= 1 {
            self.min
        } else if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * (self.max - self.min) / (self.n - 1) as f64
        }
    }

    fn encode(&self) -> String {
        format!("{}:{}:{}:{}", self.name, self.min, self.max, self.n)
    }

    fn decode(s: &str) -> Option<Self> {
        let mut parts = s.split(':');
        let name = parts.next()?.to_string();
        let min = parts.next()?.parse().ok()?;
        let max = parts.next()?.parse().ok()?;
        let n = parts.next()?.parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        Some(Self { name, min, max, n })
    }
}

/// A matrix with axis and provenance metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub kind: String,
    pub rows: TableAxis,
    pub cols: TableAxis,
    /// Sorted by key.
    pub meta: BTreeMap<String, String>,
    pub values: DMatrix<f64>,
    /// Header row of column coordinates and a leading row-coordinate column.
    pub labeled: bool,
}

fn params_meta(meta: &mut BTreeMap<String, String>, p: &DimerParams) {
    meta.insert("ex".into(), p.ex.to_string());
    meta.insert("j".into(), p.j.to_string());
    meta.insert("u".into(), p.u.to_string());
    meta.insert("gamma".into(), p.gamma.to_string());
    meta.insert("mu_0b".into(), p.mu_0b.to_string());
    meta.insert("mu_bc".into(), p.mu_bc.to_string());
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Table {
    /// Cascade (or Raman) intensity with the parameters that produced it.
    pub fn from_intensity(kind: &str, grid: &IntensityGrid, params: &DimerParams) -> Self {
        let mut meta = BTreeMap::new();
        params_meta(&mut meta, params);
        meta.insert("normalization".into(), grid.normalization.to_string());
        Self {
            kind: kind.into(),
            rows: TableAxis::from_axis("omega1", &grid.grid.omega1),
            cols: TableAxis::from_axis("omega2", &grid.grid.omega2),
            meta,
            values: grid.values.clone(),
            labeled: false,
        }
    }

    pub fn from_scatter(grid: &ScatterGrid, params: &DimerParams) -> Self {
        let mut meta = BTreeMap::new();
        params_meta(&mut meta, params);
        meta.insert("mode".into(), grid.input.name().into());
        meta.insert("omega2_in".into(), grid.omega2_in.to_string());
        meta.insert("quantity".into(), grid.quantity.to_string());
        let (rows, cols) = match grid.layout {
            ScatterLayout::InputOutput => ("omega1_in", "omega1_out"),
            ScatterLayout::OutputPair => ("omega1_out", "omega2_out"),
        };
        meta.insert(
            "layout".into(),
            match grid.layout {
                ScatterLayout::InputOutput => "input_output",
                ScatterLayout::OutputPair => "output_pair",
            }
            .into(),
        );
        if let Some(r) = grid.conservation_residual {
            meta.insert("conservation_residual".into(), r.to_string());
        }
        Self {
            kind: "scatter".into(),
            rows: TableAxis::from_axis(rows, &grid.grid.omega1),
            cols: TableAxis::from_axis(cols, &grid.grid.omega2),
            meta,
            values: grid.values.clone(),
            labeled: false,
        }
    }

    pub fn from_sweep(sweep: &SweepResult) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("ex".into(), sweep.base.ex.to_string());
        meta.insert("gamma".into(), sweep.base.gamma.to_string());
        meta.insert("mu_0b".into(), sweep.base.mu_0b.to_string());
        meta.insert("mu_bc".into(), sweep.base.mu_bc.to_string());
        meta.insert("source".into(), sweep.source.name().into());
        if let EntropySource::Scatter { input } = sweep.source {
            meta.insert("mode".into(), input.name().into());
            if let ScatterInput::Free { omega2_in } = input {
                meta.insert("omega2_in".into(), omega2_in.to_string());
            }
        }
        meta.insert(
            "omega1".into(),
            TableAxis::from_axis("omega1", &sweep.grid.omega1).encode(),
        );
        meta.insert(
            "omega2".into(),
            TableAxis::from_axis("omega2", &sweep.grid.omega2).encode(),
        );
        let locus: Vec<String> = sweep
            .separable_locus
            .iter()
            .map(|(j, u)| format!("{j}:{u}"))
            .collect();
        meta.insert("separable_locus".into(), locus.join(";"));
        let axis = |name: &str, v: &[f64]| TableAxis {
            name: name.into(),
            min: v[0],
            max: v[v.len() - 1],
            n: v.len(),
        };
        Self {
            kind: "sweep".into(),
            rows: axis("j", &sweep.j_values),
            cols: axis("u", &sweep.u_values),
            meta,
            values: sweep.entropy.clone(),
            labeled: true,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind={}", self.kind);
        let _ = writeln!(out, "# rows={}", self.rows.encode());
        let _ = writeln!(out, "# cols={}", self.cols.encode());
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        if self.labeled {
            out.push_str(&format!("{}\\{}", self.rows.name, self.cols.name));
            for j in 0..self.values.ncols() {
                let _ = write!(out, ",{}", Num(self.cols.value(j)));
            }
            out.push('\n');
        }
        for i in 0..self.values.nrows() {
            if self.labeled {
                let _ = write!(out, "{},", Num(self.rows.value(i)));
            }
            for j in 0..self.values.ncols() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", Num(self.values[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut header: BTreeMap<String, String> = BTreeMap::new();
        let mut body = Vec::new();
        for line in text.lines() {
            if let Some(comment) = line.strip_prefix('#') {
                let (k, v) = comment
                    .trim_start()
                    .split_once('=')
                    .ok_or_else(|| format!("comment line without key=value: {line}"))?;
                header.insert(k.to_string(), v.to_string());
            } else if !line.is_empty() {
                body.push(line);
            }
        }
        let kind = header.remove("kind").ok_or("missing kind")?;
        let rows = header
            .remove("rows")
            .and_then(|s| TableAxis::decode(&s))
            .ok_or("missing or malformed rows axis")?;
        let cols = header
            .remove("cols")
            .and_then(|s| TableAxis::decode(&s))
            .ok_or("missing or malformed cols axis")?;
        let labeled = body
            .first()
            .is_some_and(|l| l.starts_with(&format!("{}\\{}", rows.name, cols.name)));
        let data = if labeled { &body[1..] } else { &body[..] };
        if data.len() != rows.n {
            return Err(format!("expected {} rows, found {}", rows.n, data.len()));
        }
        let mut values = DMatrix::zeros(rows.n, cols.n);
        for (i, line) in data.iter().enumerate() {
            let mut cells = line.split(',');
            if labeled {
                cells.next();
            }
            let parsed: Vec<f64> = cells
                .map(|c| c.trim().parse::<f64>().map_err(|e| format!("row {i}: {e}")))
                .collect::<Result<_, _>>()?;
            if parsed.len() != cols.n {
                return Err(format!(
                    "row {i}: expected {} values, found {}",
                    cols.n,
                    parsed.len()
                ));
            }
            for (j, v) in parsed.into_iter().enumerate() {
                values[(i, j)] = v;
            }
        }
        Ok(Self {
            kind,
            rows,
            cols,
            meta: header,
            values,
            labeled,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = JsonTable {
            kind: self.kind.clone(),
            axes: JsonAxes {
                rows: self.rows.clone(),
                cols: self.cols.clone(),
            },
            meta: self.meta.clone(),
            labeled: self.labeled,
            values: (0..self.values.nrows())
                .map(|i| {
                    (0..self.values.ncols())
                        .map(|j| Some(self.values[(i, j)]).filter(|v| !v.is_nan()))
                        .collect()
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: JsonTable = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let (n1, n2) = (doc.axes.rows.n, doc.axes.cols.n);
        if doc.values.len() != n1 || doc.values.iter().any(|r| r.len() != n2) {
            return Err(format!("values do not match the {n1}x{n2} axes"));
        }
        let values = DMatrix::from_fn(n1, n2, |i, j| doc.values[i][j].unwrap_or(f64::NAN));
        Ok(Self {
            kind: doc.kind,
            rows: doc.axes.rows,
            cols: doc.axes.cols,
            meta: doc.meta,
            values,
            labeled: doc.labeled,
        })
    }

    /// Samples scaled to `0..=65535` over the finite range; NaN maps to 0.
    pub fn pgm_samples(&self) -> Vec<u16> {
        let finite = self.values.iter().copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        let span = hi - lo;
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                let v = self.values[(i, j)];
                let s = if !v.is_finite() || span.is_nan() || span <= 0.0 {
                    0.0
                } else {
                    ((v - lo) / span * 65535.0).round()
                };
                out.push(s as u16);
            }
        }
        out
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut meta = format!(
            "kind={} rows={} cols={}",
            self.kind,
            self.rows.encode(),
            self.cols.encode()
        );
        for (k, v) in &self.meta {
            let _ = write!(meta, " {k}={v}");
        }
        let mut out = format!(
            "P5\n# {meta}\n{} {}\n65535\n",
            self.values.ncols(),
            self.values.nrows()
        )
        .into_bytes();
        for s in self.pgm_samples() {
            out.extend_from_slice(&s.to_be_bytes());
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct JsonAxes {
    rows: TableAxis,
    cols: TableAxis,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    kind: String,
    axes: JsonAxes,
    meta: BTreeMap<String, String>,
    #[serde(default)]
    labeled: bool,
    values: Vec<Vec<Option<f64>>>,
}

/// Contents of a 16-bit PGM written by [`Table::to_pgm`].
#[derive(Clone, Debug, PartialEq)]
pub struct PgmImage {
    pub comment: String,
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u16>,
}

pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage, String> {
    let mut pos = 0;
    let mut line = || -> Result<String, String> {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or("truncated header")?;
        let s = String::from_utf8(bytes[pos..pos + end].to_vec()).map_err(|e| e.to_string())?;
        pos += end + 1;
        Ok(s)
    };
    if line()? != "P5" {
        return Err("not a binary PGM".into());
    }
    let comment = line()?
        .strip_prefix("# ")
        .ok_or("missing metadata comment")?
        .to_string();
    let dims = line()?;
    let (w, h) = dims.split_once(' ').ok_or("malformed dimensions")?;
    let width: usize = w.parse().map_err(|_| "malformed width")?;
    let height: usize = h.parse().map_err(|_| "malformed height")?;
    if line()? != "65535" {
        return Err("expected maxval 65535".into());
    }
    let data = &bytes[pos..];
    if data.len() != 2 * width * height {
        return Err(format!(
            "expected {} sample bytes, found {}",
            2 * width * height,
            data.len()
        ));
    }
    let samples = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok(PgmImage {
        comment,
        width,
        height,
        samples,
    })
}

/// Writes `table` to `path` in `format`.
pub fn write_grid(table: &Table, format: OutputFormat, path: &Path) -> Result<(), IoError> {
    let bytes = match format {
        OutputFormat::Csv => table.to_csv().into_bytes(),
        OutputFormat::Json => table.to_json().into_bytes(),
        OutputFormat::Pgm => table.to_pgm(),
    };
    fs::write(path, bytes).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a CSV or JSON table, detecting the format from its first byte.
pub fn read_grid(path: &Path) -> Result<Table, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = if text.trim_start().starts_with('{') {
        Table::from_json(&text)
    } else {
        Table::from_csv(&text)
    };
    parsed.map_err(|message| IoError::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub fn read_pgm(path: &Path) -> Result<PgmImage, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pgm(&bytes).map_err(|message| IoError::Format {
        path: path.to_path_buf(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_table() -> Table {
        Table {
            kind: "cascade".into(),
            rows: TableAxis {
                name: "omega1".into(),
                min: 0.0,
                max: 1.0,
                n: 2,
            },
            cols: TableAxis {
                name: "omega2".into(),
                min: 0.0,
                max: 1.0,
                n: 2,
            },
            meta: BTreeMap::from([("gamma".to_string(), "0.6".to_string())]),
            values: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            labeled: false,
        }
    }

    #[test]
    fn csv_body_layout() {
        let csv = small_table().to_csv();
        assert!(csv.ends_with("\n1,2\n3,4\n"), "{csv}");
        assert!(csv.starts_with(
            "# kind=cascade\n# rows=omega1:0:1:2\n# cols=omega2:0:1:2\n# gamma=0.6\n"
        ));
    }

    #[test]
    fn labeled_csv_has_coordinate_header() {
        let mut t = small_table();
        t.kind = "sweep".into();
        t.rows.name = "j".into();
        t.cols.name = "u".into();
        t.labeled = true;
        t.values[(1, 0)] = f64::NAN;
        let csv = t.to_csv();
        assert!(csv.contains("\nj\\u,0,1\n0,1,2\n1,NaN,4\n"), "{csv}");
        let back = Table::from_csv(&csv).unwrap();
        assert!(back.labeled);
        assert!(back.values[(1, 0)].is_nan());
        assert_eq!(back.values[(1, 1)], 4.0);
    }

    #[test]
    fn json_round_trip_with_missing_values() {
        let mut t = small_table();
        t.values[(0, 1)] = f64::NAN;
        let back = Table::from_json(&t.to_json()).unwrap();
        assert!(back.values[(0, 1)].is_nan());
        assert_eq!(back.values[(1, 0)], 3.0);
        assert_eq!(back.meta, t.meta);
        assert_eq!(back.rows, t.rows);
    }

    #[test]
    fn pgm_header_and_scaling() {
        let bytes = small_table().to_pgm();
        let img = parse_pgm(&bytes).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.samples, vec![0, 21845, 43690, 65535]);
        assert!(img.comment.starts_with("kind=cascade rows=omega1:0:1:2"));
        assert!(bytes.starts_with(b"P5\n# kind=cascade"));
    }

    #[test]
    fn constant_table_maps_to_zero() {
        let mut t = small_table();
        t.values.fill(7.0);
        assert_eq!(t.pgm_samples(), vec![0; 4]);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(Table::from_csv("1,2\n").is_err());
        let mut csv = small_table().to_csv();
        csv.push_str("5,6\n");
        assert!(Table::from_csv(&csv)
            .unwrap_err()
            .contains("expected 2 rows"));
        assert!(Table::from_csv(&small_table().to_csv().replace("3,4", "3,x")).is_err());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            OutputFormat::from_extension(Path::new("a/b.json")),
            Some(OutputFormat::Json)
        );
        assert_eq!(
            OutputFormat::from_extension(Path::new("a.pgm")),
            Some(OutputFormat::Pgm)
        );
        assert_eq!(OutputFormat::from_extension(Path::new("a.txt")), None);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_grid(
            &small_table(),
            OutputFormat::Csv,
            Path::new("/nonexistent/dir/x.csv"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
