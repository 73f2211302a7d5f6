//! Dataset files.
//!
//! JSON: an array of `{"id": ..., "matrix": [[...], ...]}` objects, rows
//! first. CSV: a first line `m,<dim>`, a header row, then one row per
//! matrix holding its id and the upper triangle in row-major order.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spd_radial::spectral::max_asymmetry;
use spd_radial::{Dataset, Error, SpdPoint, SymmetricMatrix};

use crate::error::{CliError, CliResult};

/// Largest accepted `|a_ij − a_ji|`, relative to `max(1, max|a|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// `explicit`, else `csv` for a `.csv` extension, else JSON.
    pub fn resolve(explicit: Option<Format>, path: Option<&Path>) -> Format {
        explicit.unwrap_or_else(|| match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub matrix: Vec<Vec<f64>>,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

pub fn load_dataset(path: &Path, format: Format) -> CliResult<Dataset> {
    let text = read_text(path)?;
    match format {
        Format::Json => parse_json(&text),
        Format::Csv => parse_csv(&text),
    }
}

/// Validates one matrix: square, finite, symmetric to
/// [`SYMMETRY_TOLERANCE`], positive definite. `what` names it in errors.
pub fn validate_matrix(what: &str, rows: &[Vec<f64>]) -> CliResult<SpdPoint> {
    let m = rows.len();
    if m == 0 {
        return Err(CliError::Validation(format!("{what}: empty matrix")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(CliError::Validation(format!(
                "{what}: row {i} has {} entries, expected {m}",
                row.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Validation(format!("{what}: non-finite entry {v} in row {i}")));
        }
    }
    let dense = nalgebra::DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    let scale = dense.amax().max(1.0);
    let asym = max_asymmetry(&dense);
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(CliError::Validation(format!(
            "{what}: not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let sym = SymmetricMatrix::from_matrix(dense).map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
    SpdPoint::new(sym).map_err(|e| match e {
        Error::Domain { eigenvalue, .. } => CliError::Validation(format!(
            "{what}: not positive definite (eigenvalue {eigenvalue:e})"
        )),
        other => CliError::Validation(format!("{what}: {other}")),
    })
}

fn record_name(index: usize, id: Option<&str>) -> String {
    match id {
        Some(id) => format!("matrix {index} (id {id})"),
        None => format!("matrix {index}"),
    }
}

fn assemble(points: Vec<SpdPoint>, ids: Vec<String>) -> CliResult<Dataset> {
    if points.is_empty() {
        return Err(CliError::Validation("dataset is empty".into()));
    }
    let m = points[0].dim();
    if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.dim() != m) {
        return Err(CliError::Validation(format!(
            "mixed dimensions: matrix 0 is {m}x{m}, matrix {i} is {0}x{0}",
            p.dim()
        )));
    }
    Ok(Dataset::with_labels(points, ids)?)
}

pub fn parse_json(text: &str) -> CliResult<Dataset> {
    let records: Vec<MatrixRecord> = serde_json::from_str(text)
        .map_err(|e| CliError::parse(format!("line {} column {}", e.line(), e.column()), e))?;
    let mut points = Vec::with_capacity(records.len());
    let mut ids = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        points.push(validate_matrix(&record_name(i, r.id.as_deref()), &r.matrix)?);
        ids.push(r.id.clone().unwrap_or_else(|| i.to_string()));
    }
    assemble(points, ids)
}

pub fn parse_csv(text: &str) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());

    let first = rows
        .next()
        .ok_or_else(|| CliError::parse("line 1", "empty file"))?
        .map_err(|e| CliError::parse("line 1", e))?;
    let m: usize = match (first.get(0), first.get(1), first.len()) {
        (Some("m"), Some(v), 2) => v
            .parse()
            .map_err(|e| CliError::parse("line 1", format!("bad dimension `{v}`: {e}")))?,
        _ => return Err(CliError::parse("line 1", "expected `m,<dimension>`")),
    };
    if m == 0 {
        return Err(CliError::parse("line 1", "dimension must be positive"));
    }
    let width = 1 + m * (m + 1) / 2;
    let header = rows
        .next()
        .ok_or_else(|| CliError::parse("line 2", "missing header row"))?
        .map_err(|e| CliError::parse("line 2", e))?;
    if header.len() != width {
        return Err(CliError::parse(
            format!("line {}", line_of(&header)),
            format!("header has {} columns, expected {width}", header.len()),
        ));
    }

    let mut points = Vec::new();
    let mut ids = Vec::new();
    for row in rows {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::parse(format!("line {line}"), e)
        })?;
        let line = line_of(&row);
        if row.len() != width {
            return Err(CliError::parse(
                format!("line {line}"),
                format!("{} columns, expected {width}", row.len()),
            ));
        }
        let mut upper = Vec::with_capacity(width - 1);
        for (k, field) in row.iter().skip(1).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|e| CliError::parse(format!("line {line} column {}", k + 2), format!("`{field}`: {e}")))?;
            upper.push(v);
        }
        let mut matrix = vec![vec![0.0; m]; m];
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                matrix[i][j] = upper[k];
                matrix[j][i] = upper[k];
                k += 1;
            }
        }
        let id = row[0].to_string();
        let name = format!("{} at line {line}", record_name(points.len(), Some(&id)));
        points.push(validate_matrix(&name, &matrix)?);
        ids.push(id);
    }
    assemble(points, ids)
}

pub fn to_json(data: &Dataset) -> String {
    let records: Vec<MatrixRecord> = data
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| MatrixRecord {
            id: Some(data.label(i)),
            matrix: p.to_rows(),
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("finite matrices serialize")
}

pub fn csv_header(m: usize) -> Vec<String> {
    let mut header = vec!["id".to_string()];
    for i in 0..m {
        for j in i..m {
            header.push(format!("a{}_{}", i + 1, j + 1));
        }
    }
    header
}

pub fn upper_triangle(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.len();
    (0..m).flat_map(|i| (i..m).map(move |j| rows[i][j])).collect()
}

pub fn to_csv(data: &Dataset) -> String {
    let m = data.dim();
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(["m".to_string(), m.to_string()]).expect("in-memory write");
    w.write_record(csv_header(m)).expect("in-memory write");
    for (i, p) in data.points().iter().enumerate() {
        let mut row = vec![data.label(i)];
        row.extend(upper_triangle(&p.to_rows()).iter().map(|v| v.to_string()));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn serialize(data: &Dataset, format: Format) -> String {
    match format {
        Format::Json => to_json(data),
        Format::Csv => to_csv(data),
    }
}

/// A matrix given inline as JSON (`[[...]]` or a bare number for `m = 1`)
/// or as the path of a file holding such JSON.
pub fn matrix_argument(arg: &str) -> CliResult<Vec<Vec<f64>>> {
    let text = inline_or_file(arg)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::parse(format!("argument `{arg}`"), e))?;
    matrix_from_value(&value).ok_or_else(|| CliError::parse(format!("argument `{arg}`"), "expected a matrix"))
}

pub(crate) fn inline_or_file(arg: &str) -> CliResult<String> {
    let trimmed = arg.trim_start();
    let inline = trimmed.starts_with(['[', '{', '-', '+', '.']) || trimmed.starts_with(|c: char| c.is_ascii_digit());
    if inline {
        Ok(arg.to_string())
    } else {
        read_text(Path::new(arg))
    }
}

pub(crate) fn matrix_from_value(v: &serde_json::Value) -> Option<Vec<Vec<f64>>> {
    if let Some(x) = v.as_f64() {
        return Some(vec![vec![x]]);
    }
    v.as_array()?
        .iter()
        .map(|row| row.as_array()?.iter().map(|x| x.as_f64()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_examples() {
        let d = parse_json(r#"[{"id": "a", "matrix": [[2, 0.5], [0.5, 1]]}]"#).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.label(0), "a");
        let asym = parse_json(r#"[{"matrix": [[1, 2], [0, 1]]}]"#).unwrap_err();
        assert!(matches!(asym, CliError::Validation(ref m) if m.contains("symmetric")), "{asym}");
        let indef = parse_json(r#"[{"matrix": [[1, 2], [2, 1]]}]"#).unwrap_err();
        assert!(matches!(indef, CliError::Validation(ref m) if m.contains("eigenvalue -1")), "{indef}");
    }

    #[test]
    fn json_errors_name_location() {
        let e = parse_json("[{\"matrix\": [[1, 0],\n [0, 1]]}, oops]").unwrap_err();
        assert!(matches!(e, CliError::Parse { ref location, .. } if location.starts_with("line 2")), "{e}");
        let e = parse_json(r#"[{"matrix": [[1]]}, {"matrix": [[1, 0], [0, 1]]}]"#).unwrap_err();
        assert!(matches!(e, CliError::Validation(ref m) if m.contains("mixed")));
        assert!(matches!(parse_json("[]").unwrap_err(), CliError::Validation(_)));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let d = parse_json(r#"[{"matrix": [[2, 0.5], [0.5000000000001, 1]]}]"#).unwrap();
        let a = d.points()[0].as_matrix();
        assert_eq!(a[(0, 1)], a[(1, 0)]);
    }

    #[test]
    fn csv_examples() {
        let text = "m,2\nid,a1_1,a1_2,a2_2\nx,2,0.5,1\ny,1,0,1\n";
        let d = parse_csv(text).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.points()[0].as_matrix()[(1, 0)], 0.5);
        let e = parse_csv("m,2\nid,a1_1,a1_2,a2_2\nx,1,2,1\n").unwrap_err();
        assert!(matches!(e, CliError::Validation(ref m) if m.contains("line 3")), "{e}");
        let e = parse_csv("m,2\nid,a1_1,a1_2,a2_2\nx,1,zero,1\n").unwrap_err();
        assert!(matches!(e, CliError::Parse { ref location, .. } if location == "line 3 column 3"), "{e}");
        assert!(matches!(parse_csv("dim,2\n").unwrap_err(), CliError::Parse { .. }));
    }

    #[test]
    fn serialization_round_trips() {
        let text = r#"[{"id": "p", "matrix": [[2.1, 0.3, 0.1], [0.3, 1.7, -0.2], [0.1, -0.2, 0.9]]},
                       {"id": "q", "matrix": [[1.0000000000000002, 0, 0], [0, 3, 0], [0, 0, 0.1]]}]"#;
        let d = parse_json(text).unwrap();
        for fmt in [Format::Json, Format::Csv] {
            let s = serialize(&d, fmt);
            let back = match fmt {
                Format::Json => parse_json(&s),
                Format::Csv => parse_csv(&s),
            }
            .unwrap();
            for (a, b) in d.points().iter().zip(back.points()) {
                assert_eq!(a.as_matrix(), b.as_matrix());
            }
            assert_eq!(back.labels(), d.labels());
        }
    }

    #[test]
    fn matrix_arguments() {
        assert_eq!(matrix_argument("4").unwrap(), vec![vec![4.0]]);
        assert_eq!(matrix_argument("[[1, 0], [0, 2]]").unwrap(), vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert!(matrix_argument("[1, 2]").is_err());
    }

    #[test]
    fn format_resolution() {
        assert_eq!(Format::resolve(None, Some(Path::new("a.CSV"))), Format::Csv);
        assert_eq!(Format::resolve(None, Some(Path::new("a.json"))), Format::Json);
        assert_eq!(Format::resolve(Some(Format::Csv), Some(Path::new("a.json"))), Format::Csv);
    }
}
