//! Boundary directions for the quantile grid: a deterministic preset or a
//! JSON file of `{"id": ..., "base": [[...]], "dir": [[...]]}` objects.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use spd_radial::geometry::tangent_basis;
use spd_radial::{log_map, BoundaryDirection, Dataset, SpdPoint, SymmetricMatrix};

use crate::dataset::{read_text, validate_matrix};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct NamedDirection {
    pub id: String,
    pub xi: BoundaryDirection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub base: Vec<Vec<f64>>,
    pub dir: Vec<Vec<f64>>,
}

impl From<&NamedDirection> for DirectionRecord {
    fn from(d: &NamedDirection) -> Self {
        DirectionRecord {
            id: Some(d.id.clone()),
            base: d.xi.base().to_rows(),
            dir: d.xi.dir().to_rows(),
        }
    }
}

pub fn direction_from_record(what: &str, r: &DirectionRecord) -> CliResult<BoundaryDirection> {
    let base = validate_matrix(&format!("{what} base"), &r.base)?;
    let dir = SymmetricMatrix::from_rows(&r.dir).map_err(|e| CliError::Validation(format!("{what} dir: {e}")))?;
    BoundaryDirection::new(base, dir).map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

pub fn parse_directions(text: &str) -> CliResult<Vec<NamedDirection>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::parse(format!("line {} column {}", e.line(), e.column()), e))?;
    let records: Vec<DirectionRecord> = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|r| vec![r])
    }
    .map_err(|e| CliError::parse("directions", e))?;
    if records.is_empty() {
        return Err(CliError::Validation("no directions given".into()));
    }
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let id = r.id.clone().unwrap_or_else(|| format!("d{i}"));
            let xi = direction_from_record(&format!("direction {i}"), r)?;
            Ok(NamedDirection { id, xi })
        })
        .collect()
}

pub fn load_directions(path: &Path) -> CliResult<Vec<NamedDirection>> {
    parse_directions(&read_text(path)?)
}

/// Eigen-directions of the log-scatter of the data around `center`, in
/// normal coordinates at `center`, descending by variance. Each vector's
/// largest-magnitude entry is made positive.
pub fn log_scatter_axes(data: &Dataset, center: &SpdPoint) -> CliResult<(Vec<f64>, Vec<DVector<f64>>)> {
    let basis = tangent_basis(center);
    let k = basis.len();
    let mut scatter = DMatrix::zeros(k, k);
    for x in data.points() {
        let v = log_map(center, x)?;
        let c = DVector::from_iterator(
            k,
            basis.iter().map(|e| spd_radial::metric_inner(center, e, &v).expect("same dimension")),
        );
        scatter += &c * c.transpose();
    }
    scatter /= data.len() as f64;
    let eig = spd_radial::eig_sym(&SymmetricMatrix::from_matrix(scatter)?)?;
    let vectors = (0..k)
        .map(|j| {
            let mut v = eig.eigenvectors.column(j).into_owned();
            let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if pivot < 0.0 {
                v.neg_mut();
            }
            v
        })
        .collect();
    Ok((eig.eigenvalues.iter().copied().collect(), vectors))
}

/// `±e_1, ±e_2, ±e_3` and `±(e_1+e_2+e_3)/√3` for the top three
/// log-scatter axes `e_k` at `center` (fewer axes when the tangent space is
/// smaller): eight directions for `m ≥ 2`, two for `m = 1`.
pub fn preset(data: &Dataset, center: &SpdPoint) -> CliResult<Vec<NamedDirection>> {
    let (_, axes) = log_scatter_axes(data, center)?;
    let basis = tangent_basis(center);
    let top: Vec<&DVector<f64>> = axes.iter().take(3).collect();
    let to_tangent = |c: &DVector<f64>| {
        let mut v = SymmetricMatrix::zeros(center.dim());
        for (e, w) in basis.iter().zip(c.iter()) {
            v = v.add(&e.scale(*w)).expect("same dimension");
        }
        v
    };
    let mut coords: Vec<(String, DVector<f64>)> = Vec::new();
    for (j, e) in top.iter().enumerate() {
        coords.push((format!("+axis{}", j + 1), (*e).clone()));
        coords.push((format!("-axis{}", j + 1), -(*e).clone()));
    }
    if top.len() > 1 {
        let mixed = top.iter().fold(DVector::zeros(basis.len()), |acc, e| acc + *e) / (top.len() as f64).sqrt();
        coords.push(("+mixed".into(), mixed.clone()));
        coords.push(("-mixed".into(), -mixed));
    }
    coords
        .into_iter()
        .map(|(id, c)| {
            let xi = BoundaryDirection::new(center.clone(), to_tangent(&c))?;
            Ok(NamedDirection { id, xi })
        })
        .collect()
}
