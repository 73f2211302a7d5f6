//! The (direction × β) quantile grid plus the median.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spd_radial::{distance, frechet_median, quantile, Dataset, Fit, OptimizerConfig, QuantileIndex, SpdPoint};

use crate::dataset::csv_header;
use crate::dataset::upper_triangle;
use crate::directions::{DirectionRecord, NamedDirection};
use crate::error::{CliError, CliResult};
use crate::glyph::EllipsoidGlyph;

pub const DEFAULT_BETAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 0.98];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileRecord {
    pub id: String,
    /// `None` for the median record.
    pub direction: Option<String>,
    pub beta: f64,
    pub converged: bool,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub glyph: Option<EllipsoidGlyph>,
    pub loss: Option<f64>,
    pub gradient_norm: Option<f64>,
    pub iterations: Option<usize>,
    pub distance_from_median: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileReport {
    pub dimension: usize,
    pub sample_size: usize,
    pub betas: Vec<f64>,
    pub directions: Vec<DirectionRecord>,
    /// Median first, then by direction in input order and β ascending.
    pub records: Vec<QuantileRecord>,
}

impl QuantileReport {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

fn record(id: String, direction: Option<String>, beta: f64, fit: Result<Fit, String>, median: Option<&SpdPoint>) -> QuantileRecord {
    match fit {
        Ok(fit) => QuantileRecord {
            glyph: Some(EllipsoidGlyph::from_point(id.clone(), &fit.point)),
            id,
            direction,
            beta,
            converged: true,
            matrix: Some(fit.point.to_rows()),
            loss: Some(fit.loss),
            gradient_norm: Some(fit.gradient_norm),
            iterations: Some(fit.iterations),
            distance_from_median: median.map(|m| distance(m, &fit.point).expect("same dimension")),
            error: None,
        },
        Err(e) => QuantileRecord {
            id,
            direction,
            beta,
            converged: false,
            matrix: None,
            glyph: None,
            loss: None,
            gradient_norm: None,
            iterations: None,
            distance_from_median: None,
            error: Some(e),
        },
    }
}

pub fn validate_betas(betas: &[f64]) -> CliResult<Vec<f64>> {
    if betas.is_empty() {
        return Err(CliError::Usage("at least one beta is required".into()));
    }
    if let Some(b) = betas.iter().find(|b| !(0.0..1.0).contains(*b)) {
        return Err(CliError::Usage(format!("beta {b} is outside [0, 1)")));
    }
    let mut sorted = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

/// The median, needed before directions can be built from it.
pub fn median(data: &Dataset, cfg: &OptimizerConfig) -> Result<Fit, String> {
    frechet_median(data, cfg).map_err(|e| e.to_string())
}

/// Computes every cell in parallel. Failed cells are reported in their
/// record and do not stop the grid.
pub fn quantile_grid(
    data: &Dataset,
    median_fit: Result<Fit, String>,
    directions: &[NamedDirection],
    betas: &[f64],
    cfg: &OptimizerConfig,
) -> CliResult<QuantileReport> {
    let betas = validate_betas(betas)?;
    let cells: Vec<(usize, f64)> = (0..directions.len())
        .flat_map(|d| betas.iter().map(move |&b| (d, b)))
        .collect();
    let fits: Vec<Result<Fit, String>> = cells
        .par_iter()
        .map(|&(d, beta)| {
            let index = QuantileIndex::new(beta, directions[d].xi.clone()).map_err(|e| e.to_string())?;
            quantile(data, &index, cfg).map_err(|e| e.to_string())
        })
        .collect();

    let median_point = median_fit.as_ref().ok().map(|f| f.point.clone());
    let mut records = vec![record("median".into(), None, 0.0, median_fit, median_point.as_ref())];
    for (&(d, beta), fit) in cells.iter().zip(fits) {
        let id = format!("{}@{}", directions[d].id, beta);
        records.push(record(id, Some(directions[d].id.clone()), beta, fit, median_point.as_ref()));
    }
    Ok(QuantileReport {
        dimension: data.dim(),
        sample_size: data.len(),
        betas,
        directions: directions.iter().map(DirectionRecord::from).collect(),
        records,
    })
}

pub fn report_to_csv(report: &QuantileReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["id", "direction", "beta", "converged", "loss", "gradient_norm", "iterations", "distance_from_median"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(csv_header(report.dimension).into_iter().skip(1));
    header.push("error".into());
    w.write_record(&header).expect("in-memory write");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.records {
        let mut row = vec![
            r.id.clone(),
            r.direction.clone().unwrap_or_default(),
            r.beta.to_string(),
            r.converged.to_string(),
            opt(r.loss),
            opt(r.gradient_norm),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(r.distance_from_median),
        ];
        match &r.matrix {
            Some(m) => row.extend(upper_triangle(m).iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), report.dimension * (report.dimension + 1) / 2)),
        }
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
