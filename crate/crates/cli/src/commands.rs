use std::io::Write;
use std::path::Path;

use serde::Serialize;
use spd_radial::{busemann as busemann_value, metric_norm, radial_field, radial_field_oracle, BoundaryDirection, Dataset, OptimizerConfig, SpdPoint};

use crate::dataset::{self, inline_or_file, load_dataset, validate_matrix, Format};
use crate::directions::{self, direction_from_record, DirectionRecord};
use crate::error::{CliError, CliResult};
use crate::glyph::EllipsoidGlyph;
use crate::grid::{self, QuantileReport};
use crate::synth as synthetic;
use crate::{BusemannArgs, EllipsoidsArgs, Optimizer, QuantilesArgs, RadialArgs, SynthArgs, Target, ValidateArgs};

pub fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| if text.ends_with('\n') { Ok(()) } else { stdout.write_all(b"\n") })
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable output")
}

pub fn optimizer_config(o: &Optimizer) -> CliResult<OptimizerConfig> {
    let mut cfg = match &o.settings {
        Some(s) => OptimizerConfig::from_key_values(s).map_err(|e| CliError::Usage(e.to_string()))?,
        None => OptimizerConfig::default(),
    };
    if let Some(t) = o.tol {
        cfg.tolerance = t;
    }
    if let Some(n) = o.max_iter {
        cfg.max_iter = n;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn load(input: &Path, format: Option<Format>) -> CliResult<Dataset> {
    load_dataset(input, Format::resolve(format, Some(input)))
}

/// Runs the grid; the report is written even when some records failed,
/// which is then signalled by a convergence error.
pub fn quantiles(a: &QuantilesArgs) -> CliResult<()> {
    let cfg = optimizer_config(&a.optimizer)?;
    let betas = grid::validate_betas(&a.betas)?;
    let data = load(&a.input, a.input_format)?;
    let median = grid::median(&data, &cfg);
    let dirs = if a.directions == "preset" {
        let center = median
            .as_ref()
            .map_err(|e| CliError::Convergence(format!("median needed for preset directions: {e}")))?;
        directions::preset(&data, &center.point)?
    } else {
        directions::load_directions(Path::new(&a.directions))?
    };
    if let Some(d) = dirs.iter().find(|d| d.xi.dim() != data.dim()) {
        return Err(CliError::Validation(format!(
            "direction {} has dimension {}, data has {}",
            d.id,
            d.xi.dim(),
            data.dim()
        )));
    }
    let report = grid::quantile_grid(&data, median, &dirs, &betas, &cfg)?;
    let text = match a.output.resolved_format() {
        Format::Json => to_json(&report),
        Format::Csv => grid::report_to_csv(&report),
    };
    write_output(a.output.out.as_deref(), &text)?;
    let failed = report.records.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        return Err(CliError::Convergence(format!(
            "{failed} of {} records did not converge",
            report.records.len()
        )));
    }
    Ok(())
}

pub fn parse_direction(arg: &str) -> CliResult<BoundaryDirection> {
    let text = inline_or_file(arg)?;
    let record: DirectionRecord =
        serde_json::from_str(&text).map_err(|e| CliError::parse(format!("direction `{arg}`"), e))?;
    direction_from_record("direction", &record)
}

fn targets(t: &Target) -> CliResult<Vec<(String, SpdPoint)>> {
    match (&t.point, &t.input) {
        (Some(arg), _) => {
            let rows = dataset::matrix_argument(arg)?;
            Ok(vec![("point".into(), validate_matrix("point", &rows)?)])
        }
        (None, Some(path)) => {
            let data = load(path, t.input_format)?;
            Ok(data.points().iter().enumerate().map(|(i, p)| (data.label(i), p.clone())).collect())
        }
        (None, None) => Err(CliError::Usage("either --point or --input is required".into())),
    }
}

#[derive(Debug, Serialize)]
pub struct OracleOutput {
    pub t: f64,
    pub field: Vec<Vec<f64>>,
    pub frobenius_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct RadialOutput {
    pub id: String,
    pub field: Vec<Vec<f64>>,
    pub metric_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOutput>,
}

pub fn radial(a: &RadialArgs) -> CliResult<()> {
    let xi = parse_direction(&a.target.direction)?;
    let mut rows = Vec::new();
    for (id, x) in targets(&a.target)? {
        let field = radial_field(&xi, &x)?;
        let oracle = match a.oracle_t {
            Some(t) => {
                let o = radial_field_oracle(&xi, &x, t)?;
                let gap = (o.as_matrix() - field.as_matrix()).norm();
                Some(OracleOutput {
                    t,
                    field: o.to_rows(),
                    frobenius_gap: gap,
                })
            }
            None => None,
        };
        rows.push(RadialOutput {
            id,
            metric_norm: metric_norm(&x, &field)?,
            field: field.to_rows(),
            oracle,
        });
    }
    let text = match a.output.resolved_format() {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let m = xi.dim();
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["id".to_string(), "metric_norm".to_string()];
            header.extend(dataset::csv_header(m).into_iter().skip(1));
            if a.oracle_t.is_some() {
                header.push("oracle_t".into());
                header.push("oracle_gap".into());
            }
            w.write_record(&header).expect("in-memory write");
            for r in &rows {
                let mut row = vec![r.id.clone(), r.metric_norm.to_string()];
                row.extend(dataset::upper_triangle(&r.field).iter().map(|v| v.to_string()));
                if let Some(o) = &r.oracle {
                    row.push(o.t.to_string());
                    row.push(o.frobenius_gap.to_string());
                }
                w.write_record(&row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    };
    write_output(a.output.out.as_deref(), &text)
}

#[derive(Debug, Serialize)]
pub struct BusemannOutput {
    pub id: String,
    pub value: f64,
}

pub fn busemann(a: &BusemannArgs) -> CliResult<()> {
    let xi = parse_direction(&a.target.direction)?;
    let rows = targets(&a.target)?
        .into_iter()
        .map(|(id, x)| Ok(BusemannOutput { value: busemann_value(&xi, &x, a.tol)?, id }))
        .collect::<CliResult<Vec<_>>>()?;
    let text = match a.output.resolved_format() {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("id,value\n");
            for r in &rows {
                s.push_str(&format!("{},{}\n", r.id, r.value));
            }
            s
        }
    };
    write_output(a.output.out.as_deref(), &text)
}

/// Glyphs of a dataset, or of every converged record of a quantile report.
pub fn glyphs_from_file(path: &Path, format: Option<Format>) -> CliResult<Vec<EllipsoidGlyph>> {
    if Format::resolve(format, Some(path)) == Format::Json {
        let text = dataset::read_text(path)?;
        if let Ok(report) = serde_json::from_str::<QuantileReport>(&text) {
            return report
                .records
                .iter()
                .filter_map(|r| r.matrix.as_ref().map(|m| (r, m)))
                .map(|(r, m)| Ok(EllipsoidGlyph::from_point(r.id.clone(), &validate_matrix(&r.id, m)?)))
                .collect();
        }
        let data = dataset::parse_json(&text)?;
        return Ok(dataset_glyphs(&data));
    }
    Ok(dataset_glyphs(&load(path, format)?))
}

pub fn dataset_glyphs(data: &Dataset) -> Vec<EllipsoidGlyph> {
    data.points()
        .iter()
        .enumerate()
        .map(|(i, p)| EllipsoidGlyph::from_point(data.label(i), p))
        .collect()
}

pub fn glyphs_to_csv(glyphs: &[EllipsoidGlyph]) -> String {
    let m = glyphs.first().map_or(0, |g| g.axis_lengths.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["center_id".to_string()];
    header.extend((1..=m).map(|j| format!("length{j}")));
    for i in 1..=m {
        header.extend((1..=m).map(|j| format!("axes{i}_{j}")));
    }
    w.write_record(&header).expect("in-memory write");
    for g in glyphs {
        let mut row = vec![g.center_id.clone()];
        row.extend(g.axis_lengths.iter().map(|v| v.to_string()));
        row.extend(g.axes.iter().flatten().map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn ellipsoids(a: &EllipsoidsArgs) -> CliResult<()> {
    let glyphs = glyphs_from_file(&a.input, a.input_format)?;
    let text = match a.output.resolved_format() {
        Format::Json => to_json(&glyphs),
        Format::Csv => glyphs_to_csv(&glyphs),
    };
    write_output(a.output.out.as_deref(), &text)
}

#[derive(Debug, Serialize)]
struct ValidationSummary {
    valid: bool,
    count: usize,
    dimension: usize,
}

pub fn validate(a: &ValidateArgs) -> CliResult<()> {
    let data = load(&a.input, a.format)?;
    let summary = ValidationSummary {
        valid: true,
        count: data.len(),
        dimension: data.dim(),
    };
    write_output(None, &serde_json::to_string(&summary).expect("serializable"))
}

pub fn synth(a: &SynthArgs) -> CliResult<()> {
    let data = synthetic::generate(a.kind, a.n, a.m, a.spread, a.seed)?;
    write_output(a.output.out.as_deref(), &dataset::serialize(&data, a.output.resolved_format()))
}
