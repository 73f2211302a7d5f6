//! `spdrad`: quantile grids, radial fields, Busemann values and ellipsoid
//! glyphs for datasets of SPD matrices.
//!
//! Exit codes are listed in [`error::exit`].

pub mod commands;
pub mod dataset;
pub mod directions;
pub mod error;
pub mod glyph;
pub mod grid;
pub mod synth;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use dataset::Format;
pub use error::{CliError, CliResult};
pub use glyph::EllipsoidGlyph;
pub use grid::{QuantileRecord, QuantileReport};

#[derive(Debug, Parser)]
#[command(name = "spdrad", version, about = "Radial fields and geometric quantiles for SPD matrix data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Median and (β, ξ)-quantiles over a grid of directions and betas.
    Quantiles(QuantilesArgs),
    /// Radial field of a boundary direction at one point or every data point.
    Radial(RadialArgs),
    /// Busemann function of a boundary direction.
    Busemann(BusemannArgs),
    /// Ellipsoid glyphs of a dataset or of a quantile report.
    Ellipsoids(EllipsoidsArgs),
    /// Parse and validate a dataset.
    Validate(ValidateArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the `--out` extension when omitted,
    /// JSON on standard output.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Output {
    pub fn resolved_format(&self) -> Format {
        Format::resolve(self.format, self.out.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct Optimizer {
    /// Stop when the gradient norm falls below this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Further optimizer settings as `key=value,...`.
    #[arg(long = "optimizer")]
    pub settings: Option<String>,
}

#[derive(Debug, Args)]
pub struct QuantilesArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Dataset format; inferred from the input extension when omitted.
    #[arg(long = "input-format", value_enum)]
    pub input_format: Option<Format>,
    #[arg(long, value_delimiter = ',', default_values_t = grid::DEFAULT_BETAS)]
    pub betas: Vec<f64>,
    /// `preset`, or a JSON file of `{id, base, dir}` objects.
    #[arg(long, default_value = "preset")]
    pub directions: String,
    #[command(flatten)]
    pub optimizer: Optimizer,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Boundary direction as JSON `{"base": M, "dir": M}` or a file holding it.
    #[arg(long)]
    pub direction: String,
    /// Evaluation point as a JSON matrix, a number for 1x1, or a file.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub point: Option<String>,
    /// Evaluate at every matrix of this dataset instead.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "input-format", value_enum, requires = "input")]
    pub input_format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct RadialArgs {
    #[command(flatten)]
    pub target: Target,
    /// Also evaluate the finite-t limit form and report its Frobenius gap.
    #[arg(long = "oracle-t")]
    pub oracle_t: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BusemannArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EllipsoidsArgs {
    /// A dataset, or a JSON quantile report.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "input-format", value_enum)]
    pub input_format: Option<Format>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Dataset format; inferred from the input extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = synth::Kind::Spread)]
    pub kind: synth::Kind,
    /// Standard deviation of the log-coordinates around the center.
    #[arg(long, default_value_t = 0.5)]
    pub spread: f64,
    #[command(flatten)]
    pub output: Output,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Quantiles(a) => commands::quantiles(&a),
        Command::Radial(a) => commands::radial(&a),
        Command::Busemann(a) => commands::busemann(&a),
        Command::Ellipsoids(a) => commands::ellipsoids(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}
