use std::path::PathBuf;

use clap::{Parser, Subcommand};
use expgram::oracle::PrecisionSpec;

use crate::commands::{self, EtaOptions};
use crate::error::CliError;
use crate::experiment::{ExperimentConfig, ExperimentId, OutputFormat, DEFAULT_SEED, GALLERY_REPETITIONS};

#[derive(Debug, Parser)]
#[command(name = "expgram", version, about = "Matrix exponential and controllability Gramian factor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute e^{tA} and the Cholesky factor of the Gramian over [0, t].
    Compute {
        /// File holding A (n×n).
        a: PathBuf,
        /// File holding B (n×m).
        b: PathBuf,
        /// Horizon.
        #[arg(long = "t", default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        /// Output prefix; writes {prefix}_phi.txt and {prefix}_u.txt.
        #[arg(long, default_value = "expgram")]
        out: String,
    },
    /// Run an experiment and emit one record per case.
    Experiment {
        #[arg(value_enum)]
        id: ExperimentId,
        /// Report file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Reference precision in decimal digits.
        #[arg(long, default_value_t = PrecisionSpec::DEFAULT_DIGITS)]
        digits: u32,
        /// Smallest dimension (integrator, laguerre).
        #[arg(long)]
        n_min: Option<usize>,
        /// Largest dimension (integrator, laguerre).
        #[arg(long)]
        n_max: Option<usize>,
        /// Laguerre pole locations.
        #[arg(long, value_delimiter = ',', default_values_t = crate::experiment::DEFAULT_LAMBDAS)]
        lambda: Vec<f64>,
        /// Gallery repetitions per matrix and input width.
        #[arg(long, default_value_t = GALLERY_REPETITIONS)]
        reps: usize,
        /// Include the gallery matrices excluded by default.
        #[arg(long)]
        hard: bool,
    },
    /// Check the transcribed coefficient tables against exact arithmetic.
    VerifyTables,
    /// Derive the η thresholds and compare with the stored table.
    DeriveEta {
        /// Orders to derive.
        #[arg(default_values_t = [3usize, 5, 7, 9, 13])]
        q: Vec<usize>,
        #[arg(long, default_value_t = expgram::bounds::DEFAULT_DIGITS)]
        digits: u32,
        /// Truncation order of the series.
        #[arg(long, default_value_t = expgram::bounds::DEFAULT_SERIES_ORDER)]
        order: usize,
        /// Grid points per interval.
        #[arg(long, default_value_t = expgram::bounds::DEFAULT_POINTS_PER_INTERVAL)]
        p: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
}

fn dimension_range(id: ExperimentId, lo: Option<usize>, hi: Option<usize>) -> Result<Option<(usize, usize)>, CliError> {
    let (dlo, dhi) = match id {
        ExperimentId::Integrator => (2, 30),
        ExperimentId::Laguerre => (1, 100),
        ExperimentId::Gallery => return Ok(None),
    };
    if lo.is_none() && hi.is_none() {
        return Ok(None);
    }
    let (lo, hi) = (lo.unwrap_or(dlo), hi.unwrap_or(dhi));
    if lo == 0 || lo > hi {
        return Err(CliError::Usage(format!("invalid dimension range {lo}..={hi}")));
    }
    Ok(Some((lo, hi)))
}

pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Compute { a, b, t, out: prefix } => commands::compute(&a, &b, t, &prefix, out),
        Command::Experiment {
            id,
            out: out_file,
            format,
            seed,
            digits,
            n_min,
            n_max,
            lambda,
            reps,
            hard,
        } => {
            let precision = PrecisionSpec::new(digits).map_err(|e| CliError::Usage(e.to_string()))?;
            if lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(CliError::Usage("lambda values must be positive".into()));
            }
            let config = ExperimentConfig {
                seed,
                precision,
                n_range: dimension_range(id, n_min, n_max)?,
                lambdas: lambda,
                repetitions: reps,
                hard,
            };
            commands::experiment(id, &config, format, out_file.as_deref(), out)
        }
        Command::VerifyTables => commands::verify(out),
        Command::DeriveEta {
            q,
            digits,
            order,
            p,
            format,
        } => {
            if p < 2 {
                return Err(CliError::Usage("--p must be at least 2".into()));
            }
            if let Some(&bad) = q.iter().find(|&&q| !(1..=21).contains(&q)) {
                return Err(CliError::Usage(format!("q must lie in 1..=21, got {bad}")));
            }
            let opts = EtaOptions {
                digits,
                series_order: order,
                points: p,
            };
            commands::derive_eta(&q, &opts, format, out)
        }
    }
}
