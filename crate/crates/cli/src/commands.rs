//! Subcommand implementations. Each writes human-readable output to `out`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use expgram::bounds::{self, find_eta, BOUND_TABLE};
use expgram::coefficients::{verify_tables, SUPPORTED_ORDERS};
use expgram::matrix::one_norm;
use expgram::{exp_and_gram, Problem};
use serde::Serialize;

use crate::error::CliError;
use crate::experiment::{self, ExperimentConfig, ExperimentId, OutputFormat};
use crate::matrix_io::{read_matrix, write_matrix};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

/// Output files written by [`compute`].
pub fn output_paths(prefix: &str) -> (PathBuf, PathBuf) {
    (
        PathBuf::from(format!("{prefix}_phi.txt")),
        PathBuf::from(format!("{prefix}_u.txt")),
    )
}

pub fn compute(a_file: &Path, b_file: &Path, t: f64, out_prefix: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let a = read_matrix(a_file)?;
    let b = read_matrix(b_file)?;
    let problem = Problem::with_horizon(a, b, t)?;
    let result = exp_and_gram(&problem)?;
    let (phi_path, u_path) = output_paths(out_prefix);
    write_matrix(&result.phi, &phi_path)?;
    write_matrix(&result.u, &u_path)?;
    let norm = one_norm(&problem.a().scale(t));
    writeln!(
        out,
        "q={} s={} norm1_tA={norm:.6e}",
        result.order_scaling.q, result.order_scaling.s
    )
    .map_err(stdout_err)
}

pub fn experiment(
    id: ExperimentId,
    config: &ExperimentConfig,
    format: OutputFormat,
    out_file: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let report = experiment::run(id, config, format)?;
    match out_file {
        Some(path) => {
            let f = File::create(path).map_err(io_err(path))?;
            let mut w = BufWriter::new(f);
            report.write(&mut w)?;
            w.flush().map_err(io_err(path))?;
            writeln!(out, "wrote {} cases to {}", report.cases.len(), path.display()).map_err(stdout_err)
        }
        None => report.write(out),
    }
}

pub fn verify(out: &mut dyn Write) -> Result<(), CliError> {
    let mut failed = Vec::new();
    for q in SUPPORTED_ORDERS {
        let ok = verify_tables(q);
        writeln!(out, "q={q:<2} {}", if ok { "ok" } else { "MISMATCH" }).map_err(stdout_err)?;
        if !ok {
            failed.push(q);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("coefficient tables for q = {failed:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaRow {
    pub q: usize,
    pub derived: f64,
    pub table: f64,
    pub matches: bool,
}

pub struct EtaOptions {
    pub digits: u32,
    pub series_order: usize,
    pub points: usize,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions {
            digits: bounds::DEFAULT_DIGITS,
            series_order: bounds::DEFAULT_SERIES_ORDER,
            points: bounds::DEFAULT_POINTS_PER_INTERVAL,
        }
    }
}

pub fn derive_eta_rows(orders: &[usize], opts: &EtaOptions) -> Result<Vec<EtaRow>, CliError> {
    orders
        .iter()
        .map(|&q| {
            let derived = find_eta(q, opts.digits, opts.series_order, opts.points)?;
            let table = BOUND_TABLE.get(q).map(|r| r.eta).ok_or(expgram::Error::UnsupportedOrder(q))?;
            Ok(EtaRow {
                q,
                derived,
                table,
                matches: bounds::matches_table(q, derived),
            })
        })
        .collect()
}

pub fn derive_eta(orders: &[usize], opts: &EtaOptions, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = derive_eta_rows(orders, opts)?;
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out).map_err(stdout_err)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "q,derived,table,matches").map_err(stdout_err)?;
            for r in &rows {
                writeln!(out, "{},{:.5e},{:.1e},{}", r.q, r.derived, r.table, r.matches).map_err(stdout_err)?;
            }
        }
    }
    let bad: Vec<usize> = rows.iter().filter(|r| !r.matches).map(|r| r.q).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("derived eta differs from the table for q = {bad:?}")))
    }
}
