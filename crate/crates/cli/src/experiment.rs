//! Experiment harness: runs `exp_and_gram` over families of problems and
//! compares against the extended-precision references.

use std::io::Write;

use expgram::matrix::one_norm;
use expgram::oracle::{
    expm_reference, gramian_mfd, integrator_closed_form, integrator_pair, laguerre_pair,
    laguerre_reference, relative_error, BigMatrix, PrecisionSpec,
};
use expgram::{exp_and_gram, DenseMatrix, Problem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_LAMBDAS: [f64; 3] = [1.0, 2.5, 5.0];
pub const GALLERY_DIM: usize = 10;
pub const GALLERY_INPUTS: [usize; 3] = [1, 5, 10];
pub const GALLERY_REPETITIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExperimentId {
    Integrator,
    Laguerre,
    Gallery,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Integrator => "integrator",
            ExperimentId::Laguerre => "laguerre",
            ExperimentId::Gallery => "gallery",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub precision: PrecisionSpec,
    /// Inclusive dimension range; the experiment default when `None`.
    pub n_range: Option<(usize, usize)>,
    pub lambdas: Vec<f64>,
    pub repetitions: usize,
    /// Adds the gallery matrices that are excluded by default.
    pub hard: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: DEFAULT_SEED,
            precision: PrecisionSpec::default(),
            n_range: None,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            repetitions: GALLERY_REPETITIONS,
            hard: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CaseRecord {
    pub label: String,
    pub n: usize,
    pub m: usize,
    pub parameters: String,
    pub relative_error_gramian: f64,
    pub relative_error_cholesky: f64,
    pub relative_error_exp: f64,
    pub q: usize,
    pub s: u32,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub format: String,
    pub cases: Vec<CaseRecord>,
}

impl ExperimentReport {
    pub fn write(&self, out: &mut dyn Write) -> Result<(), CliError> {
        match self.format.as_str() {
            "json" => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out).map_err(|e| CliError::Report(e.to_string()))?;
            }
            _ => {
                let mut w = csv::Writer::from_writer(out);
                for c in &self.cases {
                    w.serialize(c)?;
                }
                w.flush().map_err(|e| CliError::Report(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Extended-precision references for one problem.
pub struct Reference {
    pub gramian: BigMatrix,
    pub factor: BigMatrix,
    pub exp: BigMatrix,
}

fn cholesky_reference(g: &BigMatrix, prec: PrecisionSpec) -> BigMatrix {
    g.cholesky_upper(&prec.agreement_tolerance())
}

pub fn evaluate(
    label: &str,
    parameters: String,
    problem: &Problem,
    reference: &Reference,
) -> Result<CaseRecord, CliError> {
    let r = exp_and_gram(problem)?;
    let mut u = r.u.clone();
    u.normalize_row_signs();
    let mut factor = reference.factor.clone();
    factor.normalize_row_signs();
    Ok(CaseRecord {
        label: label.to_string(),
        n: problem.dim(),
        m: problem.b().cols(),
        parameters,
        relative_error_gramian: relative_error(&r.gramian(), &reference.gramian),
        relative_error_cholesky: relative_error(&u, &factor),
        relative_error_exp: relative_error(&r.phi, &reference.exp),
        q: r.order_scaling.q,
        s: r.order_scaling.s,
    })
}

pub fn run(id: ExperimentId, config: &ExperimentConfig, format: OutputFormat) -> Result<ExperimentReport, CliError> {
    let cases = match id {
        ExperimentId::Integrator => integrator_cases(config)?,
        ExperimentId::Laguerre => laguerre_cases(config)?,
        ExperimentId::Gallery => gallery_cases(config)?,
    };
    Ok(ExperimentReport {
        experiment: id.name().to_string(),
        format: format.name().to_string(),
        cases,
    })
}

pub fn integrator_cases(config: &ExperimentConfig) -> Result<Vec<CaseRecord>, CliError> {
    let (lo, hi) = config.n_range.unwrap_or((2, 30));
    let prec = config.precision;
    let mut out = Vec::new();
    for n in lo..=hi {
        let problem = integrator_pair(n)?;
        let closed = integrator_closed_form(n)?;
        let reference = Reference {
            gramian: closed.gramian(prec),
            factor: closed.factor(prec),
            exp: expm_reference(problem.a(), prec),
        };
        out.push(evaluate("integrator", String::new(), &problem, &reference)?);
    }
    Ok(out)
}

pub fn laguerre_cases(config: &ExperimentConfig) -> Result<Vec<CaseRecord>, CliError> {
    let (lo, hi) = config.n_range.unwrap_or((1, 100));
    let prec = config.precision;
    let mut out = Vec::new();
    for &lambda in &config.lambdas {
        for n in lo..=hi {
            let problem = laguerre_pair(n, lambda)?;
            let gramian = laguerre_reference(problem.a(), prec)?;
            let reference = Reference {
                factor: cholesky_reference(&gramian, prec),
                exp: expm_reference(problem.a(), prec),
                gramian,
            };
            out.push(evaluate("laguerre", format!("lambda={lambda}"), &problem, &reference)?);
        }
    }
    Ok(out)
}

/// A gallery matrix with its label.
pub struct GalleryMatrix {
    pub label: String,
    pub a: DenseMatrix,
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// The fixed set of gallery matrices. The dense entry is drawn from `rng`.
pub fn gallery_matrices(rng: &mut ChaCha8Rng, hard: bool) -> Result<Vec<GalleryMatrix>, CliError> {
    let n = GALLERY_DIM;
    let mut out = vec![GalleryMatrix {
        label: "integrator".into(),
        a: integrator_pair(n)?.a().clone(),
    }];
    for lambda in DEFAULT_LAMBDAS {
        out.push(GalleryMatrix {
            label: format!("laguerre-{lambda}"),
            a: laguerre_pair(n, lambda)?.a().clone(),
        });
    }
    // Eigenvalues ±10^x for x on five equispaced points in [−1, 1].
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let x = -1.0 + 2.0 * (i % 5) as f64 / 4.0;
            let sign = if i < 5 { -1.0 } else { 1.0 };
            sign * 10f64.powf(x)
        })
        .collect();
    out.push(GalleryMatrix {
        label: "diagonal".into(),
        a: DenseMatrix::from_diagonal(&diag),
    });
    out.push(GalleryMatrix {
        label: "toeplitz".into(),
        a: DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => -2.0,
            1 => 1.0,
            _ => 0.0,
        }),
    });
    out.push(GalleryMatrix {
        label: "dense".into(),
        a: normal_matrix(rng, n, n),
    });
    // 2×2 rotation generators with frequencies 1..5.
    out.push(GalleryMatrix {
        label: "rotation".into(),
        a: DenseMatrix::from_fn(n, n, |i, j| {
            let w = (i / 2 + 1) as f64;
            if i / 2 != j / 2 || i == j {
                0.0
            } else if i % 2 == 0 {
                w
            } else {
                -w
            }
        }),
    });
    if hard {
        out.push(GalleryMatrix {
            label: "pascal".into(),
            a: DenseMatrix::from_fn(n, n, |i, j| if j <= i { binomial(i, j) } else { 0.0 }),
        });
        out.push(GalleryMatrix {
            label: "jordan-unstable".into(),
            a: DenseMatrix::from_fn(n, n, |i, j| match j as isize - i as isize {
                0 => 2.0,
                1 => 1.0e3,
                _ => 0.0,
            }),
        });
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn gallery_cases(config: &ExperimentConfig) -> Result<Vec<CaseRecord>, CliError> {
    let prec = config.precision;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = GALLERY_DIM;
    let mut out = Vec::new();

    // A = 0, B = 0: every quantity is exactly zero.
    for m in GALLERY_INPUTS {
        let problem = Problem::new(DenseMatrix::zeros(n, n), DenseMatrix::zeros(n, m))?;
        let reference = Reference {
            gramian: BigMatrix::zeros(n, n, prec.bits()),
            factor: BigMatrix::zeros(n, n, prec.bits()),
            exp: BigMatrix::identity(n, prec.bits()),
        };
        out.push(evaluate("zero", format!("m={m}"), &problem, &reference)?);
    }

    for g in gallery_matrices(&mut rng, config.hard)? {
        let exp = expm_reference(&g.a, prec);
        for m in GALLERY_INPUTS {
            for rep in 0..config.repetitions {
                let b = normal_matrix(&mut rng, n, m);
                let problem = Problem::new(g.a.clone(), b.clone())?;
                let gramian = gramian_mfd(&g.a, &b, prec)?;
                let reference = Reference {
                    factor: cholesky_reference(&gramian, prec),
                    exp: exp.clone(),
                    gramian,
                };
                let params = format!("rep={rep};norm1={:.6e}", one_norm(&g.a));
                out.push(evaluate(&g.label, params, &problem, &reference)?);
            }
        }
    }
    Ok(out)
}

/// Median of a nonempty list.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

/// Relative condition estimate used to scale exponential tolerances:
/// max(1, ‖A‖₁).
pub fn exp_condition_scale(a: &DenseMatrix) -> f64 {
    one_norm(a).max(1.0)
}
