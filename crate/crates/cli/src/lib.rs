//! Experiment runner: builds an all-at-once problem from an
//! [`ExperimentConfig`], solves it or analyses its spectrum, and reports the
//! outcome as CSV rows.

pub mod config;
pub mod suite;

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use pintau_core::analysis::{preconditioned_spectrum, unpreconditioned_spectrum, SpectrumReport};
use pintau_core::krylov::cgne_unpreconditioned;
use pintau_core::{
    build_circulant, build_rhs, build_tau, cgne, make_stencil, minres_all_at_once, AllAtOnceOperator, BlockVector,
    Error, SolveOptions, SpectralPreconditioner, DEFAULT_DENSE_GUARD,
};
use serde::Serialize;

pub use config::{ConfigArgs, EquationChoice, ExperimentConfig, Mode, PrecondChoice, SchemeChoice, SolverChoice};
pub use suite::{run_suite, TableId};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub equation: String,
    pub scheme: String,
    pub n: usize,
    pub m_plus_1: usize,
    pub dof: usize,
    pub preconditioner: String,
    pub solver: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_true_relres: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub row: RunRow,
    /// `None` when the preconditioner could not be built or the solver broke down.
    pub solution: Option<BlockVector>,
}

fn failed_row(cfg: &ExperimentConfig, scheme: String, relres: f64) -> RunRow {
    RunRow {
        equation: cfg.equation.name(),
        scheme,
        n: cfg.n,
        m_plus_1: cfg.m_plus_1,
        dof: cfg.dof(),
        preconditioner: cfg.precond.name(),
        solver: cfg.solver.name(),
        iterations: cfg.maxit,
        converged: false,
        final_true_relres: relres,
        wall_time_seconds: 0.0,
    }
}

fn build_preconditioner(cfg: &ExperimentConfig, op: &AllAtOnceOperator) -> pintau_core::Result<Option<SpectralPreconditioner>> {
    match cfg.precond {
        PrecondChoice::None => Ok(None),
        PrecondChoice::Tau => build_tau(op.stencil(), op.spatial(), op.n()).map(Some),
        PrecondChoice::Circulant => build_circulant(op.stencil(), op.spatial(), op.n()).map(Some),
    }
}

/// Builds the operator for `cfg`.
pub fn build_operator(cfg: &ExperimentConfig) -> Result<AllAtOnceOperator, CliError> {
    cfg.validate()?;
    let spec = cfg.problem_spec()?;
    let spatial = spec.build_spatial()?;
    let stencil = make_stencil(&spec)?;
    Ok(AllAtOnceOperator::new(cfg.n, spatial, stencil)?)
}

/// Solves the configured problem. A singular circulant symbol or a diverging
/// solver yields a row with `converged = false` and `iterations = maxit`
/// rather than an error.
pub fn solve(cfg: &ExperimentConfig) -> Result<SolveOutcome, CliError> {
    let op = build_operator(cfg)?;
    let spec = cfg.problem_spec()?;
    let scheme = spec.scheme.to_string();
    let rhs = build_rhs(&spec, op.spatial(), op.stencil())?;
    let opts = SolveOptions::new(cfg.tol, cfg.maxit).with_monitor(cfg.residual.into());
    let precond = match build_preconditioner(cfg, &op) {
        Ok(p) => p,
        // x = 0 leaves the whole right-hand side as residual.
        Err(Error::SingularSymbol { .. }) => {
            return Ok(SolveOutcome {
                row: failed_row(cfg, scheme, 1.0),
                solution: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let result = match (cfg.solver, &precond) {
        (SolverChoice::Minres, p) => minres_all_at_once(&op, p.as_ref(), &rhs, &opts),
        (SolverChoice::Cgne, Some(p)) => cgne(&op, p, &rhs, &opts),
        (SolverChoice::Cgne, None) => cgne_unpreconditioned(&op, &rhs, &opts),
    };
    match result {
        Ok((x, report)) => Ok(SolveOutcome {
            row: RunRow {
                equation: cfg.equation.name(),
                scheme,
                n: cfg.n,
                m_plus_1: cfg.m_plus_1,
                dof: cfg.dof(),
                preconditioner: cfg.precond.name(),
                solver: cfg.solver.name(),
                iterations: report.iterations,
                converged: report.converged,
                final_true_relres: report.final_true_relres,
                wall_time_seconds: report.wall_time,
            },
            solution: Some(x),
        }),
        Err(Error::Divergence { .. }) => Ok(SolveOutcome {
            row: failed_row(cfg, scheme, f64::NAN),
            solution: None,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Dense spectrum of `Y T` or of the preconditioned matrix.
pub fn spectrum(cfg: &ExperimentConfig) -> Result<SpectrumReport, CliError> {
    let op = build_operator(cfg)?;
    Ok(match build_preconditioner(cfg, &op)? {
        None => unpreconditioned_spectrum(&op, DEFAULT_DENSE_GUARD, cfg.epsilon)?,
        Some(p) => preconditioned_spectrum(&op, &p, DEFAULT_DENSE_GUARD, cfg.epsilon)?,
    })
}

/// Writes rows as CSV with a header.
pub fn write_rows<W: Write>(w: W, rows: &[RunRow]) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Appends rows to `path`, writing the header only when the file is new or empty.
pub fn append_rows(path: &Path, rows: &[RunRow]) -> Result<(), CliError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    let mut wtr = csv::WriterBuilder::new().has_headers(empty).from_writer(&mut file);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// What a single `run` produced.
#[derive(Debug, Clone)]
pub enum RunOutput {
    Solve(RunRow),
    Spectrum(SpectrumReport),
}

/// Runs one experiment and writes its output: a CSV row (appended to `out`, or
/// printed with a header) or a spectrum dump (to `out`, or stdout).
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    match cfg.mode {
        Mode::Solve => {
            let row = solve(cfg)?.row;
            match &cfg.out {
                Some(path) => append_rows(path, std::slice::from_ref(&row))?,
                None => write_rows(io::stdout().lock(), std::slice::from_ref(&row))?,
            }
            Ok(RunOutput::Solve(row))
        }
        Mode::Spectrum => {
            let report = spectrum(cfg)?;
            match &cfg.out {
                Some(path) => {
                    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
                    report.write_dump(&mut w)?;
                    w.flush()?;
                }
                None => report.write_dump(io::stdout().lock())?,
            }
            Ok(RunOutput::Spectrum(report))
        }
    }
}
