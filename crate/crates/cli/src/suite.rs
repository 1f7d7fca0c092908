use clap::ValueEnum;

use crate::config::{EquationChoice, ExperimentConfig, PrecondChoice, SchemeChoice};
use crate::{solve, CliError, RunRow};

/// Reference experiment grids.
///
/// * `T1`, `T2`: 1D heat, Crank-Nicolson and BDF2, `n, m+1 ∈ {2^8..2^11}`.
/// * `T3`, `T4`: 2D heat, backward Euler and BDF2, `n = m+1 ∈ {2^5..2^8}`.
/// * `T5`, `T6`: 1D wave with the cosine bump, two-step and central schemes,
///   `n = m+1 ∈ {2^7..2^10}`.
/// * `T7`, `T8`: 2D wave with manufactured forcing, two-step and central,
///   `n = m+1 ∈ {2^5..2^8}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
}

impl TableId {
    /// Every row of the table, with the preconditioner left at its default.
    pub fn configs(self) -> Vec<ExperimentConfig> {
        let pow = |lo: u32, hi: u32| (lo..=hi).map(|k| 1usize << k);
        let square = |eq, scheme, dim, lo, hi| -> Vec<ExperimentConfig> {
            pow(lo, hi).map(|s| ExperimentConfig::new(eq, scheme, dim, s, s)).collect()
        };
        let grid = |scheme, theta: Option<f64>| -> Vec<ExperimentConfig> {
            pow(8, 11)
                .flat_map(|n| pow(8, 11).map(move |m1| (n, m1)))
                .map(|(n, m1)| {
                    let mut c = ExperimentConfig::new(EquationChoice::Heat, scheme, 1, n, m1);
                    c.theta = theta;
                    c
                })
                .collect()
        };
        use EquationChoice::*;
        use SchemeChoice::*;
        match self {
            TableId::T1 => grid(Theta, Some(0.5)),
            TableId::T2 => grid(Bdf2, None),
            TableId::T3 => square(Heat, Theta, 2, 5, 8).into_iter().map(|c| c.with_theta(1.0)).collect(),
            TableId::T4 => square(Heat, Bdf2, 2, 5, 8),
            TableId::T5 => square(Wave, Bdf2, 1, 7, 10),
            TableId::T6 => square(Wave, Central, 1, 7, 10),
            TableId::T7 => square(Wave, Bdf2, 2, 5, 8),
            TableId::T8 => square(Wave, Central, 2, 5, 8),
        }
    }
}

/// Runs every row of `table` with `DoF ≤ max_dof`, circulant then tau.
/// A failing row is reported on stderr and the suite moves on.
pub fn run_suite(
    table: TableId,
    max_dof: usize,
    tol: f64,
    maxit: usize,
    mut on_row: impl FnMut(&RunRow),
) -> Vec<RunRow> {
    let mut rows = Vec::new();
    for base in table.configs().into_iter().filter(|c| c.dof() <= max_dof) {
        for precond in [PrecondChoice::Circulant, PrecondChoice::Tau] {
            let mut cfg = base.clone().with_precond(precond);
            cfg.tol = tol;
            cfg.maxit = maxit;
            match solve(&cfg) {
                Ok(out) => {
                    on_row(&out.row);
                    rows.push(out.row);
                }
                Err(e) => eprintln!("{table:?} n={} m+1={} {}: {e}", cfg.n, cfg.m_plus_1, precond.name()),
            }
        }
    }
    rows
}

/// `run_suite` writing to a CSV file as rows complete.
pub fn run_suite_to_csv(
    table: TableId,
    max_dof: usize,
    tol: f64,
    maxit: usize,
    path: &std::path::Path,
) -> Result<Vec<RunRow>, CliError> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut failure = None;
    let rows = run_suite(table, max_dof, tol, maxit, |row| {
        if failure.is_none() {
            if let Err(e) = wtr.serialize(row).and_then(|_| wtr.flush().map_err(csv::Error::from)) {
                failure = Some(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(rows),
    }
}
