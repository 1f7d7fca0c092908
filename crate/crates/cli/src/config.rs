use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use pintau_core::{Equation, ProblemSpec, ResidualNorm, Scheme, DEFAULT_DENSE_GUARD};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EquationChoice {
    Heat,
    Wave,
}

/// Time scheme as named on the command line. `bdf2` means the two-step
/// backward scheme of the chosen equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    Theta,
    Bdf2,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecondChoice {
    None,
    Circulant,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Minres,
    Cgne,
}

/// Residual norm MINRES stops on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResidualChoice {
    /// `‖b - Ax‖ / ‖b‖`.
    True,
    /// The preconditioned norm from the MINRES recurrence.
    Preconditioned,
}

impl From<ResidualChoice> for ResidualNorm {
    fn from(r: ResidualChoice) -> Self {
        match r {
            ResidualChoice::True => ResidualNorm::Unpreconditioned,
            ResidualChoice::Preconditioned => ResidualNorm::Preconditioned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Solve,
    Spectrum,
}

macro_rules! value_name {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn name(&self) -> String {
                self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
            }
        }
    )*};
}
value_name!(EquationChoice, SchemeChoice, PrecondChoice, SolverChoice, ResidualChoice, Mode);

/// One fully specified experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub equation: EquationChoice,
    pub scheme: SchemeChoice,
    pub theta: Option<f64>,
    pub dim: usize,
    pub n: usize,
    pub m_plus_1: usize,
    pub final_time: f64,
    /// Diffusion / wave speed coefficient; the equation default when unset.
    pub a: Option<f64>,
    pub precond: PrecondChoice,
    pub solver: SolverChoice,
    pub tol: f64,
    pub maxit: usize,
    pub residual: ResidualChoice,
    pub mode: Mode,
    /// Half-width of the clusters around ±1 used to count outliers.
    pub epsilon: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(equation: EquationChoice, scheme: SchemeChoice, dim: usize, n: usize, m_plus_1: usize) -> Self {
        Self {
            equation,
            scheme,
            theta: None,
            dim,
            n,
            m_plus_1,
            final_time: 1.0,
            a: None,
            precond: PrecondChoice::Tau,
            solver: SolverChoice::Minres,
            tol: 1e-6,
            maxit: 500,
            residual: ResidualChoice::True,
            mode: Mode::Solve,
            epsilon: 0.2,
            out: None,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_precond(mut self, precond: PrecondChoice) -> Self {
        self.precond = precond;
        self
    }

    pub fn with_solver(mut self, solver: SolverChoice) -> Self {
        self.solver = solver;
        self
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        match (self.equation, self.scheme) {
            (EquationChoice::Heat, SchemeChoice::Theta) => self
                .theta
                .map(Scheme::Theta)
                .ok_or_else(|| CliError::Usage("scheme theta needs --theta".into())),
            (EquationChoice::Heat, SchemeChoice::Bdf2) => Ok(Scheme::Bdf2),
            (EquationChoice::Wave, SchemeChoice::Bdf2) => Ok(Scheme::WaveTwoStep),
            (EquationChoice::Wave, SchemeChoice::Central) => Ok(Scheme::WaveCentral),
            (e, s) => Err(CliError::Usage(format!(
                "scheme {} is not available for the {} equation",
                s.name(),
                e.name()
            ))),
        }
    }

    /// Spatial unknowns per time step.
    pub fn m(&self) -> usize {
        (self.m_plus_1.saturating_sub(1)).pow(self.dim as u32)
    }

    pub fn dof(&self) -> usize {
        self.n * self.m()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let scheme = self.scheme()?;
        if self.theta.is_some() && self.scheme != SchemeChoice::Theta {
            return Err(CliError::Usage("--theta only applies to scheme theta".into()));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(CliError::Usage(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if self.m_plus_1 < 2 {
            return Err(CliError::Usage(format!("m+1 must be at least 2, got {}", self.m_plus_1)));
        }
        if self.n < scheme.steps().max(1) {
            return Err(CliError::Usage(format!(
                "{scheme} needs n >= {}, got {}",
                scheme.steps().max(1),
                self.n
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Usage(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(CliError::Usage("maxit must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(CliError::Usage(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.mode == Mode::Spectrum && self.dof() > DEFAULT_DENSE_GUARD {
            return Err(CliError::Usage(format!(
                "spectrum mode is dense; n*m = {} exceeds {}",
                self.dof(),
                DEFAULT_DENSE_GUARD
            )));
        }
        if self.solver == SolverChoice::Cgne && self.mode == Mode::Spectrum {
            return Err(CliError::Usage("spectrum mode analyses the MINRES system; drop --solver cgne".into()));
        }
        self.problem_spec()?.validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        let mut spec = ProblemSpec::new(self.scheme()?, self.dim, self.n, self.m_plus_1.saturating_sub(1));
        spec.final_time = self.final_time;
        if let Some(a) = self.a {
            spec.a = a;
        }
        debug_assert_eq!(
            spec.equation(),
            match self.equation {
                EquationChoice::Heat => Equation::Heat,
                EquationChoice::Wave => Equation::Wave,
            }
        );
        Ok(spec)
    }
}

/// Every setting as optional, so that a config file and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct ConfigArgs {
    #[arg(long, value_enum)]
    pub equation: Option<EquationChoice>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeChoice>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "m-plus-1")]
    pub m_plus_1: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    pub final_time: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, value_enum)]
    pub precond: Option<PrecondChoice>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Residual norm MINRES stops on.
    #[arg(long, value_enum)]
    pub residual: Option<ResidualChoice>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value {value:?} for {key}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|_| CliError::Usage(format!("bad value {value:?} for {key}")))
}

impl ConfigArgs {
    /// Parses `key = value` lines; `#` starts a comment. Keys are the long
    /// flag names, with `_` accepted for `-`.
    pub fn parse_kv(text: &str) -> Result<Self, CliError> {
        let mut args = ConfigArgs::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "equation" => args.equation = Some(parse_enum(&key, value)?),
                "scheme" => args.scheme = Some(parse_enum(&key, value)?),
                "theta" => args.theta = Some(parse_value(&key, value)?),
                "dim" => args.dim = Some(parse_value(&key, value)?),
                "n" => args.n = Some(parse_value(&key, value)?),
                "m-plus-1" => args.m_plus_1 = Some(parse_value(&key, value)?),
                "T" | "final-time" => args.final_time = Some(parse_value(&key, value)?),
                "a" => args.a = Some(parse_value(&key, value)?),
                "precond" => args.precond = Some(parse_enum(&key, value)?),
                "solver" => args.solver = Some(parse_enum(&key, value)?),
                "tol" => args.tol = Some(parse_value(&key, value)?),
                "maxit" => args.maxit = Some(parse_value(&key, value)?),
                "residual" => args.residual = Some(parse_enum(&key, value)?),
                "mode" => args.mode = Some(parse_enum(&key, value)?),
                "epsilon" => args.epsilon = Some(parse_value(&key, value)?),
                "out" => args.out = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::Usage(format!("config line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }
        Ok(args)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_kv(&text)
    }

    /// `self` with every field set in `over` replaced.
    pub fn overridden_by(self, over: ConfigArgs) -> ConfigArgs {
        ConfigArgs {
            equation: over.equation.or(self.equation),
            scheme: over.scheme.or(self.scheme),
            theta: over.theta.or(self.theta),
            dim: over.dim.or(self.dim),
            n: over.n.or(self.n),
            m_plus_1: over.m_plus_1.or(self.m_plus_1),
            final_time: over.final_time.or(self.final_time),
            a: over.a.or(self.a),
            precond: over.precond.or(self.precond),
            solver: over.solver.or(self.solver),
            tol: over.tol.or(self.tol),
            maxit: over.maxit.or(self.maxit),
            residual: over.residual.or(self.residual),
            mode: over.mode.or(self.mode),
            epsilon: over.epsilon.or(self.epsilon),
            out: over.out.or(self.out),
        }
    }

    /// Fills defaults and validates. `n` and `m+1` are required.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let equation = self.equation.unwrap_or(EquationChoice::Heat);
        let scheme = self.scheme.unwrap_or(match equation {
            EquationChoice::Heat => SchemeChoice::Theta,
            EquationChoice::Wave => SchemeChoice::Bdf2,
        });
        let n = self.n.ok_or_else(|| CliError::Usage("missing --n".into()))?;
        let m_plus_1 = self.m_plus_1.ok_or_else(|| CliError::Usage("missing --m-plus-1".into()))?;
        let mut cfg = ExperimentConfig::new(equation, scheme, self.dim.unwrap_or(1), n, m_plus_1);
        cfg.theta = match (scheme, self.theta) {
            (SchemeChoice::Theta, None) => Some(0.5),
            (_, t) => t,
        };
        cfg.final_time = self.final_time.unwrap_or(cfg.final_time);
        cfg.a = self.a;
        cfg.precond = self.precond.unwrap_or(cfg.precond);
        cfg.solver = self.solver.unwrap_or(cfg.solver);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.maxit = self.maxit.unwrap_or(cfg.maxit);
        cfg.residual = self.residual.unwrap_or(cfg.residual);
        cfg.mode = self.mode.unwrap_or(cfg.mode);
        cfg.epsilon = self.epsilon.unwrap_or(cfg.epsilon);
        cfg.out = self.out;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_file_parses_and_flags_win() {
        let file = ConfigArgs::parse_kv("equation = wave\nscheme=central # comment\nn=8\nm_plus_1 = 8\ntol=1e-8\n").unwrap();
        let flags = ConfigArgs {
            n: Some(16),
            ..Default::default()
        };
        let cfg = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(cfg.equation, EquationChoice::Wave);
        assert_eq!(cfg.scheme().unwrap(), Scheme::WaveCentral);
        assert_eq!(cfg.n, 16);
        assert_eq!(cfg.m_plus_1, 8);
        assert_eq!(cfg.tol, 1e-8);
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        assert!(matches!(ConfigArgs::parse_kv("n 8"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigArgs::parse_kv("colour=red"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigArgs::parse_kv("n=eight"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigArgs::parse_kv("precond=jacobi"), Err(CliError::Usage(_))));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ExperimentConfig::new(EquationChoice::Heat, SchemeChoice::Theta, 1, 8, 8).with_theta(1.0);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.m_plus_1 = 1;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.n = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tol = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.scheme = SchemeChoice::Central;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.mode = Mode::Spectrum;
        c.n = 128;
        c.m_plus_1 = 128;
        assert!(c.validate().is_err());
        let mut c = base;
        c.theta = Some(1.5);
        assert!(c.validate().is_err());
    }

    #[test]
    fn dof_counts_interior_unknowns() {
        let c = ExperimentConfig::new(EquationChoice::Heat, SchemeChoice::Theta, 1, 256, 256);
        assert_eq!(c.dof(), 65280);
        let c = ExperimentConfig::new(EquationChoice::Heat, SchemeChoice::Theta, 2, 32, 32);
        assert_eq!(c.dof(), 30752);
    }
}
