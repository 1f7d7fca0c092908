//! Finite-difference spatial operators in their sine-transform eigenbasis,
//! time stencils for the supported schemes, and all-at-once right-hand sides.

use crate::block::BlockVector;
use crate::error::{check_dim, Error, Result};
use crate::transforms::SpaceShape;
use std::f64::consts::PI;

/// Mass/stiffness pair of a uniform-grid Dirichlet Laplacian `-a Δ`, stored by
/// the eigenvalues each matrix has on the sine basis. Mode `j` (0-based) of a
/// 1D grid has stiffness eigenvalue `(a/h²)(2 - 2cos((j+1)π/(m+1)))`; 2D modes
/// are Kronecker sums in row-major order (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSpatialOperator {
    shape: SpaceShape,
    h: f64,
    a: f64,
    mass_eigs: Vec<f64>,
    stiff_eigs: Vec<f64>,
}

fn laplacian_1d_eigs(m: usize, a: f64, h: f64) -> Vec<f64> {
    (1..=m)
        .map(|j| a / (h * h) * (2.0 - 2.0 * (j as f64 * PI / (m as f64 + 1.0)).cos()))
        .collect()
}

fn check_grid_params(m: usize, a: f64, length: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Parameter("spatial grid needs at least one interior point".into()));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Parameter(format!("diffusion coefficient must be positive, got {a}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Parameter(format!("domain length must be positive, got {length}")));
    }
    Ok(())
}

/// 1D Laplacian on `(0, length)` with `m` interior points.
pub fn build_laplacian_1d(m: usize, a: f64, length: f64) -> Result<SpectralSpatialOperator> {
    check_grid_params(m, a, length)?;
    let h = length / (m as f64 + 1.0);
    Ok(SpectralSpatialOperator {
        shape: SpaceShape::OneD(m),
        h,
        a,
        mass_eigs: vec![1.0; m],
        stiff_eigs: laplacian_1d_eigs(m, a, h),
    })
}

/// 2D Laplacian on the square `(0, length)²` with `m1` interior points per side.
pub fn build_laplacian_2d(m1: usize, a: f64, length: f64) -> Result<SpectralSpatialOperator> {
    check_grid_params(m1, a, length)?;
    let h = length / (m1 as f64 + 1.0);
    let one_d = laplacian_1d_eigs(m1, a, h);
    let mut stiff_eigs = Vec::with_capacity(m1 * m1);
    for ly in &one_d {
        for lx in &one_d {
            stiff_eigs.push(lx + ly);
        }
    }
    Ok(SpectralSpatialOperator {
        shape: SpaceShape::TwoD(m1, m1),
        h,
        a,
        mass_eigs: vec![1.0; m1 * m1],
        stiff_eigs,
    })
}

impl SpectralSpatialOperator {
    pub fn m(&self) -> usize {
        self.shape.len()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mass_eigs(&self) -> &[f64] {
        &self.mass_eigs
    }

    pub fn stiff_eigs(&self) -> &[f64] {
        &self.stiff_eigs
    }

    /// Interior grid coordinates in storage order. 1D points carry `y = 0`.
    pub fn grid_points(&self) -> Vec<[f64; 2]> {
        let h = self.h;
        match self.shape {
            SpaceShape::OneD(m) => (1..=m).map(|i| [i as f64 * h, 0.0]).collect(),
            SpaceShape::TwoD(mx, my) => (1..=my)
                .flat_map(|j| (1..=mx).map(move |i| [i as f64 * h, j as f64 * h]))
                .collect(),
        }
    }

    /// `out = mass_weight * M z + stiff_weight * K z` using the sparse stencil
    /// (`M = I`, `K = (a/h²)` times the 3- or 5-point Dirichlet Laplacian).
    pub fn apply_stencil(&self, mass_weight: f64, stiff_weight: f64, z: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim(self.m(), z.len())?;
        check_dim(self.m(), out.len())?;
        let c = stiff_weight * self.a / (self.h * self.h);
        match self.shape {
            SpaceShape::OneD(m) => {
                for i in 0..m {
                    let left = if i > 0 { z[i - 1] } else { 0.0 };
                    let right = if i + 1 < m { z[i + 1] } else { 0.0 };
                    out[i] = mass_weight * z[i] + c * (2.0 * z[i] - left - right);
                }
            }
            SpaceShape::TwoD(mx, my) => {
                for j in 0..my {
                    for i in 0..mx {
                        let p = j * mx + i;
                        let mut lap = 4.0 * z[p];
                        if i > 0 {
                            lap -= z[p - 1];
                        }
                        if i + 1 < mx {
                            lap -= z[p + 1];
                        }
                        if j > 0 {
                            lap -= z[p - mx];
                        }
                        if j + 1 < my {
                            lap -= z[p + mx];
                        }
                        out[p] = mass_weight * z[p] + c * lap;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Heat,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// One-step θ-method for the heat equation.
    Theta(f64),
    /// Two-step backward differentiation for the heat equation.
    Bdf2,
    /// `(u^k - 2u^{k-1} + u^{k-2})/τ² = -K u^k + f^k` for the wave equation.
    WaveTwoStep,
    /// `(u^k - 2u^{k-1} + u^{k-2})/τ² = -K u^{k-1} + f^{k-1}` for the wave equation.
    WaveCentral,
}

impl Scheme {
    pub fn steps(&self) -> usize {
        match self {
            Scheme::Theta(_) => 1,
            _ => 2,
        }
    }

    pub fn equation(&self) -> Equation {
        match self {
            Scheme::Theta(_) | Scheme::Bdf2 => Equation::Heat,
            Scheme::WaveTwoStep | Scheme::WaveCentral => Equation::Wave,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Theta(t) => write!(f, "theta({t})"),
            Scheme::Bdf2 => f.write_str("bdf2"),
            Scheme::WaveTwoStep => f.write_str("wave-two-step"),
            Scheme::WaveCentral => f.write_str("wave-central"),
        }
    }
}

/// Initial states, evaluated as products over the coordinate directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Zero,
    /// `Π sin²(π x_d)`.
    SinSquared,
    /// `Π x_d (x_d - 1)`.
    ProductQuadratic,
    /// `Π χ_[3/8,5/8](x_d) cos²(4π(x_d - 1/2))`.
    CosineBump,
}

impl InitialData {
    pub fn eval(&self, p: [f64; 2], dim: usize) -> f64 {
        let factor = |x: f64| match self {
            InitialData::Zero => 0.0,
            InitialData::SinSquared => (PI * x).sin().powi(2),
            InitialData::ProductQuadratic => x * (x - 1.0),
            InitialData::CosineBump => {
                if (0.375..=0.625).contains(&x) {
                    (4.0 * PI * (x - 0.5)).cos().powi(2)
                } else {
                    0.0
                }
            }
        };
        p[..dim].iter().map(|&x| factor(x)).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forcing {
    Zero,
    Constant(f64),
    /// Source for which `u = q(x) ((t+1)ln(t+1) - t + 1)` with `q = Π x_d(x_d-1)`
    /// solves `u_tt = Δu + f`, `u(0) = q`, `u_t(0) = 0` (unit wave speed).
    ManufacturedWave,
}

impl Forcing {
    pub fn eval(&self, p: [f64; 2], dim: usize, t: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(c) => *c,
            Forcing::ManufacturedWave => {
                let pts = &p[..dim];
                let q: f64 = pts.iter().map(|x| x * (x - 1.0)).product();
                // Δq = Σ_d 2 Π_{e≠d} x_e(x_e - 1)
                let lap_q: f64 = (0..dim)
                    .map(|d| {
                        2.0 * pts
                            .iter()
                            .enumerate()
                            .filter(|(e, _)| *e != d)
                            .map(|(_, x)| x * (x - 1.0))
                            .product::<f64>()
                    })
                    .sum();
                let g = (t + 1.0) * (t + 1.0).ln() - t + 1.0;
                q / (t + 1.0) - g * lap_q
            }
        }
    }

    /// The exact solution paired with [`Forcing::ManufacturedWave`].
    pub fn manufactured_wave_solution(p: [f64; 2], dim: usize, t: f64) -> f64 {
        let q: f64 = p[..dim].iter().map(|x| x * (x - 1.0)).product();
        q * ((t + 1.0) * (t + 1.0).ln() - t + 1.0)
    }
}

/// Everything needed to assemble one all-at-once system.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub scheme: Scheme,
    pub dim: usize,
    /// Number of time steps.
    pub n: usize,
    /// Interior points per spatial direction.
    pub m1: usize,
    pub final_time: f64,
    pub a: f64,
    pub length: f64,
    pub initial: InitialData,
    pub forcing: Forcing,
}

impl ProblemSpec {
    /// Defaults follow the reference experiments: `T = 1`, unit domain,
    /// `a = 1e-5` with zero forcing for heat, `a = 1` for wave; initial data
    /// `sin²(πx)` (heat 1D), `x(x-1)y(y-1)` (2D), the cosine bump (wave 1D).
    pub fn new(scheme: Scheme, dim: usize, n: usize, m1: usize) -> Self {
        let equation = scheme.equation();
        let (initial, forcing, a) = match (equation, dim) {
            (Equation::Heat, 1) => (InitialData::SinSquared, Forcing::Zero, 1e-5),
            (Equation::Heat, _) => (InitialData::ProductQuadratic, Forcing::Zero, 1e-5),
            (Equation::Wave, 1) => (InitialData::CosineBump, Forcing::Zero, 1.0),
            (Equation::Wave, _) => (InitialData::ProductQuadratic, Forcing::ManufacturedWave, 1.0),
        };
        Self {
            scheme,
            dim,
            n,
            m1,
            final_time: 1.0,
            a,
            length: 1.0,
            initial,
            forcing,
        }
    }

    pub fn equation(&self) -> Equation {
        self.scheme.equation()
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.n as f64
    }

    pub fn m(&self) -> usize {
        self.m1.pow(self.dim as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if let Scheme::Theta(theta) = self.scheme {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::Parameter(format!("theta must lie in [0, 1], got {theta}")));
            }
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Parameter(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if self.n < self.scheme.steps() {
            return Err(Error::Parameter(format!(
                "{} needs at least {} time steps, got n={}",
                self.scheme,
                self.scheme.steps(),
                self.n
            )));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::Parameter(format!("final time must be positive, got {}", self.final_time)));
        }
        check_grid_params(self.m1, self.a, self.length)
    }

    pub fn build_spatial(&self) -> Result<SpectralSpatialOperator> {
        self.validate()?;
        match self.dim {
            1 => build_laplacian_1d(self.m1, self.a, self.length),
            _ => build_laplacian_2d(self.m1, self.a, self.length),
        }
    }
}

/// Block Toeplitz coefficients `A_(k) = μ_k M + κ_k K`, `k = 0..=l`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeStencil {
    coeffs: Vec<(f64, f64)>,
    tau: f64,
    scheme: Option<Scheme>,
}

impl TimeStencil {
    /// A stencil from explicit `(mass, stiffness)` weights.
    pub fn from_coeffs(coeffs: Vec<(f64, f64)>, tau: f64) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Parameter("a time stencil needs at least two coefficients".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Parameter(format!("time step must be positive, got {tau}")));
        }
        Ok(Self { coeffs, tau, scheme: None })
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    /// Number of steps `l`; the stencil has `l + 1` coefficients.
    pub fn l(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.scheme
    }

    /// Scalar eigenvalue of `A_(k)` on a spatial mode with eigenvalues `(mass, stiff)`.
    #[inline]
    pub fn block_eig(&self, k: usize, mass: f64, stiff: f64) -> f64 {
        let (mu, kappa) = self.coeffs[k];
        mu * mass + kappa * stiff
    }

    /// Checks that `A_(0)` is positive definite on every mode of `spatial`.
    pub fn check_leading_block(&self, spatial: &SpectralSpatialOperator) -> Result<()> {
        for (j, (&mass, &stiff)) in spatial.mass_eigs().iter().zip(spatial.stiff_eigs()).enumerate() {
            let v = self.block_eig(0, mass, stiff);
            if v <= 0.0 {
                return Err(Error::Parameter(format!(
                    "leading block is not positive definite: eigenvalue {v} on mode {j}"
                )));
            }
        }
        Ok(())
    }
}

pub fn make_stencil(spec: &ProblemSpec) -> Result<TimeStencil> {
    spec.validate()?;
    let tau = spec.tau();
    let coeffs = match spec.scheme {
        Scheme::Theta(theta) => vec![(1.0, theta * tau), (-1.0, (1.0 - theta) * tau)],
        Scheme::Bdf2 => vec![(1.5, tau), (-2.0, 0.0), (0.5, 0.0)],
        Scheme::WaveTwoStep => vec![(1.0, tau * tau), (-2.0, 0.0), (1.0, 0.0)],
        Scheme::WaveCentral => vec![(1.0, 0.0), (-2.0, tau * tau), (1.0, 0.0)],
    };
    Ok(TimeStencil {
        coeffs,
        tau,
        scheme: Some(spec.scheme),
    })
}

/// Samples the initial state at the interior grid points.
pub fn evaluate_initial(spec: &ProblemSpec, spatial: &SpectralSpatialOperator) -> Vec<f64> {
    spatial
        .grid_points()
        .into_iter()
        .map(|p| spec.initial.eval(p, spatial.dim()))
        .collect()
}

fn sample_forcing(spec: &ProblemSpec, points: &[[f64; 2]], dim: usize, t: f64) -> Vec<f64> {
    points.iter().map(|&p| spec.forcing.eval(p, dim, t)).collect()
}

/// Right-hand side of the (unpermuted) all-at-once system.
///
/// Known history `u^(0)` is moved to the right of each block row. Heat BDF2
/// uses the ghost value `u^(-1) = u^(0)` on its first row. Wave schemes pin
/// the first row to `A_(0) u^(1) = A_(0) u^(0)`, which encodes `u_t(0) = 0`.
pub fn build_rhs(
    spec: &ProblemSpec,
    spatial: &SpectralSpatialOperator,
    stencil: &TimeStencil,
) -> Result<BlockVector> {
    spec.validate()?;
    check_dim(spec.m(), spatial.m())?;
    let (n, m) = (spec.n, spatial.m());
    let tau = stencil.tau();
    let dim = spatial.dim();
    let points = spatial.grid_points();
    let u0 = evaluate_initial(spec, spatial);
    let mut rhs = BlockVector::zeros(n, m)?;
    let mut tmp = vec![0.0; m];
    let forcing_zero = matches!(spec.forcing, Forcing::Zero);

    // out -= A_(k) u^(0)
    let subtract_history = |k: usize, out: &mut [f64], tmp: &mut [f64]| -> Result<()> {
        let (mu, kappa) = stencil.coeffs()[k];
        spatial.apply_stencil(mu, kappa, &u0, tmp)?;
        out.iter_mut().zip(tmp.iter()).for_each(|(o, t)| *o -= t);
        Ok(())
    };

    match spec.scheme {
        Scheme::Theta(theta) => {
            for k in 1..=n {
                let block = rhs.block_mut(k - 1);
                if !forcing_zero {
                    let f_new = sample_forcing(spec, &points, dim, k as f64 * tau);
                    let f_old = sample_forcing(spec, &points, dim, (k - 1) as f64 * tau);
                    for i in 0..m {
                        block[i] = tau * (theta * f_new[i] + (1.0 - theta) * f_old[i]);
                    }
                }
                if k == 1 {
                    subtract_history(1, block, &mut tmp)?;
                }
            }
        }
        Scheme::Bdf2 => {
            for k in 1..=n {
                let block = rhs.block_mut(k - 1);
                if !forcing_zero {
                    let f = sample_forcing(spec, &points, dim, k as f64 * tau);
                    block.iter_mut().zip(&f).for_each(|(b, v)| *b = tau * v);
                }
                if k == 1 {
                    subtract_history(1, block, &mut tmp)?;
                    subtract_history(2, block, &mut tmp)?;
                } else if k == 2 {
                    subtract_history(2, block, &mut tmp)?;
                }
            }
        }
        Scheme::WaveTwoStep | Scheme::WaveCentral => {
            let (mu, kappa) = stencil.coeffs()[0];
            spatial.apply_stencil(mu, kappa, &u0, rhs.block_mut(0))?;
            let lag = if spec.scheme == Scheme::WaveCentral { 1 } else { 0 };
            for k in 2..=n {
                let block = rhs.block_mut(k - 1);
                if !forcing_zero {
                    let f = sample_forcing(spec, &points, dim, (k - lag) as f64 * tau);
                    block.iter_mut().zip(&f).for_each(|(b, v)| *b = tau * tau * v);
                }
                if k == 2 {
                    subtract_history(2, block, &mut tmp)?;
                }
            }
        }
    }
    Ok(rhs)
}
