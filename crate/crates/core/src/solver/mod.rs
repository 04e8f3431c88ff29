//! Time stepping of the semi-discrete convection-diffusion system on a
//! periodic grid.
//!
//! The right-hand side is split as `F = A0 + A1 + A2`: `A0` is the 9-point
//! mixed-derivative stencil, `A1` and `A2` collect the second- and
//! first-order central differences in `x` and `y`. The mixed term is always
//! explicit; `A1` and `A2` are treated implicitly through cyclic tridiagonal
//! line solves.

mod config;
mod convergence;
mod cyclic;

pub use config::{parse_pairs, ConfigError, InitialCondition, ProblemConfig, SchemeKind};
pub use convergence::{run_convergence_study, ConvergenceRow, ManufacturedProblem};
pub use cyclic::CyclicTridiagonal;

use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::spectrum::{FourierMode, GridSpec, PdeCoefficients};
use crate::stability::SchemeParams;

/// Grids with at least this many points run their line solves on the rayon pool.
const PARALLEL_THRESHOLD: usize = 64 * 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular line system (smallest pivot {min_pivot:e})")]
    SingularSystem { min_pivot: f64 },
    #[error("operator {0} has no implicit solve")]
    NotDirectional(SplitTerm),
    #[error("non-finite value (overflow in the operator or the solution)")]
    NonFinite,
}

/// One solution level on the periodic grid. Storage is row-major with `x`
/// (index `i`) varying fastest: `u[i, j]` lives at `j * m1 + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    m1: usize,
    m2: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(m1: usize, m2: usize) -> Self {
        Self::constant(m1, m2, 0.0)
    }

    pub fn constant(m1: usize, m2: usize, value: f64) -> Self {
        Self { m1, m2, values: vec![value; m1 * m2] }
    }

    pub fn from_fn(m1: usize, m2: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(m1 * m2);
        for j in 0..m2 {
            for i in 0..m1 {
                values.push(f(i, j));
            }
        }
        Self { m1, m2, values }
    }

    pub fn from_values(m1: usize, m2: usize, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != m1 * m2 {
            return Err(SolverError::Dimension(format!("{} values for a {m1} x {m2} grid", values.len())));
        }
        Ok(Self { m1, m2, values })
    }

    /// Real and imaginary parts of `exp(i(φ1 i + φ2 j))`.
    pub fn fourier_pair(grid: &GridSpec, mode: FourierMode) -> (Self, Self) {
        let (m1, m2) = (grid.m1, grid.m2);
        // Reduce the phase with integer arithmetic so φ stays an exact multiple of 2π/m.
        let phase = |i: usize, j: usize| {
            let a = (mode.k1 * i) % m1;
            let b = (mode.k2 * j) % m2;
            std::f64::consts::TAU * (a as f64 / m1 as f64 + b as f64 / m2 as f64)
        };
        (Self::from_fn(m1, m2, |i, j| phase(i, j).cos()), Self::from_fn(m1, m2, |i, j| phase(i, j).sin()))
    }

    pub fn impulse(m1: usize, m2: usize, i: usize, j: usize) -> Self {
        let mut f = Self::zeros(m1, m2);
        f[(i, j)] = 1.0;
        f
    }

    /// Uniform noise on `[-1, 1)`, deterministic in `seed`.
    pub fn random(m1: usize, m2: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(m1, m2, |_, _| 2.0 * rng.random::<f64>() - 1.0)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.m1 == grid.m1 && self.m2 == grid.m2
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square norm; proportional to the grid `L2` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &GridField) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Writes the field as CSV with header `i,j,u`, `i` in the outer loop.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "i,j,u")?;
        for i in 0..self.m1 {
            for j in 0..self.m2 {
                writeln!(out, "{i},{j},{:.16e}", self[(i, j)])?;
            }
        }
        Ok(())
    }

    fn check(&self, grid: &GridSpec) -> Result<(), SolverError> {
        if self.matches(grid) {
            Ok(())
        } else {
            Err(SolverError::Dimension(format!(
                "field is {} x {}, grid is {} x {}",
                self.m1, self.m2, grid.m1, grid.m2
            )))
        }
    }
}

impl std::ops::Index<(usize, usize)> for GridField {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[j * self.m1 + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for GridField {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[j * self.m1 + i]
    }
}

/// Which part of the split right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitTerm {
    /// `A0`, the mixed derivative.
    Mixed,
    /// `A1`, all `x` derivatives.
    X,
    /// `A2`, all `y` derivatives.
    Y,
}

impl SplitTerm {
    pub const ALL: [SplitTerm; 3] = [SplitTerm::Mixed, SplitTerm::X, SplitTerm::Y];

    pub fn index(self) -> usize {
        match self {
            SplitTerm::Mixed => 0,
            SplitTerm::X => 1,
            SplitTerm::Y => 2,
        }
    }
}

impl fmt::Display for SplitTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.index())
    }
}

/// 3x3 stencil; `w[di + 1][dj + 1]` multiplies `u[i + di, j + dj]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stencil9 {
    pub w: [[f64; 3]; 3],
}

impl Stencil9 {
    pub fn weight_sum(&self) -> f64 {
        self.w.iter().flatten().sum()
    }

    pub fn add(&self, other: &Stencil9) -> Stencil9 {
        let mut w = self.w;
        for (row, orow) in w.iter_mut().zip(&other.w) {
            for (a, b) in row.iter_mut().zip(orow) {
                *a += b;
            }
        }
        Stencil9 { w }
    }

    /// Applies the stencil with periodic wrap-around.
    pub fn apply(&self, u: &GridField, out: &mut GridField) {
        let (m1, m2) = u.dims();
        let src = u.values();
        let taps: Vec<(isize, isize, f64)> = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|&(a, b)| self.w[a][b] != 0.0)
            .map(|(a, b)| (a as isize - 1, b as isize - 1, self.w[a][b]))
            .collect();
        let dst = out.values_mut();
        for j in 0..m2 {
            for i in 0..m1 {
                let mut acc = 0.0;
                for &(di, dj, w) in &taps {
                    let ii = (i as isize + di).rem_euclid(m1 as isize) as usize;
                    let jj = (j as isize + dj).rem_euclid(m2 as isize) as usize;
                    acc += w * src[jj * m1 + ii];
                }
                dst[j * m1 + i] = acc;
            }
        }
    }
}

/// Factorized `(I − θΔt A1)` and `(I − θΔt A2)` for one value of `θΔt`.
#[derive(Debug, Clone)]
pub struct ImplicitFactors {
    theta_dt: f64,
    x: CyclicTridiagonal,
    y: CyclicTridiagonal,
}

impl ImplicitFactors {
    pub fn theta_dt(&self) -> f64 {
        self.theta_dt
    }
}

/// Stencils of `A0`, `A1`, `A2` and, once prepared, the factorized implicit
/// line systems.
#[derive(Debug, Clone)]
pub struct SplitOperators {
    grid: GridSpec,
    coeffs: PdeCoefficients,
    stencils: [Stencil9; 3],
    implicit: Option<ImplicitFactors>,
}

impl SplitOperators {
    pub fn new(coeffs: &PdeCoefficients, grid: &GridSpec) -> Self {
        let (dx, dy) = (grid.dx, grid.dy);

        let mut a0 = Stencil9::default();
        let m = coeffs.mixed() / (4.0 * dx * dy);
        let beta = grid.beta;
        a0.w[2][2] = m * (1.0 + beta);
        a0.w[0][0] = m * (1.0 + beta);
        a0.w[0][2] = -m * (1.0 - beta);
        a0.w[2][0] = -m * (1.0 - beta);
        a0.w[1][1] = m * 4.0 * beta;
        for (a, b) in [(2, 1), (1, 2), (0, 1), (1, 0)] {
            a0.w[a][b] = -m * 2.0 * beta;
        }

        let (lo1, di1, up1) = line_weights(coeffs.d11, coeffs.c1, dx);
        let mut a1 = Stencil9::default();
        a1.w[0][1] = lo1;
        a1.w[1][1] = di1;
        a1.w[2][1] = up1;

        let (lo2, di2, up2) = line_weights(coeffs.d22, coeffs.c2, dy);
        let mut a2 = Stencil9::default();
        a2.w[1][0] = lo2;
        a2.w[1][1] = di2;
        a2.w[1][2] = up2;

        Self { grid: *grid, coeffs: *coeffs, stencils: [a0, a1, a2], implicit: None }
    }

    /// Precomputes the implicit factorizations for `θΔt`.
    pub fn prepare(&mut self, theta_dt: f64) -> Result<&ImplicitFactors, SolverError> {
        let factors = self.factorize(theta_dt)?;
        Ok(self.implicit.insert(factors))
    }

    pub fn with_theta_dt(mut self, theta_dt: f64) -> Result<Self, SolverError> {
        self.prepare(theta_dt)?;
        Ok(self)
    }

    fn factorize(&self, theta_dt: f64) -> Result<ImplicitFactors, SolverError> {
        let line = |s: &Stencil9, idx: fn(usize) -> (usize, usize), n: usize| {
            let [lo, di, up] = [0, 1, 2].map(|k| {
                let (a, b) = idx(k);
                s.w[a][b]
            });
            CyclicTridiagonal::new(n, -theta_dt * lo, 1.0 - theta_dt * di, -theta_dt * up)
        };
        Ok(ImplicitFactors {
            theta_dt,
            x: line(&self.stencils[1], |k| (k, 1), self.grid.m1)?,
            y: line(&self.stencils[2], |k| (1, k), self.grid.m2)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &PdeCoefficients {
        &self.coeffs
    }

    pub fn stencil(&self, term: SplitTerm) -> &Stencil9 {
        &self.stencils[term.index()]
    }

    /// Stencil of the unsplit operator `A0 + A1 + A2`.
    pub fn full_stencil(&self) -> Stencil9 {
        self.stencils[0].add(&self.stencils[1]).add(&self.stencils[2])
    }

    pub fn apply(&self, term: SplitTerm, field: &GridField) -> Result<GridField, SolverError> {
        field.check(&self.grid)?;
        let mut out = GridField::zeros(self.grid.m1, self.grid.m2);
        self.stencils[term.index()].apply(field, &mut out);
        Ok(out)
    }

    /// `(A0 + A1 + A2) field` as the sum of the three split applications.
    pub fn apply_full(&self, field: &GridField) -> Result<GridField, SolverError> {
        let mut out = self.apply(SplitTerm::Mixed, field)?;
        out.axpy(1.0, &self.apply(SplitTerm::X, field)?);
        out.axpy(1.0, &self.apply(SplitTerm::Y, field)?);
        Ok(out)
    }

    /// Solves `(I − θΔt Aj) x = rhs` line by line for `j ∈ {X, Y}`.
    pub fn solve_directional(
        &self,
        term: SplitTerm,
        theta_dt: f64,
        rhs: &GridField,
    ) -> Result<GridField, SolverError> {
        rhs.check(&self.grid)?;
        if term == SplitTerm::Mixed {
            return Err(SolverError::NotDirectional(term));
        }
        let mut out = rhs.clone();
        if theta_dt == 0.0 {
            return Ok(out);
        }
        let owned;
        let factors = match &self.implicit {
            Some(f) if f.theta_dt.to_bits() == theta_dt.to_bits() => f,
            _ => {
                owned = self.factorize(theta_dt)?;
                &owned
            }
        };
        let (m1, m2) = (self.grid.m1, self.grid.m2);
        let parallel = m1 * m2 >= PARALLEL_THRESHOLD;
        match term {
            SplitTerm::X => {
                solve_lines(&factors.x, out.values_mut(), m1, parallel);
            }
            SplitTerm::Y => {
                let mut scratch = vec![0.0; m1 * m2];
                transpose(rhs.values(), &mut scratch, m1, m2);
                solve_lines(&factors.y, &mut scratch, m2, parallel);
                transpose(&scratch, out.values_mut(), m2, m1);
            }
            SplitTerm::Mixed => unreachable!(),
        }
        Ok(out)
    }

    /// One step of the Modified Craig-Sneyd scheme.
    pub fn step_mcs(&self, params: &SchemeParams, u_prev: &GridField) -> Result<GridField, SolverError> {
        let dt = params.dt();
        let theta = params.theta();
        let td = params.theta_dt();

        let a_u = [
            self.apply(SplitTerm::Mixed, u_prev)?,
            self.apply(SplitTerm::X, u_prev)?,
            self.apply(SplitTerm::Y, u_prev)?,
        ];
        let (y0, y2) = self.predict_and_correct(params, u_prev, &a_u)?;

        let mut diff = y2;
        diff.axpy(-1.0, u_prev);
        let a_diff = [
            self.apply(SplitTerm::Mixed, &diff)?,
            self.apply(SplitTerm::X, &diff)?,
            self.apply(SplitTerm::Y, &diff)?,
        ];

        // Ŷ0 = Y0 + θΔt (F0(Y2) − F0(U))
        let mut y_hat = y0;
        y_hat.axpy(td, &a_diff[0]);
        // Ỹ0 = Ŷ0 + (1/2 − θ)Δt (F(Y2) − F(U))
        let mut y_tilde = y_hat;
        for a in &a_diff {
            y_tilde.axpy((0.5 - theta) * dt, a);
        }
        for (term, a) in [(SplitTerm::X, &a_u[1]), (SplitTerm::Y, &a_u[2])] {
            y_tilde.axpy(-td, a);
            y_tilde = self.solve_directional(term, td, &y_tilde)?;
        }
        finite(y_tilde)
    }

    /// One step of the Douglas scheme (the MCS predictor and first two corrections).
    pub fn step_douglas(&self, params: &SchemeParams, u_prev: &GridField) -> Result<GridField, SolverError> {
        let a_u = [
            self.apply(SplitTerm::Mixed, u_prev)?,
            self.apply(SplitTerm::X, u_prev)?,
            self.apply(SplitTerm::Y, u_prev)?,
        ];
        finite(self.predict_and_correct(params, u_prev, &a_u)?.1)
    }

    pub fn step(
        &self,
        scheme: SchemeKind,
        params: &SchemeParams,
        u_prev: &GridField,
    ) -> Result<GridField, SolverError> {
        match scheme {
            SchemeKind::Mcs => self.step_mcs(params, u_prev),
            SchemeKind::Douglas => self.step_douglas(params, u_prev),
        }
    }

    /// Y0 = U + Δt F(U), then Yj = Y(j−1) + θΔt (Fj(Yj) − Fj(U)) for j = 1, 2.
    /// Returns `(Y0, Y2)`.
    fn predict_and_correct(
        &self,
        params: &SchemeParams,
        u_prev: &GridField,
        a_u: &[GridField; 3],
    ) -> Result<(GridField, GridField), SolverError> {
        let dt = params.dt();
        let td = params.theta_dt();
        let mut y0 = u_prev.clone();
        for a in a_u {
            y0.axpy(dt, a);
        }
        let mut y = y0.clone();
        for (term, a) in [(SplitTerm::X, &a_u[1]), (SplitTerm::Y, &a_u[2])] {
            y.axpy(-td, a);
            y = self.solve_directional(term, td, &y)?;
        }
        Ok((y0, y))
    }

    /// One-step amplification of the complex Fourier mode, measured by running
    /// the scheme on the cosine and sine parts and projecting back on the mode.
    pub fn measure_amplification(
        &self,
        scheme: SchemeKind,
        params: &SchemeParams,
        mode: FourierMode,
    ) -> Result<ModeAmplification, SolverError> {
        let (c, s) = GridField::fourier_pair(&self.grid, mode);
        let c1 = self.step(scheme, params, &c)?;
        let s1 = self.step(scheme, params, &s)?;
        let n = c.values().len() as f64;
        let mut proj = Complex64::default();
        for k in 0..c.values().len() {
            let e = Complex64::new(c.values()[k], s.values()[k]);
            let out = Complex64::new(c1.values()[k], s1.values()[k]);
            proj += out * e.conj();
        }
        let factor = proj / n;
        let mut residual: f64 = 0.0;
        for k in 0..c.values().len() {
            let e = Complex64::new(c.values()[k], s.values()[k]);
            let out = Complex64::new(c1.values()[k], s1.values()[k]);
            residual = residual.max((out - factor * e).norm());
        }
        Ok(ModeAmplification { factor, residual })
    }
}

/// Measured one-step multiplier of a Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAmplification {
    pub factor: Complex64,
    /// Largest pointwise deviation of the stepped mode from `factor * mode`.
    pub residual: f64,
}

fn finite(field: GridField) -> Result<GridField, SolverError> {
    if field.all_finite() {
        Ok(field)
    } else {
        Err(SolverError::NonFinite)
    }
}

/// `(lower, diag, upper)` of `d u_ss + c u_s` on a line with spacing `h`.
fn line_weights(d: f64, c: f64, h: f64) -> (f64, f64, f64) {
    let diff = d / (h * h);
    let conv = c / (2.0 * h);
    (diff - conv, -2.0 * diff, diff + conv)
}

fn solve_lines(sys: &CyclicTridiagonal, data: &mut [f64], n: usize, parallel: bool) {
    if parallel {
        data.par_chunks_mut(n).for_each(|line| sys.solve_in_place(line));
    } else {
        data.chunks_mut(n).for_each(|line| sys.solve_in_place(line));
    }
}

/// `dst[i * rows + j] = src[j * cols + i]` for a `rows x cols` source stored row-major.
fn transpose(src: &[f64], dst: &mut [f64], cols: usize, rows: usize) {
    for j in 0..rows {
        for i in 0..cols {
            dst[i * rows + j] = src[j * cols + i];
        }
    }
}
