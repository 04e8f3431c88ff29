//! Temporal convergence study against the exact semi-discrete solution.
//!
//! The initial field is a finite sum of real Fourier modes. Every mode is an
//! eigenvector of the constant-coefficient periodic operator, so the exact
//! solution of the semi-discrete system is `Re(a exp(Λ t) e_k)` summed over
//! the modes, with `Λ` the full operator symbol. Comparing against it isolates
//! the error of the time discretization.

use num_complex::Complex64;

use super::{GridField, SchemeKind, SolverError, SplitOperators};
use crate::spectrum::{symbols_at_angles, FourierMode, GridSpec, PdeCoefficients};
use crate::stability::SchemeParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedProblem {
    pub coeffs: PdeCoefficients,
    pub grid: GridSpec,
    /// `(mode, amplitude)`: the initial field is `Σ a Re(e_k)`.
    pub modes: Vec<(FourierMode, f64)>,
    pub t_final: f64,
}

impl ManufacturedProblem {
    /// `sin(2πx) sin(2πy)` plus a `(2, 1)` cross mode on the unit square.
    pub fn standard(coeffs: PdeCoefficients, m: usize, t_final: f64) -> Result<Self, SolverError> {
        let grid = GridSpec::unit_square(m, m).map_err(|e| SolverError::Dimension(e.to_string()))?;
        // sin a sin b = (cos(a − b) − cos(a + b)) / 2
        let modes = vec![
            (FourierMode::new(1, m - 1), 0.5),
            (FourierMode::new(1, 1), -0.5),
            (FourierMode::new(2, 1), 0.3),
        ];
        Ok(Self { coeffs, grid, modes, t_final })
    }

    /// Unscaled eigenvalue `λ0 + λ1 + λ2` of the full operator on `mode`.
    pub fn symbol(&self, mode: FourierMode) -> Complex64 {
        let (phi1, phi2) = mode.angles(&self.grid);
        let pt = symbols_at_angles(&self.coeffs, &self.grid, 1.0, phi1, phi2);
        pt.z0 + pt.z()
    }

    pub fn initial_field(&self) -> GridField {
        self.exact_at(0.0)
    }

    pub fn exact_at(&self, t: f64) -> GridField {
        let mut out = GridField::zeros(self.grid.m1, self.grid.m2);
        for &(mode, amp) in &self.modes {
            let growth = amp * (self.symbol(mode) * t).exp();
            let (c, s) = GridField::fourier_pair(&self.grid, mode);
            // Re(g (c + i s)) = Re g · c − Im g · s
            out.axpy(growth.re, &c);
            out.axpy(-growth.im, &s);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub dt: f64,
    pub max_error: f64,
    /// `log2(e_prev / e)`; `None` on the coarsest level or when both errors vanish.
    pub observed_order: Option<f64>,
}

/// Runs `levels` step sizes `Δt = T / (coarse_steps 2^k)` and reports the
/// max-norm error at `T` with the observed order between successive levels.
pub fn run_convergence_study(
    scheme: SchemeKind,
    theta: f64,
    problem: &ManufacturedProblem,
    coarse_steps: usize,
    levels: usize,
) -> Result<Vec<ConvergenceRow>, SolverError> {
    let exact = problem.exact_at(problem.t_final);
    let u0 = problem.initial_field();
    let base = SplitOperators::new(&problem.coeffs, &problem.grid);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for level in 0..levels {
        let steps = coarse_steps << level;
        let dt = problem.t_final / steps as f64;
        let params = SchemeParams::new(theta, dt)
            .map_err(|e| SolverError::Dimension(format!("invalid scheme parameters: {e}")))?;
        let ops = base.clone().with_theta_dt(params.theta_dt())?;
        let mut u = u0.clone();
        for _ in 0..steps {
            u = ops.step(scheme, &params, &u)?;
        }
        let max_error = u.max_abs_diff(&exact);
        let observed_order = rows.last().and_then(|prev| {
            if prev.max_error > 0.0 && max_error > 0.0 {
                Some((prev.max_error / max_error).log2())
            } else {
                None
            }
        });
        rows.push(ConvergenceRow { steps, dt, max_error, observed_order });
    }
    Ok(rows)
}
