//! Fourier symbols of the central finite-difference discretization on a
//! periodic grid, and the check that they satisfy the cone condition.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::stability::{cone_margin, SchemeParams, SpectralPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("diffusion matrix is not positive semi-definite: {0}")]
    NotPsd(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("coefficient is not finite: {0}")]
    NonFinite(&'static str),
}

/// Constant coefficients of `u_t = d11 u_xx + (d12 + d21) u_xy + d22 u_yy + c1 u_x + c2 u_y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PdeCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

impl PdeCoefficients {
    /// Builds the coefficient set, rejecting a diffusion matrix whose
    /// symmetric part is not positive semi-definite.
    pub fn new(c1: f64, c2: f64, d11: f64, d12: f64, d21: f64, d22: f64) -> Result<Self, SpectrumError> {
        let coeffs = Self { c1, c2, d11, d12, d21, d22 };
        coeffs.validate()?;
        Ok(coeffs)
    }

    /// Pure diffusion `D = [[d11, m/2], [m/2, d22]]` with mixed coefficient `m = d12 + d21`.
    pub fn diffusion(d11: f64, mixed: f64, d22: f64) -> Result<Self, SpectrumError> {
        Self::new(0.0, 0.0, d11, 0.5 * mixed, 0.5 * mixed, d22)
    }

    /// `d12 + d21`, the only combination of the off-diagonal entries the
    /// discretization sees.
    pub fn mixed(&self) -> f64 {
        self.d12 + self.d21
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("d11", self.d11),
            ("d12", self.d12),
            ("d21", self.d21),
            ("d22", self.d22),
        ] {
            if !v.is_finite() {
                return Err(SpectrumError::NonFinite(name));
            }
        }
        let m = self.mixed();
        let scale = self.d11.abs().max(self.d22.abs()).max(m.abs());
        let eps = 1e-12 * scale;
        if self.d11 < -eps || self.d22 < -eps {
            return Err(SpectrumError::NotPsd(format!(
                "negative diagonal entry (d11 = {}, d22 = {})",
                self.d11, self.d22
            )));
        }
        let det = 4.0 * self.d11 * self.d22 - m * m;
        if det < -eps * scale {
            return Err(SpectrumError::NotPsd(format!("4 d11 d22 - (d12 + d21)^2 = {det:e} < 0")));
        }
        Ok(())
    }
}

/// Scaled mesh ratios `a1 = Δt/Δx²`, `a2 = Δt/Δy²`, `b = Δt/(ΔxΔy)`,
/// `q1 = Δt/Δx`, `q2 = Δt/Δy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshRatios {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub q1: f64,
    pub q2: f64,
}

/// Periodic Cartesian grid with `m1 × m2` points and the weight `beta` of
/// the 9-point mixed-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub m1: usize,
    pub m2: usize,
    pub dx: f64,
    pub dy: f64,
    pub beta: f64,
}

impl GridSpec {
    pub fn new(m1: usize, m2: usize, dx: f64, dy: f64, beta: f64) -> Result<Self, SpectrumError> {
        let grid = Self { m1, m2, dx, dy, beta };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid on the unit square, `Δx = 1/m1`, `Δy = 1/m2`, `β = 0`.
    pub fn unit_square(m1: usize, m2: usize) -> Result<Self, SpectrumError> {
        Self::new(m1, m2, 1.0 / m1 as f64, 1.0 / m2 as f64, 0.0)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self, SpectrumError> {
        Self::new(self.m1, self.m2, self.dx, self.dy, beta)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.m1 < 3 || self.m2 < 3 {
            return Err(SpectrumError::InvalidGrid(format!(
                "need at least 3 points per direction, got {} x {}",
                self.m1, self.m2
            )));
        }
        if !(self.dx.is_finite() && self.dx > 0.0 && self.dy.is_finite() && self.dy > 0.0) {
            return Err(SpectrumError::InvalidGrid(format!(
                "mesh widths must be positive, got dx = {}, dy = {}",
                self.dx, self.dy
            )));
        }
        if !(-1.0..=1.0).contains(&self.beta) {
            return Err(SpectrumError::InvalidGrid(format!("beta must lie in [-1, 1], got {}", self.beta)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ratios(&self, dt: f64) -> MeshRatios {
        MeshRatios {
            a1: dt / (self.dx * self.dx),
            a2: dt / (self.dy * self.dy),
            b: dt / (self.dx * self.dy),
            q1: dt / self.dx,
            q2: dt / self.dy,
        }
    }

    /// All Fourier modes in lexicographic `(k1, k2)` order.
    pub fn modes(&self) -> impl Iterator<Item = FourierMode> + '_ {
        (0..self.m1).flat_map(move |k1| (0..self.m2).map(move |k2| FourierMode { k1, k2 }))
    }
}

/// Discrete Fourier mode with angles `φj = 2π kj / mj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FourierMode {
    pub k1: usize,
    pub k2: usize,
}

impl FourierMode {
    pub fn new(k1: usize, k2: usize) -> Self {
        Self { k1, k2 }
    }

    pub fn angles(&self, grid: &GridSpec) -> (f64, f64) {
        (2.0 * PI * self.k1 as f64 / grid.m1 as f64, 2.0 * PI * self.k2 as f64 / grid.m2 as f64)
    }

    pub fn in_grid(&self, grid: &GridSpec) -> bool {
        self.k1 < grid.m1 && self.k2 < grid.m2
    }
}

/// Scaled eigenvalues `(z0, z1, z2)` of `Δt A0`, `Δt A1`, `Δt A2` on the mode
/// with angles `(phi1, phi2)`.
pub fn symbols_at_angles(
    coeffs: &PdeCoefficients,
    grid: &GridSpec,
    dt: f64,
    phi1: f64,
    phi2: f64,
) -> SpectralPoint {
    let r = grid.ratios(dt);
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    let z0 = coeffs.mixed() * r.b * (-s1 * s2 + grid.beta * (1.0 - c1) * (1.0 - c2));
    let z1 = Complex64::new(-2.0 * coeffs.d11 * r.a1 * (1.0 - c1), coeffs.c1 * r.q1 * s1);
    let z2 = Complex64::new(-2.0 * coeffs.d22 * r.a2 * (1.0 - c2), coeffs.c2 * r.q2 * s2);
    SpectralPoint::new(Complex64::new(z0, 0.0), z1, z2)
}

pub fn fourier_symbols(
    coeffs: &PdeCoefficients,
    grid: &GridSpec,
    params: &SchemeParams,
    mode: FourierMode,
) -> SpectralPoint {
    let (phi1, phi2) = mode.angles(grid);
    symbols_at_angles(coeffs, grid, params.dt(), phi1, phi2)
}

/// Worst cone margin over all modes of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeReport {
    /// `min 2 sqrt(Re z1 Re z2) − |z0|` over all modes.
    pub worst_margin: f64,
    pub worst_mode: FourierMode,
    /// Largest `max(Re z1, Re z2)` seen; positive values break the cone outright.
    pub max_real_part: f64,
}

impl ConeReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.worst_margin >= -slack && self.max_real_part <= slack
    }
}

pub fn verify_cone_all_modes(coeffs: &PdeCoefficients, grid: &GridSpec, params: &SchemeParams) -> ConeReport {
    let fold_row = |k1: usize| {
        let mut best = (f64::INFINITY, FourierMode::new(k1, 0));
        let mut max_re = f64::NEG_INFINITY;
        for k2 in 0..grid.m2 {
            let mode = FourierMode::new(k1, k2);
            let pt = fourier_symbols(coeffs, grid, params, mode);
            let margin = cone_margin(&pt);
            if margin < best.0 {
                best = (margin, mode);
            }
            max_re = max_re.max(pt.z1.re).max(pt.z2.re);
        }
        (best.0, best.1, max_re)
    };
    let (worst_margin, worst_mode, max_real_part) = (0..grid.m1).into_par_iter().map(fold_row).reduce(
        || (f64::INFINITY, FourierMode::new(usize::MAX, usize::MAX), f64::NEG_INFINITY),
        |a, b| {
            let pick = if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a };
            (pick.0, pick.1, a.2.max(b.2))
        },
    );
    ConeReport { worst_margin, worst_mode, max_real_part }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::cone_condition;

    fn params(dt: f64) -> SchemeParams {
        SchemeParams::new(0.5, dt).unwrap()
    }

    #[test]
    fn zero_mode_has_zero_symbols() {
        let c = PdeCoefficients::new(1.3, -0.7, 2.0, 0.4, 0.1, 1.0).unwrap();
        let g = GridSpec::new(8, 6, 0.1, 0.2, 0.3).unwrap();
        let pt = fourier_symbols(&c, &g, &params(0.05), FourierMode::new(0, 0));
        assert_eq!(pt.z0.norm(), 0.0);
        assert_eq!(pt.z1.norm(), 0.0);
        assert_eq!(pt.z2.norm(), 0.0);
    }

    #[test]
    fn highest_mode_without_mixed_term() {
        let h = 0.125;
        let c = PdeCoefficients::new(0.0, 0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let g = GridSpec::new(8, 8, h, h, 0.0).unwrap();
        let pt = fourier_symbols(&c, &g, &params(h * h), FourierMode::new(4, 4));
        assert!(pt.z0.norm() < 1e-15);
        assert!((pt.z1 - Complex64::new(-4.0, 0.0)).norm() < 1e-12);
        assert!((pt.z2 - Complex64::new(-4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quarter_mode_with_mixed_term() {
        let h = 0.125;
        let c = PdeCoefficients::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let g = GridSpec::new(8, 8, h, h, 0.0).unwrap();
        let pt = fourier_symbols(&c, &g, &params(h * h), FourierMode::new(2, 2));
        assert!((pt.z0 - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((pt.z1 - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((pt.z2 - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!(cone_condition(&pt));
    }

    #[test]
    fn psd_validation() {
        assert!(PdeCoefficients::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_ok());
        assert!(PdeCoefficients::new(0.0, 0.0, 1.0, 1.5, 1.0, 1.0).is_err());
        assert!(PdeCoefficients::new(0.0, 0.0, -1.0, 0.0, 0.0, 1.0).is_err());
        // Skew off-diagonal entries cancel in the symmetric part.
        assert!(PdeCoefficients::new(0.0, 0.0, 1.0, 5.0, -5.0, 1.0).is_ok());
        assert!(PdeCoefficients::new(f64::NAN, 0.0, 1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(2, 8, 0.1, 0.1, 0.0).is_err());
        assert!(GridSpec::new(8, 8, 0.0, 0.1, 0.0).is_err());
        assert!(GridSpec::new(8, 8, 0.1, 0.1, 1.5).is_err());
        assert!(GridSpec::new(3, 3, 0.1, 0.1, -1.0).is_ok());
    }

    #[test]
    fn identity_diffusion_stays_in_cone() {
        let c = PdeCoefficients::new(0.0, 0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let g = GridSpec::new(16, 12, 0.05, 0.07, 0.5).unwrap();
        let report = verify_cone_all_modes(&c, &g, &params(3.0));
        assert!(report.worst_margin >= 0.0);
        assert!(report.holds(0.0));
    }

    #[test]
    fn degenerate_diffusion_reaches_cone_boundary() {
        let c = PdeCoefficients::diffusion(1.0, 2.0, 1.0).unwrap();
        let g = GridSpec::unit_square(16, 16).unwrap();
        let report = verify_cone_all_modes(&c, &g, &params(0.01));
        assert!(report.worst_margin.abs() <= 1e-12, "{report:?}");
        assert!(report.worst_margin >= -1e-12);
    }

    #[test]
    fn pure_convection_has_zero_margin() {
        let c = PdeCoefficients::new(1.0, -2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let g = GridSpec::unit_square(10, 10).unwrap();
        let report = verify_cone_all_modes(&c, &g, &params(0.1));
        assert_eq!(report.worst_margin, 0.0);
        assert_eq!(report.worst_mode, FourierMode::new(0, 0));
        for mode in g.modes() {
            let pt = fourier_symbols(&c, &g, &params(0.1), mode);
            assert_eq!(pt.z0.norm(), 0.0);
        }
    }

    #[test]
    fn symbols_scale_linearly_in_dt() {
        let c = PdeCoefficients::new(0.4, 1.1, 0.8, 0.2, 0.3, 1.7).unwrap();
        let g = GridSpec::new(9, 7, 0.11, 0.13, -0.4).unwrap();
        for mode in g.modes() {
            let a = fourier_symbols(&c, &g, &params(0.25), mode);
            let b = fourier_symbols(&c, &g, &params(0.5), mode);
            assert_eq!(b.z0, 2.0 * a.z0);
            assert_eq!(b.z1, 2.0 * a.z1);
            assert_eq!(b.z2, 2.0 * a.z2);
        }
    }
}
