//! Periodic (cyclic) tridiagonal systems with constant diagonals.
//!
//! The matrix has `lower` on the subdiagonal and in the top-right corner,
//! `diag` on the diagonal, and `upper` on the superdiagonal and in the
//! bottom-left corner, i.e. row `i` reads `lower x[i-1] + diag x[i] + upper x[i+1]`
//! with indices taken modulo `n`.
//!
//! Systems are solved with the Thomas algorithm plus a Sherman-Morrison
//! correction for the two corner entries. Both tridiagonal factorizations are
//! computed once. When a pivot collapses the solver falls back to a dense LU
//! factorization with partial pivoting.

use nalgebra::{DMatrix, DVector, LU};

use super::SolverError;

const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    n: usize,
    lower: f64,
    diag: f64,
    upper: f64,
    kind: Factorization,
}

#[derive(Debug, Clone)]
enum Factorization {
    ShermanMorrison {
        /// Modified pivots of the tridiagonal part.
        pivots: Vec<f64>,
        /// `upper / pivot[i]` from the forward sweep.
        gamma: Vec<f64>,
        /// Solution of `T z = u` for the rank-one correction vector `u`.
        corr: Vec<f64>,
        /// `α_tr / γ`, the last entry of `v`.
        v_last: f64,
        /// `1 + v · z`.
        denom: f64,
    },
    Dense(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl CyclicTridiagonal {
    pub fn new(n: usize, lower: f64, diag: f64, upper: f64) -> Result<Self, SolverError> {
        if n < 3 {
            return Err(SolverError::Dimension(format!("cyclic system needs n >= 3, got {n}")));
        }
        if !(lower.is_finite() && diag.is_finite() && upper.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        let scale = lower.abs().max(diag.abs()).max(upper.abs());
        let kind = match Self::sherman_morrison(n, lower, diag, upper, scale) {
            Some(f) => f,
            None => Self::dense(n, lower, diag, upper, scale)?,
        };
        Ok(Self { n, lower, diag, upper, kind })
    }

    fn sherman_morrison(n: usize, lower: f64, diag: f64, upper: f64, scale: f64) -> Option<Factorization> {
        // A = T + u vᵀ with u = (γ, 0, …, 0, upper)ᵀ and v = (1, 0, …, 0, lower/γ)ᵀ.
        let gamma_sm = -diag;
        if gamma_sm.abs() <= PIVOT_TOLERANCE * scale {
            return None;
        }
        let mut main = vec![diag; n];
        main[0] -= gamma_sm;
        main[n - 1] -= upper * lower / gamma_sm;

        let mut pivots = vec![0.0; n];
        let mut gamma = vec![0.0; n];
        pivots[0] = main[0];
        if pivots[0].abs() <= PIVOT_TOLERANCE * scale {
            return None;
        }
        for i in 1..n {
            gamma[i] = upper / pivots[i - 1];
            pivots[i] = main[i] - lower * gamma[i];
            if pivots[i].abs() <= PIVOT_TOLERANCE * scale {
                return None;
            }
        }

        let mut corr = vec![0.0; n];
        corr[0] = gamma_sm;
        corr[n - 1] = upper;
        thomas_in_place(lower, &pivots, &gamma, &mut corr);

        let v_last = lower / gamma_sm;
        let denom = 1.0 + corr[0] + v_last * corr[n - 1];
        if denom.abs() <= PIVOT_TOLERANCE {
            return None;
        }
        Some(Factorization::ShermanMorrison { pivots, gamma, corr, v_last, denom })
    }

    fn dense(n: usize, lower: f64, diag: f64, upper: f64, scale: f64) -> Result<Factorization, SolverError> {
        let lu = Self::dense_matrix(n, lower, diag, upper).lu();
        let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(min_pivot > PIVOT_TOLERANCE * scale) {
            return Err(SolverError::SingularSystem { min_pivot });
        }
        Ok(Factorization::Dense(lu))
    }

    fn dense_matrix(n: usize, lower: f64, diag: f64, upper: f64) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, (i + n - 1) % n)] += lower;
            a[(i, i)] += diag;
            a[(i, (i + 1) % n)] += upper;
        }
        a
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Whether the pivot-free path broke down and the dense fallback is active.
    pub fn uses_dense_fallback(&self) -> bool {
        matches!(self.kind, Factorization::Dense(_))
    }

    /// `A x` for the cyclic matrix.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            out[i] = self.lower * x[(i + n - 1) % n] + self.diag * x[i] + self.upper * x[(i + 1) % n];
        }
    }

    /// Overwrites `rhs` with the solution of `A x = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.n);
        match &self.kind {
            Factorization::ShermanMorrison { pivots, gamma, corr, v_last, denom } => {
                thomas_in_place(self.lower, pivots, gamma, rhs);
                let n = self.n;
                let factor = (rhs[0] + v_last * rhs[n - 1]) / denom;
                for (x, z) in rhs.iter_mut().zip(corr) {
                    *x -= factor * z;
                }
            }
            Factorization::Dense(lu) => {
                let mut b = DVector::from_column_slice(rhs);
                // Nonsingularity was checked at factorization time.
                lu.solve_mut(&mut b);
                rhs.copy_from_slice(b.as_slice());
            }
        }
    }
}

fn thomas_in_place(lower: f64, pivots: &[f64], gamma: &[f64], x: &mut [f64]) {
    let n = x.len();
    x[0] /= pivots[0];
    for i in 1..n {
        x[i] = (x[i] - lower * x[i - 1]) / pivots[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= gamma[i + 1] * x[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(sys: &CyclicTridiagonal, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        sys.apply(x, &mut ax);
        ax.iter().zip(b).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    #[test]
    fn matches_dense_solve() {
        let n = 7;
        let (l, d, u) = (-0.3, 2.1, -1.4);
        let sys = CyclicTridiagonal::new(n, l, d, u).unwrap();
        assert!(!sys.uses_dense_fallback());
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.2).collect();
        let mut x = b.clone();
        sys.solve_in_place(&mut x);
        let dense =
            CyclicTridiagonal::dense_matrix(n, l, d, u).lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_diagonal_uses_fallback() {
        // Eigenvalues 2e^{iφ} − e^{−iφ} stay away from zero, but the diagonal is empty.
        let sys = CyclicTridiagonal::new(5, -1.0, 0.0, 2.0).unwrap();
        assert!(sys.uses_dense_fallback());
        let b = [1.0, -2.0, 0.5, 3.0, 0.25];
        let mut x = b;
        sys.solve_in_place(&mut x);
        assert!(residual(&sys, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_system_is_reported() {
        // Rows sum to zero: constants lie in the kernel.
        let err = CyclicTridiagonal::new(6, 1.0, -2.0, 1.0).unwrap_err();
        assert!(matches!(err, SolverError::SingularSystem { .. }));
    }

    #[test]
    fn rejects_overflowed_coefficients() {
        let err = CyclicTridiagonal::new(4, 1.0, f64::INFINITY, 1.0).unwrap_err();
        assert!(matches!(err, SolverError::NonFinite));
    }

    #[test]
    fn rejects_tiny_systems() {
        assert!(CyclicTridiagonal::new(2, 1.0, 3.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn implicit_line_systems_solve_accurately(
            n in 3usize..40,
            d in 0.0f64..1e3,
            c in -1e3f64..1e3,
            seed in 0u64..1000,
        ) {
            // (I − θΔt A) for a diffusion-convection line operator.
            let lower = -(d - 0.5 * c);
            let upper = -(d + 0.5 * c);
            let diag = 1.0 + 2.0 * d;
            let sys = CyclicTridiagonal::new(n, lower, diag, upper).unwrap();
            let b: Vec<f64> = (0..n).map(|i| ((i as u64 * 31 + seed) as f64).sin()).collect();
            let mut x = b.clone();
            sys.solve_in_place(&mut x);
            let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            prop_assert!(residual(&sys, &x, &b) <= 1e-10 * bmax);
        }
    }
}
