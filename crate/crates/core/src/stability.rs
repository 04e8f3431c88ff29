//! Stability function of the Modified Craig-Sneyd scheme and the analytic
//! quantities used to bound it.
//!
//! Applied to the scalar test equation `U' = (λ0 + λ1 + λ2) U`, one MCS step
//! multiplies the solution by
//!
//! ```text
//! S(z0, z1, z2) = 1 + (z0 + z)/p + θ z0 (z0 + z)/p² + (1/2 − θ)(z0 + z)²/p²
//! ```
//!
//! with `zj = Δt λj`, `z = z1 + z2` and `p = (1 − θ z1)(1 − θ z2)`. The step is
//! von Neumann stable when `|S| ≤ 1`.

use num_complex::Complex64;
use thiserror::Error;

/// Slack used for every `|S| ≤ 1` comparison.
pub const STABILITY_SLACK: f64 = 1e-12;

/// Relative pole tolerance; `|p|` must exceed this times `max(1, |z1| |z2| θ²)`.
pub const POLE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("stability function has a pole: |p| = {p_abs:e} (z1 or z2 at 1/θ)")]
    Pole { p_abs: f64 },
    #[error("argument outside the admissible domain: {0}")]
    Domain(String),
    #[error("invalid scheme parameter: {0}")]
    InvalidParameter(String),
}

/// Scheme parameter θ together with the time step Δt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    theta: f64,
    dt: f64,
}

impl SchemeParams {
    pub fn new(theta: f64, dt: f64) -> Result<Self, StabilityError> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(StabilityError::InvalidParameter(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(StabilityError::InvalidParameter(format!(
                "dt must be positive and finite, got {dt}"
            )));
        }
        Ok(Self { theta, dt })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `θ Δt`, the weight of every implicit stage.
    pub fn theta_dt(&self) -> f64 {
        self.theta * self.dt
    }
}

/// A triplet of scaled eigenvalues `(z0, z1, z2)`: `z0` from the mixed
/// derivative, `z1` and `z2` from the two spatial directions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralPoint {
    pub z0: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
}

impl SpectralPoint {
    pub fn new(z0: Complex64, z1: Complex64, z2: Complex64) -> Self {
        Self { z0, z1, z2 }
    }

    /// Triplet with all components on the real axis.
    pub fn real(z0: f64, z1: f64, z2: f64) -> Self {
        Self::new(z0.into(), z1.into(), z2.into())
    }

    /// `z = z1 + z2`.
    pub fn z(&self) -> Complex64 {
        self.z1 + self.z2
    }

    /// `p = (1 − θ z1)(1 − θ z2)`.
    pub fn p(&self, theta: f64) -> Complex64 {
        (1.0 - theta * self.z1) * (1.0 - theta * self.z2)
    }

    /// `q = p² + p z + (1/2 − θ) z²`.
    pub fn q(&self, theta: f64) -> Complex64 {
        let p = self.p(theta);
        let z = self.z();
        p * p + p * z + (0.5 - theta) * z * z
    }

    /// `w = p + (1 − θ) z`.
    pub fn w(&self, theta: f64) -> Complex64 {
        self.p(theta) + (1.0 - theta) * self.z()
    }

    fn checked_p(&self, theta: f64) -> Result<Complex64, StabilityError> {
        let p = self.p(theta);
        let scale = (self.z1.norm() * self.z2.norm() * theta * theta).max(1.0);
        let p_abs = p.norm();
        if !(p_abs >= POLE_TOLERANCE * scale) {
            return Err(StabilityError::Pole { p_abs });
        }
        Ok(p)
    }
}

/// `S(z0, z1, z2) − 1`, evaluated without forming the leading 1 so that
/// `|S|² − 1 = 2 Re(S − 1) + |S − 1|²` keeps full precision near the origin.
pub fn stability_increment(theta: f64, pt: &SpectralPoint) -> Result<Complex64, StabilityError> {
    let p = pt.checked_p(theta)?;
    let s = pt.z0 + pt.z();
    let r = s / p;
    Ok(r + theta * pt.z0 * s / (p * p) + (0.5 - theta) * r * r)
}

/// The MCS stability function in its defining form.
pub fn eval_stability_function(theta: f64, pt: &SpectralPoint) -> Result<Complex64, StabilityError> {
    stability_increment(theta, pt).map(|d| 1.0 + d)
}

/// Stability function of the Douglas scheme, `1 + (z0 + z) / p`.
pub fn eval_douglas_function(theta: f64, pt: &SpectralPoint) -> Result<Complex64, StabilityError> {
    let p = pt.checked_p(theta)?;
    Ok(1.0 + (pt.z0 + pt.z()) / p)
}

/// The same function written as `(z0²/2 + w z0 + q) / p²`.
pub fn eval_stability_function_alt(theta: f64, pt: &SpectralPoint) -> Result<Complex64, StabilityError> {
    let p = pt.checked_p(theta)?;
    let z0 = pt.z0;
    Ok((0.5 * z0 * z0 + pt.w(theta) * z0 + pt.q(theta)) / (p * p))
}

/// `|S|`; poles map to infinity.
pub fn abs_stability(theta: f64, pt: &SpectralPoint) -> f64 {
    eval_stability_function(theta, pt).map_or(f64::INFINITY, |s| s.norm())
}

/// `|S|² − 1` evaluated through the increment form.
pub fn abs_sq_minus_one(theta: f64, pt: &SpectralPoint) -> Result<f64, StabilityError> {
    let d = stability_increment(theta, pt)?;
    Ok(2.0 * d.re + d.norm_sqr())
}

/// Radius `2 sqrt(Re z1 Re z2)` of the admissible disc for `z0`.
///
/// The product is clamped at zero so `−0 · −0` style artefacts cannot produce NaN.
pub fn cone_radius(z1: Complex64, z2: Complex64) -> f64 {
    2.0 * (z1.re * z2.re).max(0.0).sqrt()
}

/// `2 sqrt(Re z1 Re z2) − |z0|`; nonnegative inside the cone.
pub fn cone_margin(pt: &SpectralPoint) -> f64 {
    cone_radius(pt.z1, pt.z2) - pt.z0.norm()
}

/// `|z0| ≤ 2 sqrt(Re z1 Re z2)`, `Re z1 ≤ 0`, `Re z2 ≤ 0`.
pub fn cone_condition(pt: &SpectralPoint) -> bool {
    cone_condition_with_slack(pt, 0.0)
}

/// Cone condition with `slack` added to every right-hand side.
pub fn cone_condition_with_slack(pt: &SpectralPoint, slack: f64) -> bool {
    pt.z1.re <= slack && pt.z2.re <= slack && pt.z0.norm() <= cone_radius(pt.z1, pt.z2) + slack
}

/// `|p/(2θ)| − |p/(2θ) + z| − 2 sqrt(Re z1 Re z2)`, nonnegative whenever
/// `Re z1, Re z2 ≤ 0`.
///
/// The difference of moduli is formed as `(|A|² − |A+z|²) / (|A| + |A+z|)`,
/// which avoids cancellation when `1/θ` is large.
pub fn lemma2_gap(theta: f64, z1: Complex64, z2: Complex64) -> Result<f64, StabilityError> {
    if !(theta > 0.0) {
        return Err(StabilityError::Domain(format!("theta must be positive, got {theta}")));
    }
    if z1.re > 0.0 || z2.re > 0.0 {
        return Err(StabilityError::Domain(format!(
            "Re z1 and Re z2 must be nonpositive, got {} and {}",
            z1.re, z2.re
        )));
    }
    let pt = SpectralPoint::new(Complex64::default(), z1, z2);
    let a = pt.p(theta) / (2.0 * theta);
    let z = pt.z();
    let a_abs = a.norm();
    let b_abs = (a + z).norm();
    let denom = a_abs + b_abs;
    let diff = if denom > 0.0 { -(2.0 * (a.conj() * z).re + z.norm_sqr()) / denom } else { 0.0 };
    Ok(diff - cone_radius(z1, z2))
}

/// `f1(φ, r) = |2θ + (1 − θ)(r e^{iφ} − 1)|`.
pub fn thm5_f1(theta: f64, r: f64, phi: f64) -> f64 {
    let e = Complex64::from_polar(r, phi) - 1.0;
    (2.0 * theta + (1.0 - theta) * e).norm()
}

/// `f2(φ, r) = |8θ² + 4θ(r e^{iφ} − 1) + (1 − 2θ)(r e^{iφ} − 1)²|`.
pub fn thm5_f2(theta: f64, r: f64, phi: f64) -> f64 {
    let e = Complex64::from_polar(r, phi) - 1.0;
    (8.0 * theta * theta + 4.0 * theta * e + (1.0 - 2.0 * theta) * e * e).norm()
}

/// Upper bound `((1 − r)² + 2(1 − r) f1 + f2) / (8θ²)` on `|S|` over the
/// cone, parametrised by `1 + 2θ z/p = r e^{iφ}`.
pub fn thm5_bound(theta: f64, r: f64, phi: f64) -> Result<f64, StabilityError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(StabilityError::Domain(format!("r must lie in [0, 1], got {r}")));
    }
    if !(theta > 0.0) {
        return Err(StabilityError::Domain(format!("theta must be positive, got {theta}")));
    }
    let s = 1.0 - r;
    Ok((s * s + 2.0 * s * thm5_f1(theta, r, phi) + thm5_f2(theta, r, phi)) / (8.0 * theta * theta))
}

/// `ab + bc + 4ac`; nonnegative when `|a + b + c| = 1` and the quadratic
/// `aζ² + bζ + c` maps the unit circle into the unit disc.
pub fn lemma1_margin(a: f64, b: f64, c: f64) -> f64 {
    a * b + b * c + 4.0 * a * c
}

/// `f(φ) = |a e^{2iφ} + b e^{iφ} + c|²`.
pub fn lemma1_profile(a: f64, b: f64, c: f64, phi: f64) -> f64 {
    let e = Complex64::from_polar(1.0, phi);
    (a * e * e + b * e + c).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn origin_is_neutral() {
        let s = eval_stability_function(0.5, &SpectralPoint::default()).unwrap();
        assert_eq!(s, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn quarter_theta_on_imaginary_axis_has_unit_modulus() {
        // |q|² − |p²|² = [(θ² − 2θ + 1/2)² − θ⁴] v⁴, zero at θ = 1/4.
        let theta: f64 = 0.25;
        let bracket = (theta * theta - 2.0 * theta + 0.5).powi(2) - theta.powi(4);
        assert_eq!(bracket, 0.0);
        let pt = SpectralPoint::new(Complex64::default(), I, I);
        let s = eval_stability_function(theta, &pt).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15, "{}", s.norm());
    }

    #[test]
    fn taylor_point_at_two_fifths() {
        let a = -0.01;
        let eta = Complex64::new(1.0, 1.0);
        let pt = SpectralPoint::new((-2.0 * a).into(), a * eta, a * eta);
        let excess = abs_sq_minus_one(0.4, &pt).unwrap();
        assert!(excess.abs() < 1e-7, "{excess}");
    }

    #[test]
    fn pole_is_rejected() {
        let pt = SpectralPoint::real(0.0, 2.0, -1.0);
        assert!(matches!(eval_stability_function(0.5, &pt), Err(StabilityError::Pole { .. })));
        assert_eq!(abs_stability(0.5, &pt), f64::INFINITY);
    }

    #[test]
    fn alternate_form_agrees() {
        let pt = SpectralPoint::new(
            Complex64::new(0.3, -0.2),
            Complex64::new(-1.5, 2.0),
            Complex64::new(-0.25, -3.0),
        );
        for theta in [0.2, 1.0 / 3.0, 0.5, 0.9] {
            let a = eval_stability_function(theta, &pt).unwrap();
            let b = eval_stability_function_alt(theta, &pt).unwrap();
            assert!((a - b).norm() <= 1e-13 * a.norm());
        }
    }

    #[test]
    fn cone_examples() {
        assert!(cone_condition(&SpectralPoint::default()));
        assert!(cone_condition(&SpectralPoint::real(1.0, -1.0, -1.0)));
        assert!(!cone_condition(&SpectralPoint::real(3.0, -1.0, -1.0)));
        assert!(!cone_condition(&SpectralPoint::real(0.0, 0.5, -1.0)));
        for t in [1e-3, 0.5, 1.0, 7.0, 1e4] {
            assert!(cone_condition(&SpectralPoint::real(2.0 * t, -t, -t)));
        }
    }

    #[test]
    fn cone_radius_handles_signed_zero() {
        let r = cone_radius(Complex64::new(-0.0, 1.0), Complex64::new(0.0, 1.0));
        assert_eq!(r, 0.0);
    }

    #[test]
    fn lemma2_examples() {
        let zero = Complex64::default();
        assert_eq!(lemma2_gap(0.5, zero, zero).unwrap(), 0.0);

        let m1 = Complex64::new(-1.0, 0.0);
        let g = lemma2_gap(0.5, m1, m1).unwrap();
        // |1.5²/1| − |2.25 − 2| − 2
        let by_hand: f64 = 2.25 - 0.25 - 2.0;
        assert!((g - by_hand).abs() < 1e-15);

        let z1 = Complex64::new(-1.0, 1.0);
        let z2 = Complex64::new(-1.0, -1.0);
        let g = lemma2_gap(0.5, z1, z2).unwrap();
        // Cauchy-Schwarz from v_j = (sqrt(-2 Re zj), |1 + θ zj| / sqrt(2θ)).
        let theta: f64 = 0.5;
        let v = |z: Complex64| [(-2.0 * z.re).sqrt(), (1.0 + theta * z).norm() / (2.0 * theta).sqrt()];
        let (v1, v2) = (v(z1), v(z2));
        let inner = v1[0] * v2[0] + v1[1] * v2[1];
        let norms = (v1[0].hypot(v1[1])) * (v2[0].hypot(v2[1]));
        assert!((g - (norms - inner)).abs() < 1e-14, "{g} vs {}", norms - inner);
        assert!(g >= 0.0);
    }

    #[test]
    fn lemma2_domain_error() {
        let bad = Complex64::new(0.1, 0.0);
        assert!(matches!(lemma2_gap(0.5, bad, Complex64::default()), Err(StabilityError::Domain(_))));
    }

    #[test]
    fn thm5_bound_examples() {
        assert!((thm5_f1(0.5, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((thm5_f2(0.5, 1.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((thm5_bound(0.5, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((thm5_bound(0.75, 0.3, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(thm5_bound(0.5, 0.5, PI).unwrap() <= 1.0);
        assert!(matches!(thm5_bound(0.5, 1.5, 0.0), Err(StabilityError::Domain(_))));
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_margin(0.0, 0.0, 1.0), 0.0);
        assert_eq!(lemma1_margin(1.0, -2.0, 1.0), 0.0);
        assert_eq!(lemma1_margin(0.25, 0.5, 0.25), 0.5);
        assert!((lemma1_profile(1.0, -2.0, 1.0, PI) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_params_validation() {
        assert!(SchemeParams::new(0.0, 1.0).is_err());
        assert!(SchemeParams::new(0.5, -1.0).is_err());
        assert!(SchemeParams::new(f64::NAN, 1.0).is_err());
        let p = SchemeParams::new(0.5, 0.1).unwrap();
        assert_eq!(p.theta_dt(), 0.05);
    }
}
