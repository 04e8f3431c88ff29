//! Numerical counterparts of the stability theorems: boundary grid searches,
//! the cubic Taylor coefficient along a diagonal ray, the rational function
//! whose maximum gives the θ ≥ 5/12 bound, and random checks of the
//! sufficient conditions.

use num_complex::Complex64;
use rayon::prelude::*;

use super::sampling::{
    lemma2_sample, max_over_samples, thm5_point, Extreme, SampleStream, LEMMA2_DRAWS, THM5_DRAWS,
};
use crate::stability::{
    abs_sq_minus_one, abs_stability, cone_condition, lemma2_gap, thm5_bound, SpectralPoint,
};

/// Points per decade of the log-spaced boundary grids.
pub const POINTS_PER_DECADE: usize = 200;

/// `±10^e` for `e` on a uniform grid over `[-3, 3]`.
fn signed_log_grid(per_decade: usize) -> Vec<f64> {
    let n = 6 * per_decade;
    let mut out = Vec::with_capacity(2 * (n + 1));
    for k in 0..=n {
        let v = 10f64.powf(-3.0 + k as f64 / per_decade as f64);
        out.push(v);
        out.push(-v);
    }
    out
}

/// `θ² − |θ² − 2θ + 1/2|`; nonnegative exactly when `θ ≥ 1/4`.
pub fn thm1_criterion_margin(theta: f64) -> f64 {
    theta * theta - (theta * theta - 2.0 * theta + 0.5).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm1Row {
    pub theta: f64,
    pub max_abs_s: f64,
    /// `(b1, b2)` attaining the maximum of `|S(0, i b1, i b2)|`.
    pub witness: (f64, f64),
    pub criterion_margin: f64,
}

/// Maximizes `|S_θ(0, i b1, i b2)|` over the imaginary-axis grid for each θ.
pub fn thm1_threshold_scan(thetas: &[f64]) -> Vec<Thm1Row> {
    let grid = signed_log_grid(POINTS_PER_DECADE);
    thetas
        .iter()
        .map(|&theta| {
            let (max_abs_s, witness) = grid
                .par_iter()
                .map(|&b1| {
                    let mut best = (f64::NEG_INFINITY, (b1, 0.0));
                    for &b2 in &grid {
                        let pt = SpectralPoint::new(
                            Complex64::default(),
                            Complex64::new(0.0, b1),
                            Complex64::new(0.0, b2),
                        );
                        let s = abs_stability(theta, &pt);
                        if s > best.0 {
                            best = (s, (b1, b2));
                        }
                    }
                    best
                })
                .reduce(|| (f64::NEG_INFINITY, (0.0, 0.0)), |a, b| if b.0 > a.0 { b } else { a });
            Thm1Row { theta, max_abs_s, witness, criterion_margin: thm1_criterion_margin(theta) }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm2Scan {
    pub theta: f64,
    pub max_abs_s: f64,
    pub witness: SpectralPoint,
}

/// Real triplets `z1, z2 ∈ −[1e-3, 1e3]` (log grid) and
/// `z0 = t 2 sqrt(z1 z2)` with `t` on a uniform grid over `[-1, 1]`.
pub fn thm2_grid_scan(theta: f64, per_decade: usize, z0_steps: usize) -> Thm2Scan {
    let n = 6 * per_decade;
    let axis: Vec<f64> = (0..=n).map(|k| -(10f64).powf(-3.0 + k as f64 / per_decade as f64)).collect();
    let fractions: Vec<f64> = (0..=z0_steps).map(|k| -1.0 + 2.0 * k as f64 / z0_steps as f64).collect();
    let (max_abs_s, witness) = axis
        .par_iter()
        .map(|&z1| {
            let mut best = (f64::NEG_INFINITY, SpectralPoint::default());
            for &z2 in &axis {
                let radius = 2.0 * (z1 * z2).sqrt();
                for &t in &fractions {
                    let pt = SpectralPoint::real(t * radius, z1, z2);
                    let s = abs_stability(theta, &pt);
                    if s > best.0 {
                        best = (s, pt);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, SpectralPoint::default()), |a, b| if b.0 > a.0 { b } else { a });
    Thm2Scan { theta, max_abs_s, witness }
}

/// `40θ² − 16θ`, the `a³` coefficient of `|S(−2a, a(1+i), a(1+i))|² − 1`.
pub fn thm3_predicted_coefficient(theta: f64) -> f64 {
    40.0 * theta * theta - 16.0 * theta
}

/// Fits the `a³` coefficient of `|S_θ(−2a, aη, aη)|² − 1`, `η = 1 + i`, from
/// `a ∈ {−h, −h/2, −h/4}` with `h = 10⁻²`, removing the `a⁴` and `a⁵`
/// contributions by two levels of Richardson extrapolation.
pub fn thm3_cubic_coefficient(theta: f64) -> f64 {
    let eta = Complex64::new(1.0, 1.0);
    let ratio = |a: f64| {
        let pt = SpectralPoint::new(Complex64::new(-2.0 * a, 0.0), a * eta, a * eta);
        abs_sq_minus_one(theta, &pt).expect("no pole near the origin") / (a * a * a)
    };
    let h = -1e-2;
    let (c0, c1, c2) = (ratio(h), ratio(h / 2.0), ratio(h / 4.0));
    // c(a) = C + D a + E a² + …
    let r0 = 2.0 * c1 - c0;
    let r1 = 2.0 * c2 - c1;
    (4.0 * r1 - r0) / 3.0
}

/// `(x³ + 2p x²) / (p³ + p² x)` with `p = 1 + x + x²/4`.
pub fn thm4_ratio(x: f64) -> f64 {
    let p = 1.0 + x + 0.25 * x * x;
    (x * x * x + 2.0 * p * x * x) / (p * p * p + p * p * x)
}

/// Sign of the derivative of [`thm4_ratio`] via the quotient rule.
fn thm4_slope_numerator(x: f64) -> f64 {
    let p = 1.0 + x + 0.25 * x * x;
    let dp = 1.0 + 0.5 * x;
    let num = x * x * x + 2.0 * p * x * x;
    let dnum = 3.0 * x * x + 2.0 * dp * x * x + 4.0 * p * x;
    let den = p * p * p + p * p * x;
    let dden = 3.0 * p * p * dp + 2.0 * p * dp * x + p * p;
    dnum * den - num * dden
}

/// Locates the maximum of [`thm4_ratio`] on `[0, 100]`: coarse grid, then
/// golden-section search, then bisection on the sign of the derivative to
/// resolve the flat top below `sqrt(ε)`.
pub fn thm4_maximize() -> (f64, f64) {
    let (lo_bound, hi_bound) = (0.0, 100.0);
    let n: usize = 10_000;
    let step = (hi_bound - lo_bound) / n as f64;
    let k_best = (0..=n)
        .map(|k| (k, thm4_ratio(lo_bound + k as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
        .0;
    let mut a = lo_bound + k_best.saturating_sub(1) as f64 * step;
    let mut b = (lo_bound + (k_best + 1) as f64 * step).min(hi_bound);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (thm4_ratio(c), thm4_ratio(d));
    while (b - a) > 1e-7 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = thm4_ratio(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = thm4_ratio(d);
        }
    }

    // Widen slightly so the bracket surely contains the sign change.
    let (mut lo, mut hi) = ((a - 1e-6).max(lo_bound), (b + 1e-6).min(hi_bound));
    if thm4_slope_numerator(lo) > 0.0 && thm4_slope_numerator(hi) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if thm4_slope_numerator(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let x = 0.5 * (lo + hi);
    (x, thm4_ratio(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm4Witness {
    pub point: SpectralPoint,
    pub abs_s: f64,
    /// `x = θ y` with `y = 2 sqrt(z1 z2)`.
    pub x: f64,
    pub phi: f64,
}

/// Searches `z1 = z2 = −x/(2θ)` (so that `θ 2 sqrt(z1 z2) = x`) and
/// `z0 = y e^{iφ}` on the cone boundary for `|S| > 1 + 1e-10`.
///
/// `x` runs over `[0.25, 8]` and `φ` over `(0, 0.5]`. `z0` is pulled inside
/// the boundary by a few ulps so that rounding in `|z0|` cannot leave the cone.
pub fn thm4_witness_search(theta: f64) -> Option<Thm4Witness> {
    let xs: Vec<f64> = (0..=310).map(|k| 0.25 + k as f64 * 0.025).collect();
    let phis: Vec<f64> = (1..=200).map(|k| k as f64 * 0.0025).collect();
    let shrink = 1.0 - 4.0 * f64::EPSILON;
    let best = xs
        .par_iter()
        .map(|&x| {
            let z = -x / (2.0 * theta);
            let y = 2.0 * (z * z).sqrt() * shrink;
            let mut best: Option<Thm4Witness> = None;
            for &phi in &phis {
                let point = SpectralPoint::new(
                    Complex64::from_polar(y, phi),
                    Complex64::new(z, 0.0),
                    Complex64::new(z, 0.0),
                );
                let abs_s = abs_stability(theta, &point);
                if best.is_none_or(|b| abs_s > b.abs_s) {
                    best = Some(Thm4Witness { point, abs_s, x, phi });
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if b.abs_s > a.abs_s { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        )?;
    (best.abs_s > 1.0 + 1e-10 && cone_condition(&best.point)).then_some(best)
}

/// Largest `|S|` over `samples` random cone triplets with complex `z0`.
pub fn thm5_random_check(theta: f64, samples: usize, seed: u64) -> Extreme {
    let stream = SampleStream::new(seed, theta.to_bits(), THM5_DRAWS);
    max_over_samples(&stream, samples, |rng| {
        let pt = thm5_point(rng);
        (abs_stability(theta, &pt), pt)
    })
}

/// Most negative `lemma2_gap` over `samples` random admissible inputs.
/// The returned [`Extreme`] holds the negated gap; `point.z0` carries θ.
pub fn lemma2_random_check(samples: usize, seed: u64) -> Extreme {
    let stream = SampleStream::new(seed, u64::MAX, LEMMA2_DRAWS);
    max_over_samples(&stream, samples, |rng| {
        let (theta, z1, z2) = lemma2_sample(rng);
        let gap = lemma2_gap(theta, z1, z2).unwrap_or(f64::NEG_INFINITY);
        (-gap, SpectralPoint::new(Complex64::new(theta, 0.0), z1, z2))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm5BoundCheck {
    pub theta: f64,
    /// `max |bound(θ, r, 0) − 1|` over the `r` grid.
    pub max_dev_at_zero: f64,
    /// Largest increase `bound(φ_{k+1}) − bound(φ_k)` over the `(r, φ)` grid.
    pub max_increase: f64,
    /// `max |bound(φ) − bound(2π − φ)|`.
    pub max_asymmetry: f64,
}

/// Evaluates the upper bound on an `r_points × phi_points` grid of
/// `[0, 1] × [0, π]`.
pub fn thm5_bound_checks(theta: f64, r_points: usize, phi_points: usize) -> Thm5BoundCheck {
    let rs: Vec<f64> = (0..r_points).map(|k| k as f64 / (r_points - 1) as f64).collect();
    let phis: Vec<f64> =
        (0..phi_points).map(|k| std::f64::consts::PI * k as f64 / (phi_points - 1) as f64).collect();
    let bound = |r: f64, phi: f64| thm5_bound(theta, r, phi).expect("r within [0, 1]");
    let mut check =
        Thm5BoundCheck { theta, max_dev_at_zero: 0.0, max_increase: f64::NEG_INFINITY, max_asymmetry: 0.0 };
    for &r in &rs {
        check.max_dev_at_zero = check.max_dev_at_zero.max((bound(r, 0.0) - 1.0).abs());
        let values: Vec<f64> = phis.iter().map(|&phi| bound(r, phi)).collect();
        for w in values.windows(2) {
            check.max_increase = check.max_increase.max(w[1] - w[0]);
        }
        for (&phi, &v) in phis.iter().zip(&values) {
            let mirrored = bound(r, std::f64::consts::TAU - phi);
            check.max_asymmetry = check.max_asymmetry.max((v - mirrored).abs());
        }
    }
    check
}
