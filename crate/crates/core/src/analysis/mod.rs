//! Numerical evidence for the stability thresholds of the MCS scheme:
//! the random-sampling scan of `max |S|` against θ and the checks behind the
//! individual necessary and sufficient conditions.
//!
//! Random draws come from ChaCha8 streams addressed by `(seed, stream, sample)`:
//! the stream selects the θ entry and the word position selects the sample,
//! so any partition of the work across threads reproduces the serial result
//! bit for bit.

mod checks;
mod sampling;
mod theorems;

pub use checks::{run_checks, CheckOutcome, Theorem, VerifyOptions};
pub use sampling::{figure1_point, lemma2_sample, max_over_samples, thm5_point, Extreme, SampleStream};
pub use theorems::{
    lemma2_random_check, thm1_criterion_margin, thm1_threshold_scan, thm2_grid_scan, thm3_cubic_coefficient,
    thm3_predicted_coefficient, thm4_maximize, thm4_ratio, thm4_witness_search, thm5_bound_checks,
    thm5_random_check, Thm1Row, Thm2Scan, Thm4Witness, Thm5BoundCheck, POINTS_PER_DECADE,
};

use std::io::{self, Write};

use crate::stability::{abs_stability, SpectralPoint};

/// Default number of samples per θ.
pub const DEFAULT_SAMPLES: usize = 2_000_000;

/// `θ = 1/4 + k/400` for `k = 0, 1, …, 100`.
pub fn default_theta_grid() -> Vec<f64> {
    (0..=100).map(|k| 0.25 + k as f64 / 400.0).collect()
}

/// `theta_min + k step` for all `k` with value at most `theta_max` (plus a
/// little slack for the last point).
pub fn theta_grid(theta_min: f64, theta_max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || theta_max < theta_min {
        return vec![theta_min];
    }
    let n = ((theta_max - theta_min) / step + 1e-9).floor() as usize;
    // Steps like 1/400 are not representable; dividing by the integer
    // reciprocal reproduces `default_theta_grid` exactly.
    let inv = (1.0 / step).round();
    if (inv * step - 1.0).abs() < 1e-12 {
        (0..=n).map(|k| theta_min + k as f64 / inv).collect()
    } else {
        (0..=n).map(|k| theta_min + k as f64 * step).collect()
    }
}

/// Result of the random scan: one maximum and its witness per θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub theta_grid: Vec<f64>,
    pub max_abs_s: Vec<f64>,
    pub samples_per_theta: usize,
    pub seed: u64,
    pub witness: Vec<SpectralPoint>,
}

impl ScanReport {
    pub fn max_at(&self, theta: f64) -> Option<f64> {
        self.theta_grid.iter().position(|t| (t - theta).abs() < 1e-12).map(|k| self.max_abs_s[k])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "theta,max_abs_s,witness_z0_re,witness_z0_im,witness_z1_re,witness_z1_im,witness_z2_re,witness_z2_im"
        )?;
        for ((theta, m), w) in self.theta_grid.iter().zip(&self.max_abs_s).zip(&self.witness) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                theta, m, w.z0.re, w.z0.im, w.z1.re, w.z1.im, w.z2.re, w.z2.im
            )?;
        }
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "seed = {}", self.seed)?;
        writeln!(out, "samples = {}", self.samples_per_theta)?;
        writeln!(out, "thetas = {}", self.theta_grid.len())?;
        writeln!(out, "generator = ChaCha8 (stream = theta index, word position = sample)")?;
        writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"))
    }
}

/// Estimates `max |S_θ|` under the cone condition with real `z0`, drawing
/// `samples` random triplets per θ.
pub fn figure1_scan(seed: u64, samples: usize, theta_grid: &[f64]) -> ScanReport {
    use rayon::prelude::*;

    let extremes: Vec<Extreme> = theta_grid
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| {
            let stream = SampleStream::new(seed, k as u64, sampling::FIGURE1_DRAWS);
            max_over_samples(&stream, samples, |rng| {
                let pt = figure1_point(rng);
                (abs_stability(theta, &pt), pt)
            })
        })
        .collect();

    ScanReport {
        theta_grid: theta_grid.to_vec(),
        max_abs_s: extremes.iter().map(|e| e.value).collect(),
        samples_per_theta: samples,
        seed,
        witness: extremes.iter().map(|e| e.point).collect(),
    }
}
