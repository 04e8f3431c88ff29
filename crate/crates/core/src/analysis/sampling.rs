use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::stability::{cone_radius, SpectralPoint};

/// 64-bit draws consumed per figure-1 sample: five uniforms and one word of sign bits.
pub const FIGURE1_DRAWS: u64 = 6;
/// Figure-1 draws plus the phase of `z0`.
pub const THM5_DRAWS: u64 = 7;
/// θ, two real parts, two imaginary parts, signs.
pub const LEMMA2_DRAWS: u64 = 6;

const BLOCK: usize = 4096;

/// Addressable random stream: every sample owns a fixed window of
/// `draws_per_sample` 64-bit words, so sample `s` can be reached directly.
#[derive(Debug, Clone, Copy)]
pub struct SampleStream {
    seed: u64,
    stream: u64,
    draws_per_sample: u64,
}

impl SampleStream {
    pub fn new(seed: u64, stream: u64, draws_per_sample: u64) -> Self {
        Self { seed, stream, draws_per_sample }
    }

    /// Generator positioned at the first word of sample `index`.
    pub fn at(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        // Two 32-bit words per draw.
        rng.set_word_pos(2 * self.draws_per_sample as u128 * index as u128);
        rng
    }
}

/// Largest value seen and the first sample attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extreme {
    pub value: f64,
    pub index: usize,
    pub point: SpectralPoint,
}

impl Extreme {
    fn empty() -> Self {
        Self { value: f64::NEG_INFINITY, index: usize::MAX, point: SpectralPoint::default() }
    }

    /// Larger value wins; ties go to the smaller sample index.
    fn merge(self, other: Self) -> Self {
        if other.value > self.value || (other.value == self.value && other.index < self.index) {
            other
        } else {
            self
        }
    }
}

/// Evaluates `eval` on `samples` consecutive samples of `stream` and returns
/// the maximum. NaN counts as `+∞` so it cannot hide.
///
/// `eval` must consume exactly the stream's `draws_per_sample` words.
pub fn max_over_samples<F>(stream: &SampleStream, samples: usize, eval: F) -> Extreme
where
    F: Fn(&mut ChaCha8Rng) -> (f64, SpectralPoint) + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(samples);
            let mut rng = stream.at(start);
            let mut best = Extreme::empty();
            for index in start..end {
                let (v, point) = eval(&mut rng);
                let value = if v.is_nan() { f64::INFINITY } else { v };
                if value > best.value {
                    best = Extreme { value, index, point };
                }
            }
            best
        })
        .reduce(Extreme::empty, Extreme::merge)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

/// `zj = −10^(1 − 5 r1j) ± i 10^(1 − 5 r2j)` for `j = 1, 2`, signs from the low two bits.
fn convection_pair(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    let r11 = uniform(rng);
    let r21 = uniform(rng);
    let r12 = uniform(rng);
    let r22 = uniform(rng);
    let signs = rng.next_u64();
    let sign = |bit: u64| if signs >> bit & 1 == 0 { 1.0 } else { -1.0 };
    let z1 = Complex64::new(-(10f64).powf(1.0 - 5.0 * r11), sign(0) * (10f64).powf(1.0 - 5.0 * r21));
    let z2 = Complex64::new(-(10f64).powf(1.0 - 5.0 * r12), sign(1) * (10f64).powf(1.0 - 5.0 * r22));
    (z1, z2)
}

/// Random cone triplet with real `z0 = (2 r10 − 1) 2 sqrt(Re z1 Re z2)`.
pub fn figure1_point(rng: &mut ChaCha8Rng) -> SpectralPoint {
    let r10 = uniform(rng);
    let (z1, z2) = convection_pair(rng);
    let z0 = (2.0 * r10 - 1.0) * cone_radius(z1, z2);
    SpectralPoint::new(Complex64::new(z0, 0.0), z1, z2)
}

/// Figure-1 triplet with `z0` rotated by a uniform phase.
pub fn thm5_point(rng: &mut ChaCha8Rng) -> SpectralPoint {
    let mut pt = figure1_point(rng);
    let psi = TAU * uniform(rng);
    pt.z0 = pt.z0.re * Complex64::from_polar(1.0, psi);
    pt
}

/// `(θ, z1, z2)` with `θ ∈ (0, 1]` and the figure-1 recipe for `z1`, `z2`.
pub fn lemma2_sample(rng: &mut ChaCha8Rng) -> (f64, Complex64, Complex64) {
    let theta = 1.0 - uniform(rng);
    let (z1, z2) = convection_pair(rng);
    (theta, z1, z2)
}
