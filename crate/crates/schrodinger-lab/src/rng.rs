//! Seeded randomness and random test data.

use crate::field::{GridSpec, SpectralField, SupportBall};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `stream` of a run seeded with `seed`, so parallel
/// work items draw the same numbers regardless of scheduling.
pub fn seeded_stream(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard real Gaussian sample (Box-Muller).
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard complex Gaussian sample.
pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    Complex64::from_polar(r, std::f64::consts::TAU * u2)
}

pub fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
}

/// Random band-limited data: Gaussian coefficients on the lattice inside `ball`, unit `L^2` norm.
pub fn random_band_limited(grid: &GridSpec, ball: SupportBall, rng: &mut impl Rng) -> SpectralField {
    let mut f = SpectralField::from_fn(grid.clone(), |xi| {
        if ball.contains(xi) {
            complex_normal(rng)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let norm = f.l2_norm();
    if norm > 0.0 {
        f = f.scaled(Complex64::new(1.0 / norm, 0.0));
    }
    f.support = Some(ball);
    f
}
