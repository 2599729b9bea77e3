use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::config::AMode;

/// Lower floor on every saturation value.
pub const SATURATION_FLOOR: f64 = 1e-3;

/// Saturation vector of length `n`. One uniform draw `xi` in `[0, 1)` per
/// entry from Xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
pub fn generate_a(n: usize, mode: AMode, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let xi: f64 = rng.random();
            match mode {
                AMode::Ge1 => 1.0 + xi,
                AMode::UnitInterval => SATURATION_FLOOR + (1.0 - SATURATION_FLOOR) * xi,
                AMode::Positive => 2.0 * xi + SATURATION_FLOOR,
            }
        })
        .collect()
}
