//! Seeded, named random-number streams.
//!
//! All randomness in the crate flows from a single master seed through
//! `stream(seed, label, index)`. Streams are independent of scheduling order,
//! so parallel tree fitting stays bit-reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive a deterministic RNG for the sub-stream `(label, index)` of `seed`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut state =
        seed ^ fnv1a(label.as_bytes()).rotate_left(17) ^ index.wrapping_mul(0xA24B_AED4_963E_E407);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Standard-normal draw via Box-Muller, using two uniforms from `rng`.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand::RngExt;
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    #[test]
    fn streams_are_deterministic() {
        let a: Vec<u64> = (0..8).map(|_| stream(7, "forest", 3).random()).collect();
        let b: Vec<u64> = (0..8).map(|_| stream(7, "forest", 3).random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ_by_label_and_index() {
        let mut a = stream(7, "forest", 0);
        let mut b = stream(7, "split", 0);
        let mut c = stream(7, "forest", 1);
        let (x, y, z): (u64, u64, u64) = (a.random(), b.random(), c.random());
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn normal_draws_have_plausible_moments() {
        let mut rng = stream(11, "noise", 0);
        let n = 20_000;
        let draws: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
