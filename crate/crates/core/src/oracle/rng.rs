//! Stateless keyed random numbers.
//!
//! Every draw is a pure function of `(seed, key...)`, so the same consumer and
//! option always see the same noise no matter how evaluation is scheduled.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a seed and a sequence of words into one 64-bit value.
#[inline]
pub fn keyed_u64(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(seed.wrapping_add(GOLDEN)), |h, &w| mix64(h ^ w.wrapping_add(GOLDEN)))
}

/// Uniform in the open interval (0, 1).
#[inline]
pub fn keyed_uniform(seed: u64, words: &[u64]) -> f64 {
    ((keyed_u64(seed, words) >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal via Box-Muller on two counter-indexed uniforms.
pub fn keyed_normal(seed: u64, words: &[u64]) -> f64 {
    let mut key = words.to_vec();
    key.push(0);
    let u1 = keyed_uniform(seed, &key);
    *key.last_mut().unwrap() = 1;
    let u2 = keyed_uniform(seed, &key);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Seed for the `index`-th independent stream derived from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    keyed_u64(seed, &[0x5eed, index])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_function_of_key() {
        assert_eq!(keyed_u64(7, &[1, 2, 3]), keyed_u64(7, &[1, 2, 3]));
        assert_ne!(keyed_u64(7, &[1, 2, 3]), keyed_u64(7, &[1, 3, 2]));
        assert_ne!(keyed_u64(7, &[1, 2, 3]), keyed_u64(8, &[1, 2, 3]));
    }

    #[test]
    fn uniform_in_open_interval() {
        for i in 0..10_000 {
            let u = keyed_uniform(42, &[i]);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let n = 200_000u64;
        let draws: Vec<f64> = (0..n).map(|i| keyed_normal(3, &[i])).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
