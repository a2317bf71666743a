//! Deterministic randomness plumbing.
//!
//! Every random quantity in the crate flows from a root seed through
//! [`derive_rng`], which maps a `(seed, path)` pair to an independent
//! counter-based stream. Parallel experiment cells and trials each derive
//! their own stream from their index path, so results are identical at any
//! worker-thread count and on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate's seedable generator. ChaCha with 8 rounds is fast, passes the
/// standard statistical batteries, and produces the same output on every
/// platform and word size.
pub type SeededRng = ChaCha8Rng;

/// SplitMix64 finalizer. Full-period bijective mixer; two inputs differing
/// in one bit yield outputs agreeing in roughly half their bits.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fold(seed: u64, path: &[u64]) -> u64 {
    let mut s = mix(seed ^ 0x6A09_E667_F3BC_C908);
    for &p in path {
        s = mix(s ^ mix(p));
    }
    s
}

/// Collapses `(seed, path)` to a single sub-seed, for handing a child
/// component its own root (e.g. one per sweep cell) that it can extend with
/// further path elements of its own.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    fold(seed, path)
}

/// Derives the RNG stream for `(seed, path)`.
///
/// The derivation is a pure function of its arguments: distinct paths give
/// statistically independent streams, and the same path always reproduces
/// the same stream regardless of call order, thread count, or platform.
pub fn derive_rng(seed: u64, path: &[u64]) -> SeededRng {
    let mut s = fold(seed, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        s = mix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    SeededRng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, path: &[u64], k: usize) -> Vec<u64> {
        let mut rng = derive_rng(seed, path);
        (0..k).map(|_| rng.random()).collect()
    }

    #[test]
    fn same_path_reproduces_exactly() {
        assert_eq!(draws(7, &[1, 2, 3], 16), draws(7, &[1, 2, 3], 16));
    }

    #[test]
    fn distinct_paths_diverge() {
        let base = draws(7, &[1, 2], 4);
        assert_ne!(base, draws(7, &[1, 3], 4));
        assert_ne!(base, draws(7, &[2, 1], 4));
        assert_ne!(base, draws(7, &[1], 4));
        assert_ne!(base, draws(7, &[1, 2, 0], 4));
        assert_ne!(base, draws(8, &[1, 2], 4));
    }

    #[test]
    fn path_is_not_flattened_by_concatenation() {
        // [a, b] must differ from [a ^ mix(b)] style collisions; spot-check a
        // few structurally adjacent paths.
        assert_ne!(draws(0, &[0, 0], 4), draws(0, &[0], 4));
        assert_ne!(draws(0, &[], 4), draws(0, &[0], 4));
    }

    #[test]
    fn derive_seed_matches_derive_rng_prefix() {
        // Extending a derived sub-seed must be stable (the sub-seed is the
        // fold state), though not required to equal the flat path; pin both
        // behaviors so accidental changes are caught.
        let sub = derive_seed(42, &[5]);
        assert_eq!(draws(sub, &[9], 4), draws(sub, &[9], 4));
        assert_eq!(derive_seed(42, &[5]), derive_seed(42, &[5]));
        assert_ne!(derive_seed(42, &[5]), derive_seed(42, &[6]));
    }

    #[test]
    fn stream_is_platform_stable() {
        // Frozen first draw of a fixed (seed, path): guards the derivation
        // and the generator choice against accidental change, which would
        // silently break reproducibility of published experiment CSVs.
        let first = draws(42, &[1, 2], 1)[0];
        assert_eq!(first, 12_595_522_974_475_286_553, "actual: {first}");
    }

    #[test]
    fn uniform_draws_cover_unit_interval() {
        let mut rng = derive_rng(3, &[0]);
        let n = 100_000;
        let mean = (0..n).map(|_| rng.random::<f64>()).sum::<f64>() / n as f64;
        // Mean of Uniform(0,1): SE = 1/sqrt(12 n) ~ 9.1e-4; allow 5 SE.
        assert!((mean - 0.5).abs() < 5.0 * 9.13e-4, "mean {mean}");
    }
}
