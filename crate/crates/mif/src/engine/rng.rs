use std::collections::HashMap;

use rand::RngCore;

/// SplitMix64 finalizer; the workhorse behind seed derivation and the oracle
/// string. Deterministic across platforms.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine two words into one derived seed.
pub fn mix2(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Combine three words into one derived seed.
pub fn mix3(a: u64, b: u64, c: u64) -> u64 {
    mix2(mix2(a, b), c)
}

/// Map one random word to `[0, bound)` by widening multiply. The modulo bias
/// is below `bound / 2^64`, negligible for simulation purposes, and the map
/// is stable, which golden outputs rely on.
pub fn uniform_below(word: u64, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    ((word as u128 * bound as u128) >> 64) as u64
}

/// Draw `count` distinct values from `{1..=range}`, uniformly over ordered
/// sequences, by a partial Fisher-Yates shuffle over a sparse virtual array.
pub fn sample_distinct(rng: &mut dyn RngCore, count: u64, range: u64) -> Vec<u64> {
    assert!(
        count <= range,
        "cannot draw {count} distinct values from {range}"
    );
    let mut swapped: HashMap<u64, u64> = HashMap::new();
    let mut out = Vec::with_capacity(count as usize);
    for i in 0..count {
        let j = i + uniform_below(rng.next_u64(), range - i);
        let vi = swapped.get(&i).copied().unwrap_or(i);
        let vj = swapped.get(&j).copied().unwrap_or(j);
        out.push(vj + 1);
        if i != j {
            swapped.insert(j, vi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sample_distinct_is_distinct_and_in_range() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let v = sample_distinct(&mut rng, 9, 17);
            let mut sorted = v.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 9);
            assert!(v.iter().all(|&x| (1..=17).contains(&x)));
        }
    }

    #[test]
    fn sample_distinct_full_range_is_permutation() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut v = sample_distinct(&mut rng, 12, 12);
        v.sort_unstable();
        assert_eq!(v, (1..=12).collect::<Vec<_>>());
    }

    #[test]
    fn sample_distinct_roughly_uniform_first_element() {
        // Chi-square on the first drawn element over {1..8}.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let trials = 8000usize;
        let mut counts = [0f64; 8];
        for _ in 0..trials {
            let v = sample_distinct(&mut rng, 3, 8);
            counts[(v[0] - 1) as usize] += 1.0;
        }
        let expect = trials as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|c| (c - expect).powi(2) / expect).sum();
        // 7 degrees of freedom, p = 0.01 cutoff is 18.48.
        assert!(chi2 < 18.48, "chi2 = {chi2}");
    }
}
