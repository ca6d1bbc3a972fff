use crate::rng::SplitMix64;

/// Seeded Fisher-Yates permutation of `0..total_samples`.
pub fn shuffled_order(total_samples: u64, seed: u64) -> Vec<u64> {
    let mut order: Vec<u64> = (0..total_samples).collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..order.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}
