//! Small statistics helpers and seed derivation.

use std::collections::BTreeMap;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Total-variation distance between two distributions over the same keys.
/// Missing keys count as probability zero.
pub fn total_variation<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, &pa) in a {
        sum += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &pb) in b {
        if !a.contains_key(k) {
            sum += pb.abs();
        }
    }
    sum / 2.0
}

/// Normalises a histogram of counts into probabilities.
pub fn normalize<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(k, &c)| (k.clone(), if total == 0 { 0.0 } else { c as f64 / total as f64 }))
        .collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent-looking child seed for a task addressed by `path`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &i| splitmix64(acc ^ splitmix64(i.wrapping_add(0x51_7cc1_b727_220a))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert!(lo.abs() < 1e-15);
        assert!((hi - 0.036_994).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn tv_examples() {
        let a: BTreeMap<u32, f64> = [(0, 0.5), (1, 0.5)].into();
        let b: BTreeMap<u32, f64> = [(1, 0.5), (2, 0.5)].into();
        assert!((total_variation(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a), 0.0);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, &[i, 3])).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
    }
}
