//! Field selections shared by the acceptance runs.

use weil_census::primes::{is_prime, prime_power};

/// The first `count` odd primes `q ≥ start` with `keep(q)`.
pub fn primes_from(start: u64, count: usize, keep: impl Fn(u64) -> bool) -> Vec<u64> {
    (start.max(3)..)
        .filter(|&q| is_prime(q) && keep(q))
        .take(count)
        .collect()
}

/// For each target `lo·(hi/lo)^{k/n}`, `k = 0..n`, the smallest prime power
/// at or above it; duplicates are skipped so fewer than `n` may come back.
pub fn log_spaced_prime_powers(lo: u64, hi: u64, n: usize) -> Vec<u64> {
    let ratio = (hi as f64 / lo as f64).ln();
    let mut out: Vec<u64> = Vec::new();
    for k in 0..n {
        let target = (lo as f64 * (ratio * k as f64 / n as f64).exp()).ceil() as u64;
        let q = (target..=hi).find(|&x| prime_power(x).is_some());
        if let Some(q) = q {
            if !out.contains(&q) {
                out.push(q);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selections() {
        assert_eq!(primes_from(1, 4, |_| true), vec![3, 5, 7, 11]);
        assert_eq!(primes_from(10, 2, |q| q % 3 == 2), vec![11, 17]);
        let qs = log_spaced_prime_powers(1000, 10_000, 20);
        assert_eq!(qs.len(), 20);
        assert_eq!(qs[0], 1009);
        assert!(qs.windows(2).all(|w| w[0] < w[1]) && *qs.last().unwrap() <= 10_000);
    }
}
