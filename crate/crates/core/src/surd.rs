//! Exact signs of numbers of the form `u + v·√d`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// The value `u + v·√radicand`, with `radicand >= 0`.
///
/// When the radicand is a perfect square (in particular for even field
/// exponents, where `√q` is an integer) the value is rational and callers
/// may fold it into `u`; the sign routine is correct either way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdValue {
    pub u: BigInt,
    pub v: BigInt,
    pub radicand: u64,
}

impl SurdValue {
    pub fn new(u: BigInt, v: BigInt, radicand: u64) -> Self {
        SurdValue { u, v, radicand }
    }

    pub fn integer(u: BigInt) -> Self {
        SurdValue {
            u,
            v: BigInt::zero(),
            radicand: 0,
        }
    }

    /// Sign relative to zero, decided by comparing `u²` with `v²·d`.
    pub fn sign(&self) -> Ordering {
        let su = self.u.sign_cmp();
        let sv = if self.radicand == 0 {
            Ordering::Equal
        } else {
            self.v.sign_cmp()
        };
        match (su, sv) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (a, b) if a == b => a,
            (su, _) => {
                let u2 = &self.u * &self.u;
                let v2d = &self.v * &self.v * BigInt::from(self.radicand);
                // |u| vs |v|√d decides, and u carries the sign of the larger side
                match u2.cmp(&v2d) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => su,
                    Ordering::Less => su.reverse(),
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(u: i64, v: i64, d: u64) -> Ordering {
        SurdValue::new(u.into(), v.into(), d).sign()
    }

    #[test]
    fn simple_signs() {
        assert_eq!(s(0, 0, 5), Ordering::Equal);
        assert_eq!(s(3, -1, 5), Ordering::Greater); // 3 - 2.236
        assert_eq!(s(2, -1, 5), Ordering::Less);
        assert_eq!(s(-3, 1, 9), Ordering::Equal);
        assert_eq!(s(-3, 2, 2), Ordering::Less); // -3 + 2.83
        assert_eq!(s(7, 0, 0), Ordering::Greater);
        assert_eq!(s(0, -4, 3), Ordering::Less);
    }

    // One million random triples against a numeric evaluation, skipping only
    // values too close to zero for f64 to resolve.
    #[test]
    fn random_signs_match_numeric() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut checked = 0u32;
        for _ in 0..1_000_000 {
            let u: i64 = rng.random_range(-1_000_000..=1_000_000);
            let v: i64 = rng.random_range(-1000..=1000);
            let d: u64 = rng.random_range(0..=100_000);
            let exact = s(u, v, d);
            let root = (d as f64).sqrt();
            let x = u as f64 + v as f64 * root;
            let scale = (u.unsigned_abs() as f64).max(v.unsigned_abs() as f64 * root);
            if x.abs() <= 1e-9 * scale.max(1.0) {
                continue;
            }
            let numeric = x.partial_cmp(&0.0).unwrap();
            assert_eq!(exact, numeric, "u={u} v={v} d={d}");
            checked += 1;
        }
        assert!(checked > 990_000);
    }
}
