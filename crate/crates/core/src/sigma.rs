//! Euler products `σᵢ(S) = ∏_{ℓ∈S} (1 - ℓ^{-i})` and the cyclic-fraction
//! bounds built from them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cyclicity::PrimeSet;
use crate::error::{Error, Result};
use crate::primes;

/// Lower and upper bound on the asymptotic fraction of `S`-cyclic classes
/// among those with non-trivial `S`-part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundPair {
    pub lower: BigRational,
    pub upper: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaValues {
    pub sigma1: BigRational,
    pub sigma2: BigRational,
    pub sigma3: BigRational,
}

fn factor(ell: u64, i: u32) -> BigRational {
    let d = BigInt::from(ell).pow(i);
    BigRational::new(&d - BigInt::one(), d)
}

pub fn sigma(set: &PrimeSet, i: u32) -> BigRational {
    set.primes()
        .iter()
        .fold(BigRational::one(), |acc, &l| acc * factor(l, i))
}

pub fn sigma_values(set: &PrimeSet) -> SigmaValues {
    SigmaValues {
        sigma1: sigma(set, 1),
        sigma2: sigma(set, 2),
        sigma3: sigma(set, 3),
    }
}

fn bounds_from(s1: &BigRational, s2: &BigRational, s3: &BigRational) -> BoundPair {
    let one = BigRational::one();
    let denom = &one - s1;
    BoundPair {
        lower: &one - (&one - s2) / &denom,
        upper: &one - (&one - s3) / &denom,
    }
}

pub fn theorem_bounds(set: &PrimeSet) -> Result<BoundPair> {
    if set.is_empty() {
        return Err(Error::EmptyPrimeSet);
    }
    let v = sigma_values(set);
    Ok(bounds_from(&v.sigma1, &v.sigma2, &v.sigma3))
}

/// Limit of the cyclic fraction for `S = {ℓ}` along `q` in a fixed class
/// mod `ℓ`: `(ℓ-1)/ℓ` when `ℓ | q - 1`, else `(ℓ²-1)/ℓ²`.
pub fn single_prime_limit(ell: u64, q: u64) -> BigRational {
    let l = BigInt::from(ell);
    if (q - 1) % ell == 0 {
        BigRational::new(&l - 1, l)
    } else {
        let l2 = &l * &l;
        BigRational::new(&l2 - 1, l2)
    }
}

/// `S(N) = {ℓ prime : ℓ ≤ N}`.
pub fn prime_set_up_to(n: u64) -> Result<PrimeSet> {
    if n < 2 {
        return Err(Error::EmptyPrimeSet);
    }
    PrimeSet::new(primes::primes_up_to(n))
}

/// Partial Euler product for `1/ζ(i)` with a certified enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaEstimate {
    pub i: u32,
    pub prime_bound: u64,
    /// `∏_{p ≤ bound} (1 - p^{-i})`.
    pub partial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ZetaEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }
}

/// `1/ζ(i)` lies in `[P·(1 - B^{1-i}/(i-1)), P]` where `P` is the partial
/// product over primes `≤ B`: the missing factors are below one and their
/// product is at least `1 - Σ_{n>B} n^{-i}`. Both ends are widened by the
/// accumulated floating-point rounding.
pub fn zeta_reciprocal(i: u32, prime_bound: u64) -> Result<ZetaEstimate> {
    if i < 2 {
        return Err(Error::OutOfRange(
            "1/ζ(1) is zero: the Euler product diverges".into(),
        ));
    }
    if prime_bound < 2 {
        return Err(Error::OutOfRange("prime bound must be at least 2".into()));
    }
    let ps = primes::primes_up_to(prime_bound);
    let partial: f64 = ps
        .iter()
        .map(|&p| 1.0 - (p as f64).powi(-(i as i32)))
        .product();
    let rounding = 4.0 * (ps.len() as f64 + 1.0) * f64::EPSILON;
    let tail = (prime_bound as f64).powi(1 - i as i32) / (i as f64 - 1.0);
    Ok(ZetaEstimate {
        i,
        prime_bound,
        partial,
        lower: partial * (1.0 - tail).max(0.0) * (1.0 - rounding),
        upper: partial * (1.0 + rounding),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizationRow {
    pub n: u64,
    pub lower: BigRational,
    pub upper: BigRational,
}

/// Bounds for `S(N)` at every prime `N ≤ n_max`.
pub fn bound_stabilization_table(n_max: u64) -> Result<Vec<StabilizationRow>> {
    if n_max < 2 {
        return Err(Error::EmptyPrimeSet);
    }
    let mut s1 = BigRational::one();
    let mut s2 = BigRational::one();
    let mut s3 = BigRational::one();
    let mut rows = Vec::new();
    for n in primes::primes_up_to(n_max) {
        s1 *= factor(n, 1);
        s2 *= factor(n, 2);
        s3 *= factor(n, 3);
        let b = bounds_from(&s1, &s2, &s3);
        rows.push(StabilizationRow {
            n,
            lower: b.lower,
            upper: b.upper,
        });
    }
    Ok(rows)
}

/// CSV `N,lower,upper` with 6-decimal rendering.
pub fn stabilization_csv(rows: &[StabilizationRow]) -> String {
    let mut out = String::from("N,lower,upper\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.n,
            decimal(&r.lower, 6),
            decimal(&r.upper, 6)
        ));
    }
    out
}

/// Rounds half away from zero to `places` decimals.
pub fn decimal(x: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10).pow(places as u32);
    let neg = x.is_negative();
    let num: BigInt = x.numer().abs() * &scale * 2 + x.denom();
    let rounded = num.div_floor(&(x.denom() * 2));
    let digits = rounded.to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    let sign = if neg && !rounded.is_zero() { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn set(p: &[u64]) -> PrimeSet {
        PrimeSet::new(p.to_vec()).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&set(&[2]), 1), r(1, 2));
        assert_eq!(sigma(&set(&[2]), 2), r(3, 4));
        assert_eq!(sigma(&set(&[2]), 3), r(7, 8));
        assert_eq!(sigma(&set(&[2, 3]), 1), r(1, 3));
    }

    #[test]
    fn bounds_examples() {
        let b = theorem_bounds(&set(&[2])).unwrap();
        assert_eq!((b.lower, b.upper), (r(1, 2), r(3, 4)));
        for l in [3u64, 5, 7, 101] {
            let b = theorem_bounds(&set(&[l])).unwrap();
            let l = l as i64;
            assert_eq!(b.lower, r(l - 1, l));
            assert_eq!(b.upper, r(l * l - 1, l * l));
        }
        assert!(matches!(
            theorem_bounds(&set(&[])),
            Err(Error::EmptyPrimeSet)
        ));
    }

    #[test]
    fn single_limits() {
        assert_eq!(single_prime_limit(2, 101), r(1, 2));
        assert_eq!(single_prime_limit(3, 7), r(2, 3));
        assert_eq!(single_prime_limit(3, 5), r(8, 9));
    }

    #[test]
    fn sigma_ordering() {
        for n in [2u64, 3, 10, 100] {
            let v = sigma_values(&prime_set_up_to(n).unwrap());
            assert!(BigRational::zero() < v.sigma1);
            assert!(v.sigma1 < v.sigma2 && v.sigma2 < v.sigma3);
            assert!(v.sigma3 < BigRational::one());
        }
        let e = sigma_values(&set(&[]));
        assert!(e.sigma1 == e.sigma2 && e.sigma2 == e.sigma3);
    }

    #[test]
    fn prime_sets() {
        assert_eq!(prime_set_up_to(2).unwrap().primes(), &[2]);
        assert_eq!(prime_set_up_to(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(prime_set_up_to(557).unwrap().len(), 102);
        assert!(prime_set_up_to(1).is_err());
    }

    #[test]
    fn zeta_examples() {
        assert!(zeta_reciprocal(1, 100).is_err());
        let z = zeta_reciprocal(2, 2).unwrap();
        assert_eq!(z.partial, 0.75);
        assert!(z.lower < z.upper);
        assert!(z.contains(6.0 / std::f64::consts::PI.powi(2)));
    }

    #[test]
    fn table_rows() {
        let rows = bound_stabilization_table(3).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].lower.clone(), rows[0].upper.clone()), (r(1, 2), r(3, 4)));
        // S = {2,3}: σ₁ = 1/3, σ₂ = 2/3, σ₃ = 91/108
        assert_eq!(rows[1].lower, r(1, 2));
        assert_eq!(rows[1].upper, BigRational::one() - (BigRational::one() - r(91, 108)) / r(2, 3));
        let csv = stabilization_csv(&rows);
        assert!(csv.starts_with("N,lower,upper\n2,0.500000,0.750000\n3,0.500000,"));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&r(1, 2), 6), "0.500000");
        assert_eq!(decimal(&r(2, 3), 4), "0.6667");
        assert_eq!(decimal(&r(-1, 3), 2), "-0.33");
        assert_eq!(decimal(&r(7, 1), 0), "7");
        assert_eq!(decimal(&r(-1, 1000), 2), "0.00");
    }
}
