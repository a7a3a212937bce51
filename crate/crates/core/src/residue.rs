//! Exhaustive counting over `(ℤ/F²ℤ)^g` of the residue classes that carry
//! non-trivial or non-cyclic `S`-parts.
//!
//! `f(1)` and `f'(1)` are affine in the coefficients, so their residues mod
//! `F²` depend only on `a mod F²`. Every count here is an exact scan; scans
//! beyond [`SCAN_CAP`] vectors are refused rather than sampled.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cyclicity::{classify, PrimeSet};
use crate::enumeration::{Enumerator, Mode};
use crate::error::{Error, Result};
use crate::primes::euler_phi;
use crate::sigma::{self, decimal};
use crate::weil::FieldParams;

pub const SCAN_CAP: u128 = 100_000_000;

/// A coefficient vector reduced modulo `F²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ResidueVector {
    m: Vec<u64>,
    modulus: u64,
}

impl ResidueVector {
    pub fn new(m: &[i64], modulus: u64) -> Self {
        ResidueVector {
            m: m.iter().map(|&x| x.rem_euclid(modulus as i64) as u64).collect(),
            modulus,
        }
    }

    pub fn entries(&self) -> &[u64] {
        &self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Affine forms for `f(1)` and `f'(1)` modulo `m`:
/// `value = c0 + Σ coef[k]·a_{k+1}`.
#[derive(Clone, Debug)]
struct AffineForms {
    modulus: u64,
    f_const: u64,
    f_coef: Vec<u64>,
    fp_const: u64,
    fp_coef: Vec<u64>,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl AffineForms {
    fn new(q: u64, g: usize, modulus: u64) -> Self {
        let qm = q % modulus;
        let pow = |e: usize| (0..e).fold(1 % modulus, |acc, _| mulmod(acc, qm, modulus));
        let gm = g as u64 % modulus;
        let mut f_coef = Vec::with_capacity(g);
        let mut fp_coef = Vec::with_capacity(g);
        for k in 1..=g {
            // a_k sits at t^{2g-k}, and for k < g also at t^k with weight q^{g-k}
            let lead = (2 * g - k) as u64 % modulus;
            if k < g {
                let w = pow(g - k);
                f_coef.push((1 + w) % modulus);
                fp_coef.push((lead + mulmod(k as u64 % modulus, w, modulus)) % modulus);
            } else {
                f_coef.push(1 % modulus);
                fp_coef.push(gm);
            }
        }
        AffineForms {
            modulus,
            f_const: (1 + pow(g)) % modulus,
            f_coef,
            fp_const: (2 * g as u64) % modulus,
            fp_coef,
        }
    }

    fn eval(&self, m: &[u64]) -> (u64, u64) {
        let md = self.modulus;
        let mut f = self.f_const;
        let mut fp = self.fp_const;
        for ((&x, &cf), &cp) in m.iter().zip(&self.f_coef).zip(&self.fp_coef) {
            f = (f + mulmod(cf, x, md)) % md;
            fp = (fp + mulmod(cp, x, md)) % md;
        }
        (f, fp)
    }
}

pub fn f_one_mod(q: u64, m: &ResidueVector) -> u64 {
    AffineForms::new(q, m.m.len(), m.modulus).eval(&m.m).0
}

pub fn f_prime_one_mod(q: u64, m: &ResidueVector) -> u64 {
    AffineForms::new(q, m.m.len(), m.modulus).eval(&m.m).1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct ScanCounts {
    nontrivial: u64,
    noncyclic: u64,
}

fn check_scan(modulus: u64, g: usize) -> Result<()> {
    if g == 0 || g > crate::enumeration::MAX_DIMENSION {
        return Err(Error::UnsupportedDimension(g));
    }
    let size = (modulus as u128).checked_pow(g as u32).unwrap_or(u128::MAX);
    if size > SCAN_CAP {
        return Err(Error::CapExceeded {
            what: "residue scan",
            size,
            cap: SCAN_CAP,
        });
    }
    Ok(())
}

/// Scans all of `(ℤ/Mℤ)^g` with `M = ∏ℓ²`, partitioned by the first
/// coordinate.
fn scan(q: u64, g: usize, ells: &[u64]) -> Result<ScanCounts> {
    let modulus: u64 = ells.iter().map(|l| l * l).product();
    check_scan(modulus, g)?;
    let forms = AffineForms::new(q, g, modulus);
    let sq: Vec<u64> = ells.iter().map(|l| l * l).collect();
    let classify = |f: u64, fp: u64| -> (bool, bool) {
        let nontrivial = ells.iter().any(|&l| f % l == 0);
        let noncyclic = ells
            .iter()
            .zip(&sq)
            .any(|(&l, &l2)| f % l2 == 0 && fp % l == 0);
        (nontrivial, noncyclic)
    };
    let counts = (0..modulus)
        .into_par_iter()
        .map(|first| {
            let mut acc = ScanCounts::default();
            let mut m = vec![0u64; g];
            m[0] = first;
            loop {
                let (f, fp) = forms.eval(&m);
                let (a, b) = classify(f, fp);
                acc.nontrivial += u64::from(a);
                acc.noncyclic += u64::from(b);
                // odometer over coordinates 1..g
                let mut i = g;
                loop {
                    i -= 1;
                    if i == 0 {
                        return acc;
                    }
                    m[i] += 1;
                    if m[i] < modulus {
                        break;
                    }
                    m[i] = 0;
                }
            }
        })
        .reduce(ScanCounts::default, |x, y| ScanCounts {
            nontrivial: x.nontrivial + y.nontrivial,
            noncyclic: x.noncyclic + y.noncyclic,
        });
    Ok(counts)
}

fn nonempty(set: &PrimeSet) -> Result<()> {
    if set.is_empty() {
        Err(Error::EmptyPrimeSet)
    } else {
        Ok(())
    }
}

/// Number of `m ∈ (ℤ/F²ℤ)^g` with `f_{q,m}(1)` not invertible mod `F²`.
pub fn count_nontrivial_residues(q: u64, g: usize, set: &PrimeSet) -> Result<u64> {
    nonempty(set)?;
    Ok(scan(q, g, set.primes())?.nontrivial)
}

/// Number of `m` with `ℓ² | f(1)` and `ℓ | f'(1)` for some `ℓ ∈ S`.
pub fn count_noncyclic_residues(q: u64, g: usize, set: &PrimeSet) -> Result<u64> {
    nonempty(set)?;
    Ok(scan(q, g, set.primes())?.noncyclic)
}

/// Measured size of the local non-cyclic solution set in `(ℤ/ℓ²ℤ)^g`.
pub fn local_solution_count(q: u64, g: usize, ell: u64) -> Result<u64> {
    Ok(scan(q, g, &[ell])?.noncyclic)
}

/// Closed form for the local count: `ℓ^{2g-2}` when `ℓ | q - 1`, and
/// `ℓ^{2g-3}` when `ℓ ∤ q(q - 1)`. `None` for `g < 2` and for `ℓ | q`,
/// which are measured only.
pub fn local_solution_formula(q: u64, g: usize, ell: u64) -> Option<u64> {
    if g < 2 || q % ell == 0 {
        return None;
    }
    let e = if (q - 1) % ell == 0 { 2 * g - 2 } else { 2 * g - 3 };
    Some(ell.pow(e as u32))
}

/// `F^{2g-2}(F² - φ(F²))`, equal to `F^{2g}(1 - σ₁(S))`.
pub fn nontrivial_formula(g: usize, set: &PrimeSet) -> BigUint {
    let f = set.product();
    let f2 = &f * &f;
    let phi = set
        .primes()
        .iter()
        .map(|&l| BigUint::from(euler_phi((l * l) as u128)))
        .product::<BigUint>();
    f.pow(2 * g as u32 - 2) * (f2 - phi)
}

/// `(F^{2g}(1-σ₃), F^{2g}(1-σ₂))`.
pub fn noncyclic_bounds(g: usize, set: &PrimeSet) -> (BigRational, BigRational) {
    let f2g = BigRational::from_integer(set.product().pow(2 * g as u32).into());
    let one = BigRational::one();
    (
        &f2g * (&one - sigma::sigma(set, 3)),
        &f2g * (&one - sigma::sigma(set, 2)),
    )
}

pub fn within_noncyclic_bounds(g: usize, set: &PrimeSet, n: u64) -> bool {
    let (lo, hi) = noncyclic_bounds(g, set);
    let n = BigRational::from_integer(n.into());
    lo <= n && n <= hi
}

/// Global counts rebuilt from per-prime scans through
/// `(ℤ/F²ℤ)^g ≅ ∏ (ℤ/ℓ²ℤ)^g`: a vector is trivial (resp. cyclic) for `S`
/// iff each component is trivial (resp. cyclic) for its prime.
pub fn crt_reassembly(q: u64, g: usize, set: &PrimeSet) -> Result<(u64, u64)> {
    nonempty(set)?;
    let mut all = 1u64;
    let mut trivial = 1u64;
    let mut cyclic = 1u64;
    for &l in set.primes() {
        let local = scan(q, g, &[l])?;
        let size = (l * l).pow(g as u32);
        all *= size;
        trivial *= size - local.nontrivial;
        cyclic *= size - local.noncyclic;
    }
    Ok((all - trivial, all - cyclic))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCount {
    pub ell: u64,
    pub nontrivial: u64,
    pub noncyclic: u64,
    pub noncyclic_formula: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueCensus {
    pub q: u64,
    pub g: usize,
    pub set: PrimeSet,
    pub n_nontrivial_residues: u64,
    pub n_noncyclic_residues: u64,
    pub locals: Vec<LocalCount>,
    pub nontrivial_formula: BigUint,
    pub noncyclic_lower: BigRational,
    pub noncyclic_upper: BigRational,
}

pub fn residue_census(q: u64, g: usize, set: &PrimeSet) -> Result<ResidueCensus> {
    nonempty(set)?;
    FieldParams::new(q)?;
    let global = scan(q, g, set.primes())?;
    let locals = set
        .primes()
        .iter()
        .map(|&l| {
            let c = scan(q, g, &[l])?;
            Ok(LocalCount {
                ell: l,
                nontrivial: c.nontrivial,
                noncyclic: c.noncyclic,
                noncyclic_formula: local_solution_formula(q, g, l),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = noncyclic_bounds(g, set);
    Ok(ResidueCensus {
        q,
        g,
        set: set.clone(),
        n_nontrivial_residues: global.nontrivial,
        n_noncyclic_residues: global.noncyclic,
        locals,
        nontrivial_formula: nontrivial_formula(g, set),
        noncyclic_lower: lo,
        noncyclic_upper: hi,
    })
}

impl ResidueCensus {
    pub fn noncyclic_within_bounds(&self) -> bool {
        within_noncyclic_bounds(self.g, &self.set, self.n_noncyclic_residues)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q.to_string(),
            "g": self.g.to_string(),
            "S": self.set.primes().iter().map(u64::to_string).collect::<Vec<_>>(),
            "n_nontrivial_residues": self.n_nontrivial_residues.to_string(),
            "nontrivial_formula": self.nontrivial_formula.to_string(),
            "n_noncyclic_residues": self.n_noncyclic_residues.to_string(),
            "noncyclic_lower": self.noncyclic_lower.to_string(),
            "noncyclic_upper": self.noncyclic_upper.to_string(),
            "noncyclic_within_bounds": self.noncyclic_within_bounds(),
            "locals": self.locals.iter().map(|l| json!({
                "ell": l.ell.to_string(),
                "nontrivial": l.nontrivial.to_string(),
                "noncyclic": l.noncyclic.to_string(),
                "noncyclic_formula": l.noncyclic_formula.map(|x| x.to_string()),
            })).collect::<Vec<_>>(),
        })
    }

    /// Comparison table: one row per quantity, measured vs formula vs bounds.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,measured,formula,lower,upper\n");
        out.push_str(&format!(
            "nontrivial,{},{},,\n",
            self.n_nontrivial_residues, self.nontrivial_formula
        ));
        out.push_str(&format!(
            "noncyclic,{},,{},{}\n",
            self.n_noncyclic_residues,
            decimal(&self.noncyclic_lower, 6),
            decimal(&self.noncyclic_upper, 6)
        ));
        for l in &self.locals {
            out.push_str(&format!(
                "local_noncyclic_{},{},{},,\n",
                l.ell,
                l.noncyclic,
                l.noncyclic_formula.map(|x| x.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}

/// Direct counts next to their reassembly from per-residue class counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionCheck {
    pub direct_nontrivial: u64,
    pub reassembled_nontrivial: u64,
    pub direct_noncyclic: u64,
    pub reassembled_noncyclic: u64,
}

impl PartitionCheck {
    pub fn holds(&self) -> bool {
        self.direct_nontrivial == self.reassembled_nontrivial
            && self.direct_noncyclic == self.reassembled_noncyclic
    }
}

/// Buckets the enumerated classes by `a mod F²`, then sums the bucket sizes
/// over the residues that are non-trivial (resp. non-cyclic).
pub fn partition_checksum(q: u64, g: usize, set: &PrimeSet, mode: Mode) -> Result<PartitionCheck> {
    nonempty(set)?;
    let modulus = set
        .product_u64()
        .and_then(|f| f.checked_mul(f))
        .ok_or_else(|| Error::OutOfRange("F² does not fit in 64 bits".into()))?;
    check_scan(modulus, g)?;
    let buckets = (modulus as usize).pow(g as u32);
    let e = Enumerator::new(q, g, mode)?;
    let hist = e.fold_parallel(
        || vec![0u64; buckets],
        |h, a, _| {
            let idx = a.iter().fold(0usize, |acc, &x| {
                acc * modulus as usize + x.rem_euclid(modulus as i64) as usize
            });
            h[idx] += 1;
        },
        |mut x, y| {
            for (u, v) in x.iter_mut().zip(y) {
                *u += v;
            }
            x
        },
    );
    let forms = AffineForms::new(q, g, modulus);
    let mut nontrivial = 0u64;
    let mut noncyclic = 0u64;
    let mut m = vec![0u64; g];
    for (idx, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mut rest = idx;
        for slot in m.iter_mut().rev() {
            *slot = (rest % modulus as usize) as u64;
            rest /= modulus as usize;
        }
        let (f, fp) = forms.eval(&m);
        if set.primes().iter().any(|&l| f % l == 0) {
            nontrivial += count;
        }
        if set.primes().iter().any(|&l| f % (l * l) == 0 && fp % l == 0) {
            noncyclic += count;
        }
    }
    let direct = classify(q, g, set, mode)?;
    Ok(PartitionCheck {
        direct_nontrivial: direct.n_nontrivial,
        reassembled_nontrivial: nontrivial,
        direct_noncyclic: direct.n_noncyclic,
        reassembled_noncyclic: noncyclic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::values_at_one;

    fn set(p: &[u64]) -> PrimeSet {
        PrimeSet::new(p.to_vec()).unwrap()
    }

    #[test]
    fn f_one_mod_examples() {
        assert_eq!(f_one_mod(5, &ResidueVector::new(&[1], 4)), 3);
        assert_eq!(f_one_mod(5, &ResidueVector::new(&[2], 4)), 0);
        assert_eq!(f_one_mod(5, &ResidueVector::new(&[6], 4)), 0);
    }

    #[test]
    fn affine_forms_match_exact_values() {
        for q in [2u64, 5, 9, 13] {
            for g in 1..=3usize {
                for modulus in [4u64, 9, 36, 225] {
                    for seed in 0..20i64 {
                        let a: Vec<i64> = (0..g as i64).map(|k| (seed * 7 + k * 13) % 41 - 20).collect();
                        let (f1, fp1) = values_at_one(q, &a).unwrap();
                        let rv = ResidueVector::new(&a, modulus);
                        assert_eq!(f_one_mod(q, &rv) as i128, f1.rem_euclid(modulus as i128));
                        assert_eq!(f_prime_one_mod(q, &rv) as i128, fp1.rem_euclid(modulus as i128));
                    }
                }
            }
        }
    }

    #[test]
    fn nontrivial_examples() {
        assert_eq!(count_nontrivial_residues(5, 1, &set(&[2])).unwrap(), 2);
        assert_eq!(count_nontrivial_residues(7, 1, &set(&[2, 3])).unwrap(), 24);
        assert_eq!(count_nontrivial_residues(5, 2, &set(&[3])).unwrap(), 27);
        assert_eq!(nontrivial_formula(1, &set(&[2, 3])), BigUint::from(24u32));
    }

    #[test]
    fn local_examples() {
        assert_eq!(local_solution_count(5, 2, 3).unwrap(), 3);
        assert_eq!(local_solution_count(7, 2, 3).unwrap(), 9);
        assert_eq!(local_solution_count(7, 3, 5).unwrap(), 125);
        assert_eq!(local_solution_count(5, 2, 2).unwrap(), 4);
        assert_eq!(local_solution_count(4, 2, 3).unwrap(), 9);
        assert_eq!(local_solution_formula(7, 3, 5), Some(125));
        assert_eq!(local_solution_formula(5, 2, 5), None);
        assert_eq!(local_solution_formula(5, 1, 2), None);
    }

    #[test]
    fn combined_noncyclic_within_bounds() {
        let c = residue_census(5, 2, &set(&[2, 3])).unwrap();
        assert!(c.noncyclic_within_bounds());
        let (nt, nc) = crt_reassembly(5, 2, &set(&[2, 3])).unwrap();
        assert_eq!((nt, nc), (c.n_nontrivial_residues, c.n_noncyclic_residues));
    }

    #[test]
    fn scan_cap_and_errors() {
        assert!(count_noncyclic_residues(5, 3, &set(&[2, 3, 5])).unwrap_err().is_cap());
        assert!(count_nontrivial_residues(5, 4, &set(&[2])).is_err());
        assert!(matches!(
            count_nontrivial_residues(5, 2, &set(&[])),
            Err(Error::EmptyPrimeSet)
        ));
    }

    #[test]
    fn partition_identity_small() {
        for (q, g) in [(5u64, 1usize), (7, 2), (9, 2), (4, 2)] {
            for s in [set(&[2]), set(&[3]), set(&[2, 3])] {
                let c = partition_checksum(q, g, &s, Mode::OrdinaryOnly).unwrap();
                assert!(c.holds(), "q={q} g={g} S={s}: {c:?}");
            }
        }
    }
}
