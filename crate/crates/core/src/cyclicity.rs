//! Local cyclicity verdicts and the counts `I_S(q, g)`, `I_S^n(q, g)`.
//!
//! A class is not `ℓ`-cyclic exactly when `ℓ` divides both `f̂(1)` (the
//! group order divided by its radical) and `f'(1)`. Since `ℓ | f̂(1)` iff
//! `ℓ² | f(1)`, no factorisation is needed.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::enumeration::{Enumerator, IsogenyClassRecord, Mode};
use crate::error::{Error, Result};
use crate::primes;
use crate::sigma::{self, BoundPair};
use crate::weil::values_at_one;

/// A finite set of distinct primes, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeSet {
    primes: Vec<u64>,
}

impl PrimeSet {
    pub fn new(mut primes: Vec<u64>) -> Result<Self> {
        primes.sort_unstable();
        primes.dedup();
        if let Some(&bad) = primes.iter().find(|&&p| !primes::is_prime(p)) {
            return Err(Error::NotPrime(bad));
        }
        Ok(PrimeSet { primes })
    }

    pub fn single(ell: u64) -> Result<Self> {
        Self::new(vec![ell])
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    /// `F = ∏ ℓ`.
    pub fn product(&self) -> BigUint {
        self.primes.iter().map(|&p| BigUint::from(p)).product()
    }

    /// `F` as a machine integer, when it fits.
    pub fn product_u64(&self) -> Option<u64> {
        self.product().to_u64()
    }

    pub fn union(&self, other: &PrimeSet) -> PrimeSet {
        let mut v = self.primes.clone();
        v.extend_from_slice(&other.primes);
        v.sort_unstable();
        v.dedup();
        PrimeSet { primes: v }
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.primes.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    TrivialPart,
    Cyclic,
    NonCyclic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicityVerdict {
    pub ell: u64,
    pub status: Status,
}

/// Verdict from the group order and derivative at 1 alone.
pub fn verdict_from_values(f1: i128, fp1: i128, ell: u64) -> CyclicityVerdict {
    let l = ell as i128;
    let status = if f1 % l != 0 {
        Status::TrivialPart
    } else if f1 % (l * l) == 0 && fp1 % l == 0 {
        Status::NonCyclic
    } else {
        Status::Cyclic
    };
    CyclicityVerdict { ell, status }
}

pub fn ell_verdict(rec: &IsogenyClassRecord, ell: u64) -> CyclicityVerdict {
    verdict_from_values(rec.f1, rec.fp1, ell)
}

pub fn s_cyclic(rec: &IsogenyClassRecord, set: &PrimeSet) -> bool {
    set.primes
        .iter()
        .all(|&l| ell_verdict(rec, l).status != Status::NonCyclic)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountSummary {
    pub q: u64,
    pub g: usize,
    pub set: PrimeSet,
    pub mode: Mode,
    pub n_total: u64,
    /// `I_S(q, g)`.
    pub n_nontrivial: u64,
    /// `I_S^n(q, g)`.
    pub n_noncyclic: u64,
    #[serde(skip)]
    pub fraction_cyclic: Option<BigRational>,
    #[serde(skip)]
    pub bounds: BoundPair,
}

impl CountSummary {
    pub fn fraction_f64(&self) -> Option<f64> {
        self.fraction_cyclic.as_ref().map(sigma::to_f64)
    }

    /// JSON object with every numeric field as a decimal string; rationals
    /// are exact `num/den` strings alongside a 6-decimal rendering.
    pub fn to_json(&self) -> Value {
        let frac = self.fraction_cyclic.as_ref();
        json!({
            "q": self.q.to_string(),
            "g": self.g.to_string(),
            "S": self.set.primes().iter().map(u64::to_string).collect::<Vec<_>>(),
            "mode": self.mode.as_str(),
            "n_total": self.n_total.to_string(),
            "n_nontrivial": self.n_nontrivial.to_string(),
            "n_noncyclic": self.n_noncyclic.to_string(),
            "fraction_cyclic": frac.map(ToString::to_string),
            "fraction_cyclic_decimal": frac.map(|f| sigma::decimal(f, 6)),
            "bound_lower": self.bounds.lower.to_string(),
            "bound_upper": self.bounds.upper.to_string(),
            "bound_lower_decimal": sigma::decimal(&self.bounds.lower, 6),
            "bound_upper_decimal": sigma::decimal(&self.bounds.upper, 6),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    nontrivial: u64,
    noncyclic: u64,
}

/// One enumeration pass, tallied for several prime sets at once.
pub fn classify_sets(
    q: u64,
    g: usize,
    sets: &[PrimeSet],
    mode: Mode,
) -> Result<Vec<CountSummary>> {
    let bounds = sets
        .iter()
        .map(sigma::theorem_bounds)
        .collect::<Result<Vec<_>>>()?;
    let e = Enumerator::new(q, g, mode)?;
    let k = sets.len();
    let (total, tallies) = e.fold_parallel(
        || (0u64, vec![Tally::default(); k]),
        |(n, t), a, _| {
            *n += 1;
            let (f1, fp1) = values_at_one(q, a).expect("values fit in i128 under the cap");
            for (set, tally) in sets.iter().zip(t.iter_mut()) {
                let mut nontrivial = false;
                let mut noncyclic = false;
                for &l in set.primes() {
                    match verdict_from_values(f1, fp1, l).status {
                        Status::TrivialPart => {}
                        Status::Cyclic => nontrivial = true,
                        Status::NonCyclic => {
                            nontrivial = true;
                            noncyclic = true;
                        }
                    }
                }
                tally.nontrivial += u64::from(nontrivial);
                tally.noncyclic += u64::from(noncyclic);
            }
        },
        |(n1, mut t1), (n2, t2)| {
            for (x, y) in t1.iter_mut().zip(t2) {
                x.nontrivial += y.nontrivial;
                x.noncyclic += y.noncyclic;
            }
            (n1 + n2, t1)
        },
    );
    Ok(sets
        .iter()
        .zip(tallies)
        .zip(bounds)
        .map(|((set, t), bounds)| CountSummary {
            q,
            g,
            set: set.clone(),
            mode,
            n_total: total,
            n_nontrivial: t.nontrivial,
            n_noncyclic: t.noncyclic,
            fraction_cyclic: (t.nontrivial > 0).then(|| {
                BigRational::new(
                    (t.nontrivial - t.noncyclic).into(),
                    t.nontrivial.into(),
                )
            }),
            bounds,
        })
        .collect())
}

pub fn classify(q: u64, g: usize, set: &PrimeSet, mode: Mode) -> Result<CountSummary> {
    Ok(classify_sets(q, g, std::slice::from_ref(set), mode)?.remove(0))
}
