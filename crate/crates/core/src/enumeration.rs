//! Enumeration of isogeny-class candidates for a given `(q, g)`.
//!
//! Ordinary classes correspond exactly to coefficient vectors with `p ∤ a_g`
//! whose polynomial is a Weil polynomial. Non-ordinary classes are only known
//! to lie among the vectors with `s | a_g`; those are emitted on request and
//! flagged `candidate_only`.
//!
//! For a fixed prefix `(a₁, …, a_{g-1})` the admissible values of `a_g` form
//! an interval: `a_g` only moves the constant term of the real counterpart
//! `P`, and the constants for which `P` keeps all roots real inside
//! `[-2√q, 2√q]` are cut out by one inequality per critical point and
//! endpoint. The enumerator computes that interval per prefix (in closed form
//! for `g ≤ 2`, float-guided with exact boundary checks for `g = 3`) instead
//! of testing every box point.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weil::{values_at_one, FieldParams, WeilCoefficients};

/// Upper limit on the coefficient-box volume an enumeration will accept.
pub const ENUMERATION_CAP: u128 = 10_000_000_000;

pub const MAX_DIMENSION: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OrdinaryOnly,
    WithNonordinaryCandidates,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::OrdinaryOnly => "ordinary",
            Mode::WithNonordinaryCandidates => "with-candidates",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinary" | "ordinary-only" => Ok(Mode::OrdinaryOnly),
            "with-candidates" | "with-nonordinary-candidates" => {
                Ok(Mode::WithNonordinaryCandidates)
            }
            other => Err(Error::OutOfRange(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsogenyClassRecord {
    pub coeffs: WeilCoefficients,
    pub f1: i128,
    pub fp1: i128,
    pub ordinary: bool,
    pub candidate_only: bool,
}

/// Per-index ranges `|a_i| ≤ ⌊C(2g, i)·q^{i/2}⌋` containing every Weil vector.
pub fn coefficient_box(q: u64, g: usize) -> Result<Vec<RangeInclusive<i64>>> {
    if g == 0 {
        return Err(Error::UnsupportedDimension(g));
    }
    (1..=g)
        .map(|i| {
            let c = binomial(2 * g as u64, i as u64);
            let sq = BigUint::from(c) * BigUint::from(c) * BigUint::from(q).pow(i as u32);
            let bound = sq.sqrt().to_i64().ok_or_else(|| {
                Error::OutOfRange(format!("coefficient box overflows at q={q}, g={g}"))
            })?;
            Ok(-bound..=bound)
        })
        .collect()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn isqrt_ceil(n: u128) -> u128 {
    let r = num_integer::Roots::sqrt(&n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Enumerates the candidates of one `(q, g, mode)` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Enumerator {
    field: FieldParams,
    g: usize,
    mode: Mode,
    bounds: Vec<RangeInclusive<i64>>,
}

impl Enumerator {
    pub fn new(q: u64, g: usize, mode: Mode) -> Result<Self> {
        Self::with_cap(q, g, mode, ENUMERATION_CAP)
    }

    pub fn with_cap(q: u64, g: usize, mode: Mode, cap: u128) -> Result<Self> {
        if g == 0 || g > MAX_DIMENSION {
            return Err(Error::UnsupportedDimension(g));
        }
        let field = FieldParams::new(q)?;
        let bounds = coefficient_box(q, g)?;
        let size = bounds
            .iter()
            .map(|r| (r.end() - r.start() + 1) as u128)
            .try_fold(1u128, |acc, w| acc.checked_mul(w))
            .unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::CapExceeded {
                what: "coefficient box",
                size,
                cap,
            });
        }
        Ok(Enumerator {
            field,
            g,
            mode,
            bounds,
        })
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bounds(&self) -> &[RangeInclusive<i64>] {
        &self.bounds
    }

    /// The outer partition coordinate. For `g = 1` this is the only
    /// coordinate and each partition holds at most one vector.
    pub fn a1_range(&self) -> RangeInclusive<i64> {
        self.bounds[0].clone()
    }

    fn weil_with(&self, prefix: &[i64], last: i64) -> bool {
        let mut a = prefix.to_vec();
        a.push(last);
        WeilCoefficients {
            field: self.field,
            a,
        }
        .is_weil()
    }

    /// Exact set of `a_g` (an interval) completing `prefix` to a Weil
    /// polynomial; `None` when empty.
    pub fn last_interval(&self, prefix: &[i64]) -> Option<(i64, i64)> {
        debug_assert_eq!(prefix.len() + 1, self.g);
        let q = self.field.q as i128;
        match self.g {
            1 => {
                let b = *self.bounds[0].end();
                Some((-b, b))
            }
            2 => {
                let a1 = prefix[0] as i128;
                if a1 * a1 > 16 * q {
                    return None;
                }
                let hi = (a1 * a1).div_euclid(4) + 2 * q;
                let lo = isqrt_ceil((4 * a1 * a1 * q) as u128) as i128 - 2 * q;
                (lo <= hi).then_some((lo as i64, hi as i64))
            }
            3 => self.cubic_interval(prefix[0], prefix[1]),
            _ => unreachable!("dimension checked at construction"),
        }
    }

    fn cubic_interval(&self, a1: i64, a2: i64) -> Option<(i64, i64)> {
        let (x_lo, x_hi) = self.cubic_fiber_float(a1, a2);
        let box_g = &self.bounds[2];
        let tol = 2.0 + 1e-9 * x_lo.abs().max(x_hi.abs());
        if x_hi - x_lo < -tol {
            return None;
        }
        let test = |x: i64| box_g.contains(&x) && self.weil_with(&[a1, a2], x);
        if x_hi - x_lo > 2.0 * tol + 4.0 {
            let mut lo = x_lo.ceil() as i64;
            let mut hi = x_hi.floor() as i64;
            while lo <= hi && !test(lo) {
                lo += 1;
            }
            while test(lo - 1) {
                lo -= 1;
            }
            while hi >= lo && !test(hi) {
                hi -= 1;
            }
            while test(hi + 1) {
                hi += 1;
            }
            (lo <= hi).then_some((lo, hi))
        } else {
            let from = (x_lo - tol).floor() as i64;
            let to = (x_hi + tol).ceil() as i64;
            let hits: Vec<i64> = (from..=to).filter(|&x| test(x)).collect();
            debug_assert!(hits.windows(2).all(|w| w[1] == w[0] + 1));
            Some((*hits.first()?, *hits.last()?))
        }
    }

    /// Real interval of `a₃` for `g = 3` in floating point. Critical points
    /// are clamped into `[-2√q, 2√q]` so infeasible prefixes come out as an
    /// empty or near-degenerate interval rather than garbage.
    fn cubic_fiber_float(&self, a1: i64, a2: i64) -> (f64, f64) {
        let q = self.field.q as f64;
        let b = 2.0 * q.sqrt();
        // P(s) = s³ + c₁s² + c₂s + c₃ with c₁ = a₁, c₂ = a₂ - 3q, c₃ = a₃ - 2q·a₁
        let c1 = a1 as f64;
        let c2 = a2 as f64 - 3.0 * q;
        let shift = 2.0 * q * a1 as f64;
        let q0 = |s: f64| ((s + c1) * s + c2) * s;
        let disc = 4.0 * c1 * c1 - 12.0 * c2;
        let (s_max, s_min) = if disc >= 0.0 {
            let r = disc.sqrt();
            ((-2.0 * c1 - r) / 6.0, (-2.0 * c1 + r) / 6.0)
        } else {
            (-c1 / 3.0, -c1 / 3.0)
        };
        let s_max = s_max.clamp(-b, b);
        let s_min = s_min.clamp(-b, b);
        let y_lo = q0(s_min).max(q0(-b));
        let y_hi = q0(s_max).min(q0(b));
        // roots of P are where Q₀(s) = -c₃ = y, and a₃ = shift - y
        (shift - y_hi, shift - y_lo)
    }

    fn prefixes(&self, a1: i64) -> Vec<Vec<i64>> {
        match self.g {
            1 => vec![vec![]],
            2 => vec![vec![a1]],
            _ => self.bounds[1].clone().map(|a2| vec![a1, a2]).collect(),
        }
    }

    fn keep(&self, last: i64) -> Option<bool> {
        let p = self.field.p as i64;
        if last.rem_euclid(p) != 0 {
            Some(true)
        } else if self.mode == Mode::WithNonordinaryCandidates
            && last.rem_euclid(self.field.s as i64) == 0
        {
            Some(false)
        } else {
            None
        }
    }

    /// Calls `f(a, ordinary)` for every emitted vector whose first
    /// coefficient lies in `a1s`, in lexicographic order.
    pub fn visit<F: FnMut(&[i64], bool)>(&self, a1s: RangeInclusive<i64>, mut f: F) {
        let outer = self.a1_range();
        let a1s = (*a1s.start()).max(*outer.start())..=(*a1s.end()).min(*outer.end());
        let mut a = vec![0i64; self.g];
        if self.g == 1 {
            for a1 in a1s {
                a[0] = a1;
                if let Some(ord) = self.keep(a1) {
                    f(&a, ord);
                }
            }
            return;
        }
        for a1 in a1s {
            for prefix in self.prefixes(a1) {
                let Some((lo, hi)) = self.last_interval(&prefix) else {
                    continue;
                };
                a[..self.g - 1].copy_from_slice(&prefix);
                for last in lo..=hi {
                    if let Some(ord) = self.keep(last) {
                        a[self.g - 1] = last;
                        f(&a, ord);
                    }
                }
            }
        }
    }

    pub fn record(&self, a: &[i64], ordinary: bool) -> IsogenyClassRecord {
        let (f1, fp1) = values_at_one(self.field.q, a).expect("values fit in i128 under the cap");
        IsogenyClassRecord {
            coeffs: WeilCoefficients {
                field: self.field,
                a: a.to_vec(),
            },
            f1,
            fp1,
            ordinary,
            candidate_only: !ordinary,
        }
    }

    fn partition(&self, a1: i64) -> Vec<IsogenyClassRecord> {
        let mut out = Vec::new();
        self.visit(a1..=a1, |a, ord| out.push(self.record(a, ord)));
        out
    }

    /// Serial record stream in lexicographic order.
    pub fn records(&self) -> impl Iterator<Item = IsogenyClassRecord> + '_ {
        self.a1_range().flat_map(move |a1| self.partition(a1))
    }

    /// Partitioned parallel enumeration, merged in partition order.
    pub fn collect_parallel(&self) -> Vec<IsogenyClassRecord> {
        let parts: Vec<Vec<IsogenyClassRecord>> = self
            .a1_range()
            .into_par_iter()
            .map(|a1| self.partition(a1))
            .collect();
        parts.concat()
    }

    /// Parallel fold over `(a, ordinary)` with an associative, commutative
    /// merge.
    pub fn fold_parallel<A, I, F, M>(&self, init: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[i64], bool) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        self.a1_range()
            .into_par_iter()
            .map(|a1| {
                let mut acc = init();
                self.visit(a1..=a1, |a, ord| fold(&mut acc, a, ord));
                acc
            })
            .reduce(&init, &merge)
    }

    pub fn count(&self) -> u64 {
        self.fold_parallel(|| 0u64, |n, _, _| *n += 1, |x, y| x + y)
    }
}

pub fn enumerate_ordinary(q: u64, g: usize) -> Result<Vec<IsogenyClassRecord>> {
    Ok(Enumerator::new(q, g, Mode::OrdinaryOnly)?.records().collect())
}

pub fn enumerate_with_nonordinary(q: u64, g: usize) -> Result<Vec<IsogenyClassRecord>> {
    Ok(Enumerator::new(q, g, Mode::WithNonordinaryCandidates)?
        .records()
        .collect())
}

/// Summary of one persisted or freshly enumerated record stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationManifest {
    pub q: u64,
    pub g: usize,
    pub mode: Mode,
    pub total: u64,
    /// `(a₁, count)` for every non-empty `a₁` partition, ascending.
    pub partitions: Vec<(i64, u64)>,
    pub checksum: u32,
}

impl EnumerationManifest {
    pub fn from_records(q: u64, g: usize, mode: Mode, records: &[IsogenyClassRecord]) -> Self {
        let mut partitions: Vec<(i64, u64)> = Vec::new();
        let mut hasher = crc32fast::Hasher::new();
        for r in records {
            hasher.update(crate::census_file::row(r).as_bytes());
            let a1 = r.coeffs.a[0];
            match partitions.last_mut() {
                Some((k, n)) if *k == a1 => *n += 1,
                _ => partitions.push((a1, 1)),
            }
        }
        EnumerationManifest {
            q,
            g,
            mode,
            total: records.len() as u64,
            partitions,
            checksum: hasher.finalize(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1s(records: &[IsogenyClassRecord]) -> Vec<i64> {
        records.iter().map(|r| r.coeffs.a[0]).collect()
    }

    #[test]
    fn box_examples() {
        assert_eq!(coefficient_box(25, 1).unwrap(), vec![-10..=10]);
        assert_eq!(coefficient_box(4, 2).unwrap(), vec![-8..=8, -24..=24]);
        assert_eq!(coefficient_box(5, 1).unwrap(), vec![-4..=4]);
        assert!(coefficient_box(5, 0).is_err());
    }

    #[test]
    fn ordinary_examples() {
        let r = enumerate_ordinary(5, 1).unwrap();
        assert_eq!(a1s(&r), vec![-4, -3, -2, -1, 1, 2, 3, 4]);
        assert!(r.iter().all(|x| x.ordinary && !x.candidate_only));
        assert_eq!(a1s(&enumerate_ordinary(2, 1).unwrap()), vec![-1, 1]);
        assert_eq!(a1s(&enumerate_ordinary(3, 1).unwrap()), vec![-2, -1, 1, 2]);
    }

    #[test]
    fn nonordinary_examples() {
        let r = enumerate_with_nonordinary(5, 1).unwrap();
        assert_eq!(r.len(), 9);
        let extra: Vec<i64> = r.iter().filter(|x| x.candidate_only).map(|x| x.coeffs.a[0]).collect();
        assert_eq!(extra, vec![0]);

        let r = enumerate_with_nonordinary(4, 1).unwrap();
        let (cand, ord): (Vec<_>, Vec<_>) = r.iter().partition(|x| x.candidate_only);
        assert_eq!(a1s(&ord.into_iter().cloned().collect::<Vec<_>>()), vec![-3, -1, 1, 3]);
        assert_eq!(
            a1s(&cand.into_iter().cloned().collect::<Vec<_>>()),
            vec![-4, -2, 0, 2, 4]
        );

        let r = enumerate_with_nonordinary(2, 1).unwrap();
        let extra: Vec<i64> = r.iter().filter(|x| x.candidate_only).map(|x| x.coeffs.a[0]).collect();
        assert_eq!(extra, vec![-2, 0, 2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Enumerator::new(5, 4, Mode::OrdinaryOnly),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(matches!(
            Enumerator::new(6, 1, Mode::OrdinaryOnly),
            Err(Error::NotPrimePower(6))
        ));
        assert!(Enumerator::new(100_003, 3, Mode::OrdinaryOnly)
            .unwrap_err()
            .is_cap());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("ordinary".parse::<Mode>().unwrap(), Mode::OrdinaryOnly);
        assert_eq!(
            "with-candidates".parse::<Mode>().unwrap(),
            Mode::WithNonordinaryCandidates
        );
        assert!("all".parse::<Mode>().is_err());
    }

    #[test]
    fn manifest_partitions_sum() {
        let e = Enumerator::new(7, 2, Mode::OrdinaryOnly).unwrap();
        let recs: Vec<_> = e.records().collect();
        let m = EnumerationManifest::from_records(7, 2, Mode::OrdinaryOnly, &recs);
        assert_eq!(m.total, m.partitions.iter().map(|(_, n)| n).sum::<u64>());
    }
}
