//! Brute-force group structures of elliptic curves over prime fields.
//!
//! Used as ground truth for the cyclicity criterion in dimension one. Every
//! curve `y² = x³ + a₂x² + a₄x + a₆` with non-zero discriminant is counted
//! point by point; the structure `ℤ/n₁ × ℤ/n₂` (`n₁ | n₂`) comes from the
//! number of points killed by each `d`, which is `gcd(d, n₁)·gcd(d, n₂)`.
//! For `q ≥ 5` the short forms (`a₂ = 0`) already cover every isomorphism
//! class; over `F₃` the `x²` term is needed.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::is_prime;

pub const ORACLE_MAX_Q: u64 = 200;

/// `ℤ/n₁ × ℤ/n₂` with `n₁ | n₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroupShape {
    pub n1: u64,
    pub n2: u64,
}

impl GroupShape {
    pub fn order(&self) -> u64 {
        self.n1 * self.n2
    }

    /// The `ℓ`-part is non-cyclic iff `ℓ | n₁`.
    pub fn ell_cyclic(&self, ell: u64) -> bool {
        self.n1 % ell != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Point {
    Infinity,
    Affine(u64, u64),
}

#[derive(Clone, Copy, Debug)]
struct Curve {
    q: u64,
    a2: u64,
    a4: u64,
    a6: u64,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn inv(x: u64, q: u64) -> u64 {
    pow_mod(x, q - 2, q)
}

impl Curve {
    fn rhs(&self, x: u64) -> u64 {
        let q = self.q;
        ((x * x % q + self.a2 * x % q) % q * x % q + self.a4 * x % q + self.a6) % q
    }

    fn nonsingular(&self) -> bool {
        // discriminant of x³ + a x² + b x + c
        let q = self.q as i128;
        let (a, b, c) = (self.a2 as i128, self.a4 as i128, self.a6 as i128);
        let d = a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c;
        d.rem_euclid(q) != 0
    }

    fn points(&self) -> Vec<Point> {
        let q = self.q;
        let mut roots: Vec<Vec<u64>> = vec![Vec::new(); q as usize];
        for y in 0..q {
            roots[(y * y % q) as usize].push(y);
        }
        let mut pts = vec![Point::Infinity];
        for x in 0..q {
            for &y in &roots[self.rhs(x) as usize] {
                pts.push(Point::Affine(x, y));
            }
        }
        pts
    }

    fn add(&self, p1: Point, p2: Point) -> Point {
        let q = self.q;
        let (x1, y1, x2, y2) = match (p1, p2) {
            (Point::Infinity, p) | (p, Point::Infinity) => return p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % q == 0 {
                return Point::Infinity;
            }
            let num = (3 * x1 % q * x1 % q + 2 * self.a2 % q * x1 % q + self.a4) % q;
            num * inv(2 * y1 % q, q) % q
        } else {
            (y2 + q - y1) % q * inv((x2 + q - x1) % q, q) % q
        };
        let x3 = (lambda * lambda % q + 3 * q - self.a2 - x1 - x2) % q;
        let y3 = (lambda * ((x1 + q - x3) % q) % q + q - y1) % q;
        Point::Affine(x3, y3)
    }

    fn order_of(&self, p: Point) -> u64 {
        let mut acc = p;
        let mut n = 1;
        while acc != Point::Infinity {
            acc = self.add(acc, p);
            n += 1;
        }
        n
    }

    fn shape(&self) -> GroupShape {
        let pts = self.points();
        let n = pts.len() as u64;
        let orders: Vec<u64> = pts.iter().map(|&p| self.order_of(p)).collect();
        // n₁ is the largest d with exactly d² points of order dividing d
        let n1 = (1..=n)
            .filter(|d| n % (d * d) == 0)
            .filter(|&d| orders.iter().filter(|&&o| d % o == 0).count() as u64 == d * d)
            .max()
            .unwrap_or(1);
        GroupShape { n1, n2: n / n1 }
    }
}

/// Shapes of `E(F_q)` for every curve over `F_q`, keyed by `a₁ = -t` where
/// `#E(F_q) = q + 1 - t`.
pub fn elliptic_oracle(q: u64) -> Result<BTreeMap<i64, BTreeSet<GroupShape>>> {
    if q > ORACLE_MAX_Q {
        return Err(Error::OutOfRange(format!(
            "oracle supports primes up to {ORACLE_MAX_Q}, got {q}"
        )));
    }
    if q == 2 || !is_prime(q) {
        return Err(Error::OutOfRange(format!("oracle needs an odd prime, got {q}")));
    }
    let a2s: Vec<u64> = if q == 3 { (0..q).collect() } else { vec![0] };
    let curves: Vec<Curve> = a2s
        .iter()
        .flat_map(|&a2| (0..q).flat_map(move |a4| (0..q).map(move |a6| Curve { q, a2, a4, a6 })))
        .filter(Curve::nonsingular)
        .collect();
    let shapes: Vec<GroupShape> = curves.par_iter().map(Curve::shape).collect();
    let mut out: BTreeMap<i64, BTreeSet<GroupShape>> = BTreeMap::new();
    for s in shapes {
        let t = q as i64 + 1 - s.order() as i64;
        out.entry(-t).or_default().insert(s);
    }
    Ok(out)
}
