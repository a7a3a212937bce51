//! Integer polynomials and Sturm-sequence root location.
//!
//! Polynomials are dense coefficient vectors in ascending degree order.
//! All arithmetic stays in `ℤ[x]`: remainders are pseudo-remainders scaled
//! by a positive factor, so signs (which is all Sturm's theorem needs) are
//! preserved, and every intermediate is reduced to its primitive part.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::surd::SurdValue;

pub type IntPoly = Vec<BigInt>;

pub fn trim(p: &mut IntPoly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub fn degree(p: &[BigInt]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn derivative(p: &[BigInt]) -> IntPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Divides out the (positive) content; leaves the sign of the polynomial.
pub fn primitive(mut p: IntPoly) -> IntPoly {
    trim(&mut p);
    let c = content(&p);
    if !c.is_zero() && !c.is_one() {
        for x in p.iter_mut() {
            *x /= &c;
        }
    }
    p
}

/// Returns `(quotient, remainder)` with `m·a = quotient·b + remainder` for
/// some positive integer `m`.
fn pseudo_divmod(a: &[BigInt], b: &[BigInt]) -> (IntPoly, IntPoly) {
    let db = degree(b).expect("division by zero polynomial");
    let mut r: IntPoly = a.to_vec();
    trim(&mut r);
    let lc = b[db].clone();
    let lc_abs = lc.abs();
    let mut quot: IntPoly = Vec::new();
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let shift = dr - db;
        if quot.len() < shift + 1 {
            quot.resize(shift + 1, BigInt::zero());
        }
        // r <- |lc|·r - sgn(lc)·lead(r)·x^shift·b
        let lead = r[dr].clone();
        for c in r.iter_mut() {
            *c *= &lc_abs;
        }
        for c in quot.iter_mut() {
            *c *= &lc_abs;
        }
        let factor = if lc.is_negative() { -lead } else { lead };
        for (i, bc) in b.iter().enumerate().take(db + 1) {
            r[i + shift] -= &factor * bc;
        }
        quot[shift] += &factor;
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}

/// Exact quotient `a / b` over ℚ, returned as a primitive integer polynomial
/// with positive leading coefficient. Only meaningful when `b | a` in ℚ[x].
pub fn exact_quotient(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let (q, r) = pseudo_divmod(a, b);
    debug_assert!(r.is_empty(), "inexact division");
    let mut q = primitive(q);
    if q.last().is_some_and(Signed::is_negative) {
        for c in q.iter_mut() {
            *c = -c.clone();
        }
    }
    q
}

/// Greatest common divisor in ℚ[x], normalised to a primitive integer
/// polynomial with positive leading coefficient.
pub fn gcd(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let mut x = primitive(a.to_vec());
    let mut y = primitive(b.to_vec());
    while !y.is_empty() {
        let (_, r) = pseudo_divmod(&x, &y);
        x = y;
        y = primitive(r);
    }
    if x.last().is_some_and(Signed::is_negative) {
        for c in x.iter_mut() {
            *c = -c.clone();
        }
    }
    x
}

/// `p / gcd(p, p')`: the same roots, each with multiplicity one.
pub fn squarefree_part(p: &[BigInt]) -> IntPoly {
    let g = gcd(p, &derivative(p));
    if degree(&g).unwrap_or(0) == 0 {
        return primitive(p.to_vec());
    }
    exact_quotient(p, &g)
}

/// Canonical Sturm sequence `p, p', -rem(p, p'), …` with each member scaled
/// by a positive constant.
pub fn sturm_chain(p: &[BigInt]) -> Vec<IntPoly> {
    let mut chain = vec![primitive(p.to_vec())];
    let d = primitive(derivative(p));
    if d.is_empty() {
        return chain;
    }
    chain.push(d);
    loop {
        let n = chain.len();
        let (_, r) = pseudo_divmod(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        let neg: IntPoly = r.into_iter().map(|c| -c).collect();
        chain.push(primitive(neg));
    }
    chain
}

/// A real point `w·√d`; `d = 1` gives the integer `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadPoint {
    pub w: BigInt,
    pub d: u64,
}

impl QuadPoint {
    pub fn integer(w: impl Into<BigInt>) -> Self {
        QuadPoint { w: w.into(), d: 1 }
    }

    pub fn neg(&self) -> Self {
        QuadPoint {
            w: -self.w.clone(),
            d: self.d,
        }
    }

    fn is_rational(&self) -> bool {
        let r = (self.d as f64).sqrt() as u64;
        (r.saturating_sub(1)..=r + 1).any(|x| x * x == self.d)
    }
}

/// Evaluates `p` at `w·√d` exactly.
pub fn eval_at(p: &[BigInt], x: &QuadPoint) -> SurdValue {
    // x^2 = w^2 d is an integer; split into even and odd parts.
    let x2 = &x.w * &x.w * BigInt::from(x.d);
    let mut even = BigInt::zero();
    let mut odd = BigInt::zero();
    let mut pow = BigInt::one();
    for (k, c) in p.iter().enumerate() {
        if k % 2 == 0 {
            even += c * &pow;
        } else {
            odd += c * &pow;
            pow *= &x2;
        }
    }
    SurdValue::new(even, odd * &x.w, x.d)
}

fn sign_changes(chain: &[IntPoly], x: &QuadPoint) -> usize {
    let mut count = 0;
    let mut last = Ordering::Equal;
    for p in chain {
        let s = eval_at(p, x).sign();
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct real roots of the squarefree polynomial `p` in the
/// closed interval `[lo, hi]`.
pub fn count_roots_closed(p: &[BigInt], lo: &QuadPoint, hi: &QuadPoint) -> usize {
    let chain = sturm_chain(p);
    // V(lo) - V(hi) counts (lo, hi] for squarefree p
    let half_open = sign_changes(&chain, lo) - sign_changes(&chain, hi);
    half_open + usize::from(eval_at(p, lo).is_zero())
}

/// True iff every complex root of `p` is real and lies in `[-bound, bound]`.
pub fn all_roots_real_within(p: &[BigInt], bound: &QuadPoint) -> bool {
    let Some(n) = degree(p) else {
        return false;
    };
    if n == 0 {
        return true;
    }
    let sf = squarefree_part(p);
    let d = degree(&sf).unwrap_or(0);
    count_roots_closed(&sf, &bound.neg(), bound) == d
}

/// Multiplicities of `+bound` and `-bound` as roots of `p`, by repeated exact
/// deflation. For an irrational bound the two are conjugate and share the
/// multiplicity of `x² - bound²`.
pub fn boundary_multiplicities(p: &[BigInt], bound: &QuadPoint) -> (usize, usize) {
    let mut work = p.to_vec();
    trim(&mut work);
    if work.is_empty() {
        return (0, 0);
    }
    if bound.is_rational() {
        let root = (bound.d as f64).sqrt().round() as u64;
        let b = &bound.w * BigInt::from(root);
        let plus = deflate_linear(work.clone(), &b);
        let minus = deflate_linear(work, &(-b));
        (plus, minus)
    } else {
        let b2 = &bound.w * &bound.w * BigInt::from(bound.d);
        let quad = vec![-b2, BigInt::zero(), BigInt::one()];
        let mut m = 0;
        loop {
            let (q, r) = pseudo_divmod(&work, &quad);
            if !r.is_empty() || degree(&work).unwrap_or(0) < 2 {
                break;
            }
            work = q;
            m += 1;
        }
        (m, m)
    }
}

fn deflate_linear(mut p: IntPoly, root: &BigInt) -> usize {
    let mut m = 0;
    while degree(&p).unwrap_or(0) >= 1 {
        // synthetic division by (x - root)
        let n = p.len() - 1;
        let mut q = vec![BigInt::zero(); n];
        let mut acc = BigInt::zero();
        for k in (0..=n).rev() {
            acc = &acc * root + &p[k];
            if k > 0 {
                q[k - 1] = acc.clone();
            }
        }
        if !acc.is_zero() {
            break;
        }
        p = q;
        m += 1;
    }
    m
}
