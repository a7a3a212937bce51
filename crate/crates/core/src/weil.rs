//! Weil polynomial candidates `t^{2g} + a₁t^{2g-1} + … + a_g t^g + … + a₁q^{g-1}t + q^g`.
//!
//! The membership test for the region of genuine Weil polynomials is exact:
//! the polynomial is reduced to its real counterpart `P` with
//! `f(t) = t^g · P(t + q/t)`, and `f` has every root on `|t| = √q` exactly
//! when every root of `P` is real and lies in `[-2√q, 2√q]`. Real roots of `f`
//! at `±√q` then come in pairs, since `t + q/t ∓ 2√q = (t ∓ √q)²/t`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{self, IntPoly, QuadPoint};
use crate::primes;

/// The base field `F_q` with `q = p^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FieldParams {
    pub p: u64,
    pub r: u32,
    pub q: u64,
    /// Smallest power of `p` whose square is divisible by `q`.
    pub s: u64,
}

impl FieldParams {
    pub fn new(q: u64) -> Result<Self> {
        let (p, r) = primes::prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Ok(Self::from_parts(p, r))
    }

    pub fn from_prime_power(p: u64, r: u32) -> Result<Self> {
        if !primes::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::OutOfRange("field exponent must be positive".into()));
        }
        p.checked_pow(r)
            .ok_or_else(|| Error::OutOfRange(format!("{p}^{r} overflows u64")))?;
        Ok(Self::from_parts(p, r))
    }

    fn from_parts(p: u64, r: u32) -> Self {
        FieldParams {
            p,
            r,
            q: p.pow(r),
            s: p.pow(r.div_ceil(2)),
        }
    }

    /// `2√q` as an exact point `w·√d`.
    pub fn two_sqrt_q(&self) -> QuadPoint {
        if self.r % 2 == 0 {
            QuadPoint::integer(2 * self.p.pow(self.r / 2))
        } else {
            QuadPoint {
                w: BigInt::from(2 * self.p.pow(self.r / 2)),
                d: self.p,
            }
        }
    }

    /// `√q` as an exact point.
    pub fn sqrt_q(&self) -> QuadPoint {
        if self.r % 2 == 0 {
            QuadPoint::integer(self.p.pow(self.r / 2))
        } else {
            QuadPoint {
                w: BigInt::from(self.p.pow(self.r / 2)),
                d: self.p,
            }
        }
    }
}

/// The coefficient vector `(a₁, …, a_g)` of one candidate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WeilCoefficients {
    pub field: FieldParams,
    pub a: Vec<i64>,
}

/// Integer polynomial `P` with `f(t) = t^g · P(t + q/t)`, ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealCounterpart {
    pub coeffs: IntPoly,
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl WeilCoefficients {
    pub fn new(field: FieldParams, a: Vec<i64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        Ok(WeilCoefficients { field, a })
    }

    pub fn g(&self) -> usize {
        self.a.len()
    }

    /// `a_k` with `a₀ = 1`.
    fn a_at(&self, k: usize) -> BigInt {
        if k == 0 {
            BigInt::one()
        } else {
            BigInt::from(self.a[k - 1])
        }
    }

    /// Full coefficient list of `f`, ascending degree, length `2g + 1`.
    pub fn polynomial(&self) -> IntPoly {
        let g = self.g();
        let q = BigInt::from(self.field.q);
        let mut out = vec![BigInt::zero(); 2 * g + 1];
        for k in 0..=g {
            out[2 * g - k] = self.a_at(k);
        }
        let mut qpow = BigInt::one();
        for k in (0..g).rev() {
            qpow *= &q;
            out[k] = self.a_at(k) * &qpow;
        }
        out
    }

    /// Group order `f(1)` of any variety in the class.
    pub fn f_at_one(&self) -> BigInt {
        self.polynomial().iter().sum()
    }

    pub fn fprime_at_one(&self) -> BigInt {
        self.polynomial()
            .iter()
            .enumerate()
            .map(|(k, c)| c * BigInt::from(k))
            .sum()
    }

    /// `(f(1), f'(1))` with checked 128-bit arithmetic; `None` on overflow.
    pub fn values_at_one_i128(&self) -> Option<(i128, i128)> {
        values_at_one(self.field.q, &self.a)
    }

    pub fn real_counterpart(&self) -> RealCounterpart {
        let g = self.g();
        let q = BigInt::from(self.field.q);
        let mut c: Vec<BigInt> = Vec::with_capacity(g + 1);
        c.push(BigInt::one());
        for k in 1..=g {
            // a_k = Σ_{j ≤ k, j ≡ k (2)} c_j · C(g-j, (k-j)/2) · q^{(k-j)/2}
            let mut ck = self.a_at(k);
            let mut j = k % 2;
            while j < k {
                let m = ((k - j) / 2) as u32;
                ck -= &c[j] * binomial((g - j) as u64, m as u64) * q.pow(m);
                j += 2;
            }
            c.push(ck);
        }
        // c_k multiplies s^{g-k}
        c.reverse();
        RealCounterpart { coeffs: c }
    }

    /// Exact membership in the closed region of Weil polynomials.
    pub fn is_weil(&self) -> bool {
        let p = self.real_counterpart().coeffs;
        if !poly::all_roots_real_within(&p, &self.field.two_sqrt_q()) {
            return false;
        }
        let (plus, minus) = self.real_root_multiplicities();
        plus % 2 == 0 && minus % 2 == 0
    }

    /// Multiplicities of `+√q` and `-√q` as roots of `f`.
    pub fn real_root_multiplicities(&self) -> (usize, usize) {
        let f = self.polynomial();
        let root = self.field.sqrt_q();
        if !self.vanishes_at(&f, &root) && !self.vanishes_at(&f, &root.neg()) {
            return (0, 0);
        }
        poly::boundary_multiplicities(&f, &root)
    }

    /// `f(x) = 0` at `x = ±√q`, via the split `f(t) = E(t²) + t·O(t²)`.
    fn vanishes_at(&self, f: &[BigInt], x: &QuadPoint) -> bool {
        poly::eval_at(f, x).is_zero()
    }

    /// Ordinary classes have middle coefficient prime to `p`.
    pub fn is_ordinary(&self) -> bool {
        self.a[self.g() - 1].rem_euclid(self.field.p as i64) != 0
    }
}

impl RealCounterpart {
    /// Expands `t^g · P(t + q/t)` back to the coefficients of `f`.
    pub fn expand(&self, q: u64) -> IntPoly {
        let g = self.coeffs.len() - 1;
        let q = BigInt::from(q);
        let mut out = vec![BigInt::zero(); 2 * g + 1];
        for (deg, c) in self.coeffs.iter().enumerate() {
            // t^g (t + q/t)^deg = Σ_m C(deg, m) q^m t^{g + deg - 2m}
            for m in 0..=deg {
                let e = g + deg - 2 * m;
                out[e] += c * binomial(deg as u64, m as u64) * q.pow(m as u32);
            }
        }
        out
    }
}

/// `(f(1), f'(1))` straight from the coefficient slice, checked.
pub fn values_at_one(q: u64, a: &[i64]) -> Option<(i128, i128)> {
    let g = a.len();
    let q = q as i128;
    let two_g = 2 * g as i128;
    let mut f1: i128 = 0;
    let mut fp1: i128 = 0;
    let mut qpow: i128 = 1;
    for k in (0..=g).rev() {
        let ak: i128 = if k == 0 { 1 } else { a[k - 1] as i128 };
        // t^{2g-k} coefficient a_k
        f1 = f1.checked_add(ak)?;
        fp1 = fp1.checked_add(ak.checked_mul(two_g - k as i128)?)?;
        if k < g {
            // t^k coefficient a_k q^{g-k}
            qpow = qpow.checked_mul(q)?;
            let term = ak.checked_mul(qpow)?;
            f1 = f1.checked_add(term)?;
            fp1 = fp1.checked_add(term.checked_mul(k as i128)?)?;
        }
    }
    Some((f1, fp1))
}

/// Group order of the class; not asserted positive here.
pub fn eval_f_at_one(c: &WeilCoefficients) -> BigInt {
    c.f_at_one()
}

pub fn eval_fprime_at_one(c: &WeilCoefficients) -> BigInt {
    c.fprime_at_one()
}

pub fn radical(n: i128) -> Result<u128> {
    primes::radical(n)
}

pub fn real_counterpart(c: &WeilCoefficients) -> RealCounterpart {
    c.real_counterpart()
}

pub fn is_weil(c: &WeilCoefficients) -> bool {
    c.is_weil()
}

pub fn is_ordinary(c: &WeilCoefficients) -> bool {
    c.is_ordinary()
}
