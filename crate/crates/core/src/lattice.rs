//! Lattice points of the shifted rectilinear lattices `Λ_m`, `Λ′_m`, `Λ″_m`
//! inside the region `V_g`, the volume of `V_g`, and the counting envelope
//! for ordinary classes in a residue class.
//!
//! Coordinates are `b_i = a_i q^{-i/2}`, so the lattice generated by the
//! vectors `q^{-i/2} e_i` is the image of `ℤ^g`. Shifting by `m` and scaling
//! by `F²` selects `a ≡ m (mod F²)`; `Λ′` and `Λ″` further require `p | a_g`
//! and `s | a_g`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::{coefficient_box, Enumerator, Mode, MAX_DIMENSION};
use crate::error::{Error, Result};
use crate::poly::{self, QuadPoint};
use crate::residue::ResidueVector;
use crate::weil::FieldParams;

pub const POINT_CAP: u128 = 100_000_000;
pub const DEFAULT_SAMPLES_G2: u64 = 1_000_000;
pub const DEFAULT_SAMPLES_G3: u64 = 100_000;
/// Sample points are `n / 2^20` for integer `n`.
pub const SAMPLE_DENOMINATOR_BITS: u32 = 20;
const BLOCK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LatticeKind {
    Lambda,
    LambdaPrime,
    LambdaDoublePrime,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 3] = [
        LatticeKind::Lambda,
        LatticeKind::LambdaPrime,
        LatticeKind::LambdaDoublePrime,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LatticeKind::Lambda => "Lambda",
            LatticeKind::LambdaPrime => "LambdaPrime",
            LatticeKind::LambdaDoublePrime => "LambdaDoublePrime",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Lambda" | "lambda" => Ok(LatticeKind::Lambda),
            "LambdaPrime" | "lambda-prime" => Ok(LatticeKind::LambdaPrime),
            "LambdaDoublePrime" | "lambda-double-prime" => Ok(LatticeKind::LambdaDoublePrime),
            other => Err(Error::OutOfRange(format!("unknown lattice kind {other:?}"))),
        }
    }
}

/// `coeff · q^{quarter/4}` for a fixed `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPow {
    pub coeff: BigRational,
    pub quarter: i64,
}

impl QPow {
    pub fn new(coeff: impl Into<BigInt>, quarter: i64) -> Self {
        QPow {
            coeff: BigRational::from_integer(coeff.into()),
            quarter,
        }
    }

    pub fn mul(&self, other: &QPow) -> QPow {
        QPow {
            coeff: &self.coeff * &other.coeff,
            quarter: self.quarter + other.quarter,
        }
    }

    pub fn to_f64(&self, q: u64) -> f64 {
        self.coeff.to_f64().unwrap_or(f64::NAN) * (q as f64).powf(self.quarter as f64 / 4.0)
    }

    /// Exact comparison of two positive values, via fourth powers.
    pub fn cmp_at(&self, other: &QPow, q: u64) -> Ordering {
        debug_assert!(self.coeff.is_positive() && other.coeff.is_positive());
        let lo = self.quarter.min(other.quarter);
        let qb = BigRational::from_integer(BigInt::from(q));
        let lhs = self.coeff.pow(4) * qb.pow((self.quarter - lo) as i32);
        let rhs = other.coeff.pow(4) * qb.pow((other.quarter - lo) as i32);
        lhs.cmp(&rhs)
    }

    pub fn render(&self) -> String {
        if self.quarter == 0 {
            return self.coeff.to_string();
        }
        let e = BigRational::new(self.quarter.into(), 4.into());
        format!("{}*q^({})", self.coeff, e)
    }
}

/// Mesh as printed in the reference table: exact, or only bounded above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableMesh {
    Exact(QPow),
    AtMost(QPow),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub field: FieldParams,
    pub g: usize,
    /// `F`, the product of the primes in `S` (1 for the unshifted lattices).
    pub f: u64,
    pub shift: ResidueVector,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, q: u64, g: usize, f: u64, shift: &[i64]) -> Result<Self> {
        if g == 0 || g > MAX_DIMENSION {
            return Err(Error::UnsupportedDimension(g));
        }
        if f == 0 {
            return Err(Error::OutOfRange("F must be positive".into()));
        }
        if shift.len() != g {
            return Err(Error::OutOfRange(format!(
                "shift has {} entries, expected {g}",
                shift.len()
            )));
        }
        let field = FieldParams::new(q)?;
        let f2 = f
            .checked_mul(f)
            .ok_or_else(|| Error::OutOfRange("F² overflows".into()))?;
        Ok(LatticeSpec {
            kind,
            field,
            g,
            f,
            shift: ResidueVector::new(shift, f2),
        })
    }

    pub fn unshifted(kind: LatticeKind, q: u64, g: usize) -> Result<Self> {
        Self::new(kind, q, g, 1, &vec![0; g])
    }

    pub fn q(&self) -> u64 {
        self.field.q
    }

    pub fn f_squared(&self) -> u64 {
        self.f * self.f
    }

    /// `G = g(g+1)/4`.
    pub fn big_g(&self) -> BigRational {
        BigRational::new(((self.g * (self.g + 1)) as i64).into(), 4.into())
    }

    /// Extra divisibility on `a_g`: 1, `p` or `s`.
    pub fn last_divisor(&self) -> u64 {
        match self.kind {
            LatticeKind::Lambda => 1,
            LatticeKind::LambdaPrime => self.field.p,
            LatticeKind::LambdaDoublePrime => self.field.s,
        }
    }

    /// Residue and modulus of the last coordinate, or `None` when the shift
    /// is incompatible with the divisibility condition.
    pub fn last_progression(&self) -> Option<(i64, i64)> {
        let f2 = self.f_squared() as i64;
        let d = self.last_divisor() as i64;
        let m = self.shift.entries()[self.g - 1] as i64;
        let step = f2.lcm(&d);
        (0..step / f2)
            .map(|k| m + k * f2)
            .find(|r| r % d == 0)
            .map(|r| (r, step))
    }

    /// Integer steps of the rectilinear fundamental domain in `a`-space.
    pub fn steps(&self) -> Vec<u64> {
        let f2 = self.f_squared();
        let mut s = vec![f2; self.g];
        s[self.g - 1] = f2.lcm(&self.last_divisor());
        s
    }

    /// Edge lengths in `b`-space: `step_i · q^{-i/2}`.
    pub fn edges(&self) -> Vec<QPow> {
        self.steps()
            .iter()
            .enumerate()
            .map(|(i, &st)| QPow::new(st, -2 * (i as i64 + 1)))
            .collect()
    }

    pub fn covolume(&self) -> QPow {
        self.edges()
            .iter()
            .fold(QPow::new(1, 0), |acc, e| acc.mul(e))
    }

    /// Longest edge of the fundamental domain.
    pub fn mesh(&self) -> QPow {
        let q = self.q();
        self.edges()
            .into_iter()
            .reduce(|a, b| if b.cmp_at(&a, q) == Ordering::Greater { b } else { a })
            .expect("g ≥ 1")
    }

    /// Covolume as listed in the reference table, `F^{2g}·{1, p, s}·q^{-G}`.
    pub fn table_covolume(&self) -> QPow {
        let f2g = BigInt::from(self.f).pow(2 * self.g as u32);
        QPow::new(
            f2g * BigInt::from(self.last_divisor()),
            -((self.g * (self.g + 1)) as i64),
        )
    }

    /// Mesh as listed in the reference table.
    pub fn table_mesh(&self) -> TableMesh {
        let f2 = self.f_squared();
        match self.kind {
            LatticeKind::Lambda => TableMesh::Exact(QPow::new(f2, -2)),
            LatticeKind::LambdaPrime if self.g == 2 && self.field.r == 1 => {
                TableMesh::Exact(QPow::new(f2, 0))
            }
            LatticeKind::LambdaPrime => TableMesh::Exact(QPow::new(f2, -2)),
            LatticeKind::LambdaDoublePrime => TableMesh::AtMost(QPow::new(f2, 0)),
        }
    }

    pub fn covolume_matches_table(&self) -> bool {
        self.covolume().cmp_at(&self.table_covolume(), self.q()) == Ordering::Equal
    }

    pub fn mesh_matches_table(&self) -> bool {
        let mesh = self.mesh();
        match self.table_mesh() {
            TableMesh::Exact(t) => mesh.cmp_at(&t, self.q()) == Ordering::Equal,
            TableMesh::AtMost(t) => mesh.cmp_at(&t, self.q()) != Ordering::Greater,
        }
    }

    /// Number of lattice vectors in the coefficient box.
    pub fn box_candidates(&self) -> Result<u128> {
        let bounds = coefficient_box(self.q(), self.g)?;
        Ok(bounds
            .iter()
            .zip(self.steps())
            .map(|(r, st)| ((r.end() - r.start()) as u128) / st as u128 + 1)
            .fold(1u128, |acc, w| acc.saturating_mul(w)))
    }
}

/// `#{x ∈ [lo, hi] : x ≡ r (mod m)}`.
fn count_progression(lo: i64, hi: i64, r: i64, m: i64) -> u64 {
    if lo > hi {
        return 0;
    }
    ((hi - r).div_euclid(m) - (lo - 1 - r).div_euclid(m)) as u64
}

/// Exact number of points of the lattice inside `V_g`.
pub fn count_points(spec: &LatticeSpec) -> Result<u64> {
    let size = spec.box_candidates()?;
    if size > POINT_CAP {
        return Err(Error::CapExceeded {
            what: "lattice box",
            size,
            cap: POINT_CAP,
        });
    }
    let Some((r_last, m_last)) = spec.last_progression() else {
        return Ok(0);
    };
    let q = spec.q();
    let g = spec.g;
    let f2 = spec.f_squared() as i64;
    let e = Enumerator::with_cap(q, g, Mode::OrdinaryOnly, u128::MAX)?;
    let shift: Vec<i64> = spec.shift.entries().iter().map(|&x| x as i64).collect();
    let in_class = |range: &std::ops::RangeInclusive<i64>, r: i64| {
        let start = *range.start() + (r - *range.start()).rem_euclid(f2);
        (start..=*range.end()).step_by(f2 as usize)
    };
    let bounds = e.bounds().to_vec();
    if g == 1 {
        return Ok(count_progression(*bounds[0].start(), *bounds[0].end(), r_last, m_last));
    }
    let a1s: Vec<i64> = in_class(&bounds[0], shift[0]).collect();
    let total = a1s
        .into_par_iter()
        .map(|a1| {
            let mut n = 0u64;
            let mut tally = |prefix: &[i64]| {
                if let Some((lo, hi)) = e.last_interval(prefix) {
                    n += count_progression(lo, hi, r_last, m_last);
                }
            };
            if g == 2 {
                tally(&[a1]);
            } else {
                for a2 in in_class(&bounds[1], shift[1]) {
                    tally(&[a1, a2]);
                }
            }
            n
        })
        .sum();
    Ok(total)
}

/// Ordinary classes with `a ≡ m (mod F²)`: `Λ_m` minus `Λ′_m`.
pub fn ordinary_in_class(q: u64, g: usize, f: u64, shift: &[i64]) -> Result<u64> {
    let all = count_points(&LatticeSpec::new(LatticeKind::Lambda, q, g, f, shift)?)?;
    let non = count_points(&LatticeSpec::new(LatticeKind::LambdaPrime, q, g, f, shift)?)?;
    Ok(all - non)
}

fn binomial(n: u64, k: u64) -> i64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub g: usize,
    pub value: f64,
    pub std_error: f64,
    /// Zero for the exact value at `g = 1`.
    pub samples: u64,
    pub seed: u64,
}

/// `D·P(s)` for `b = n / D`, where `P` is the real counterpart of `h_b`
/// (all roots on the unit circle iff all roots of `P` lie in `[-2, 2]`;
/// endpoint roots of `P` give double roots `±1` of `h_b`).
fn scaled_real_counterpart(n: &[i64], denom: i64) -> Vec<BigInt> {
    let g = n.len();
    let mut c: Vec<i128> = Vec::with_capacity(g + 1);
    c.push(denom as i128);
    for k in 1..=g {
        let mut ck = n[k - 1] as i128;
        let mut j = k % 2;
        while j < k {
            ck -= c[j] * binomial((g - j) as u64, ((k - j) / 2) as u64) as i128;
            j += 2;
        }
        c.push(ck);
    }
    c.reverse();
    c.into_iter().map(BigInt::from).collect()
}

/// Exact membership of `b = n / D` in `V_g`.
pub fn in_region(n: &[i64], denom: i64) -> bool {
    poly::all_roots_real_within(&scaled_real_counterpart(n, denom), &QuadPoint::integer(2))
}

/// `vol(V_g)`: exactly 4 for `g = 1`, Monte Carlo over the box
/// `∏ [-C(2g,i), C(2g,i)]` otherwise.
pub fn volume_vg(g: usize, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if g == 0 || g > MAX_DIMENSION {
        return Err(Error::UnsupportedDimension(g));
    }
    if g == 1 {
        return Ok(VolumeEstimate {
            g,
            value: 4.0,
            std_error: 0.0,
            samples: 0,
            seed,
        });
    }
    if samples == 0 {
        return Err(Error::OutOfRange("at least one sample is needed".into()));
    }
    let denom = 1i64 << SAMPLE_DENOMINATOR_BITS;
    let half: Vec<i64> = (1..=g as u64).map(|i| binomial(2 * g as u64, i)).collect();
    let box_volume: f64 = half.iter().map(|&c| 2.0 * c as f64).product();
    let blocks = samples.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n_here = BLOCK.min(samples - b * BLOCK);
            let mut n = vec![0i64; g];
            let mut hit = 0u64;
            for _ in 0..n_here {
                for (x, &c) in n.iter_mut().zip(&half) {
                    *x = rng.random_range(-c * denom..=c * denom);
                }
                hit += u64::from(in_region(&n, denom));
            }
            hit
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        g,
        value: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        seed,
    })
}

pub fn default_samples(g: usize) -> u64 {
    if g <= 2 {
        DEFAULT_SAMPLES_G2
    } else {
        DEFAULT_SAMPLES_G3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeCountReport {
    pub q: u64,
    pub kind: LatticeKind,
    pub count: u64,
    /// `v_g / covolume`.
    pub prediction: f64,
    pub residual: f64,
    /// `residual · covolume / mesh` at this `q`.
    pub ratio: f64,
    /// The stored empirical `c` the bound uses.
    pub c_empirical: f64,
    pub pass: bool,
}

impl LatticeCountReport {
    pub fn csv_header() -> &'static str {
        "q,kind,count,prediction,residual,c_empirical,pass\n"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{}\n",
            self.q, self.kind, self.count, self.prediction, self.residual, self.c_empirical, self.pass
        )
    }
}

/// Count, prediction and normalised residual for one lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeMeasurement {
    pub q: u64,
    pub kind: LatticeKind,
    pub count: u64,
    pub prediction: f64,
    pub residual: f64,
    pub ratio: f64,
}

pub fn measure(spec: &LatticeSpec, v: f64) -> Result<LatticeMeasurement> {
    let q = spec.q();
    let count = count_points(spec)?;
    let covol = spec.covolume().to_f64(q);
    let mesh = spec.mesh().to_f64(q);
    let prediction = v / covol;
    let residual = (count as f64 - prediction).abs();
    Ok(LatticeMeasurement {
        q,
        kind: spec.kind,
        count,
        prediction,
        residual,
        ratio: residual * covol / mesh,
    })
}

/// Empirical `c(g, F²)` together with the range it was taken over.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalConstant {
    pub g: usize,
    pub f: u64,
    pub kind: LatticeKind,
    pub q_min: u64,
    pub q_max: u64,
    pub shifts: usize,
    pub c: f64,
}

/// Maximum of `residual · covolume / mesh` over every `q` and shift given.
pub fn calibrate(
    kind: LatticeKind,
    qs: &[u64],
    g: usize,
    f: u64,
    shifts: &[Vec<i64>],
    v: f64,
) -> Result<EmpiricalConstant> {
    if qs.is_empty() || shifts.is_empty() {
        return Err(Error::OutOfRange("calibration needs q values and shifts".into()));
    }
    let mut c: f64 = 0.0;
    for &q in qs {
        for m in shifts {
            c = c.max(measure(&LatticeSpec::new(kind, q, g, f, m)?, v)?.ratio);
        }
    }
    Ok(EmpiricalConstant {
        g,
        f,
        kind,
        q_min: *qs.iter().min().expect("non-empty"),
        q_max: *qs.iter().max().expect("non-empty"),
        shifts: shifts.len(),
        c,
    })
}

/// Reports for each `q` against a stored constant `c`:
/// pass iff `residual ≤ c · mesh / covolume`.
pub fn verify_prop_lattice(
    kind: LatticeKind,
    qs: &[u64],
    g: usize,
    f: u64,
    shift: &[i64],
    v: f64,
    c: f64,
) -> Result<Vec<LatticeCountReport>> {
    qs.iter()
        .map(|&q| {
            let m = measure(&LatticeSpec::new(kind, q, g, f, shift)?, v)?;
            Ok(LatticeCountReport {
                q,
                kind,
                count: m.count,
                prediction: m.prediction,
                residual: m.residual,
                ratio: m.ratio,
                c_empirical: c,
                pass: m.ratio <= c * (1.0 + 1e-12),
            })
        })
        .collect()
}

/// Upper-half maximum of the normalised residual over lower-half maximum;
/// values near or below one mean the constant has settled.
pub fn stabilization_ratio(reports: &[LatticeCountReport]) -> Option<f64> {
    let mut sorted: Vec<&LatticeCountReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.q);
    let mid = sorted.len() / 2;
    if mid == 0 {
        return None;
    }
    let max = |xs: &[&LatticeCountReport]| xs.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let lower = max(&sorted[..mid]);
    let upper = max(&sorted[mid..]);
    (lower > 0.0).then(|| upper / lower)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub q: u64,
    pub g: usize,
    pub f: u64,
    pub lower: f64,
    pub upper: f64,
    /// `lower < 0`: the bound says nothing yet at this `q`.
    pub pre_asymptotic: bool,
}

impl Envelope {
    pub fn contains(&self, count: u64) -> bool {
        self.lower <= count as f64 && count as f64 <= self.upper
    }

    pub fn ratio(&self) -> f64 {
        self.lower / self.upper
    }
}

/// `L = (v r q^G - 2F²c q^{G-1/2}) F^{-2g}`,
/// `R = (v r q^G + (v + 3F²c) q^{G-1/2}) F^{-2g}` with `r = 1 - 1/p`.
pub fn im_envelope(q: u64, g: usize, f: u64, v: f64, c: f64) -> Result<Envelope> {
    let field = FieldParams::new(q)?;
    let qf = q as f64;
    let big_g = (g * (g + 1)) as f64 / 4.0;
    let r = 1.0 - 1.0 / field.p as f64;
    let f2 = (f * f) as f64;
    let scale = f2.powi(-(g as i32));
    let main = v * r * qf.powf(big_g);
    let side = qf.powf(big_g - 0.5);
    let lower = (main - 2.0 * f2 * c * side) * scale;
    let upper = (main + (v + 3.0 * f2 * c) * side) * scale;
    Ok(Envelope {
        q,
        g,
        f,
        lower,
        upper,
        pre_asymptotic: lower < 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub envelope: Envelope,
    pub count: u64,
    pub inside: bool,
}

/// Ordinary counts in the class `m` against the envelope for each `q`.
pub fn envelope_scan(
    qs: &[u64],
    g: usize,
    f: u64,
    shift: &[i64],
    v: f64,
    c: f64,
) -> Result<Vec<EnvelopeRow>> {
    qs.iter()
        .map(|&q| {
            let envelope = im_envelope(q, g, f, v, c)?;
            let count = ordinary_in_class(q, g, f, shift)?;
            Ok(EnvelopeRow {
                envelope,
                count,
                inside: envelope.contains(count),
            })
        })
        .collect()
}

/// Smallest tested `q` from which containment holds for every larger
/// tested `q`; `None` if it fails at the largest.
pub fn recorded_q0(rows: &[EnvelopeRow]) -> Option<u64> {
    let mut sorted: Vec<&EnvelopeRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.envelope.q);
    let mut q0 = None;
    for r in sorted.iter().rev() {
        if !r.inside {
            break;
        }
        q0 = Some(r.envelope.q);
    }
    q0
}
