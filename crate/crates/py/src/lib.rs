//! Python bindings. Exact quantities come back as `int` and
//! `fractions.Fraction`; errors map to `ValueError` except size caps,
//! which raise `pyweil.CapExceeded`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use weil_census::cyclicity::{self, Status};
use weil_census::enumeration::Enumerator;
use weil_census::lattice::{self, LatticeKind, LatticeSpec};
use weil_census::{elliptic, residue, sigma};
use weil_census::{FieldParams, IsogenyClassRecord, Mode, PrimeSet, WeilCoefficients};

create_exception!(pyweil, CapExceeded, PyException);

fn err(e: weil_census::Error) -> PyErr {
    if e.is_cap() {
        CapExceeded::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn prime_set(s: Vec<u64>) -> PyResult<PrimeSet> {
    PrimeSet::new(s).map_err(err)
}

fn mode(m: &str) -> PyResult<Mode> {
    m.parse().map_err(err)
}

/// `t^{2g} + a₁t^{2g−1} + … + q^g` given by q and (a₁, …, a_g).
#[pyclass(name = "WeilPolynomial", module = "pyweil", frozen)]
pub struct PyWeilPolynomial {
    inner: WeilCoefficients,
}

#[pymethods]
impl PyWeilPolynomial {
    #[new]
    fn new(q: u64, a: Vec<i64>) -> PyResult<Self> {
        let field = FieldParams::new(q).map_err(err)?;
        Ok(PyWeilPolynomial {
            inner: WeilCoefficients::new(field, a).map_err(err)?,
        })
    }

    #[getter]
    fn q(&self) -> u64 {
        self.inner.field.q
    }

    #[getter]
    fn g(&self) -> usize {
        self.inner.g()
    }

    #[getter]
    fn a(&self) -> Vec<i64> {
        self.inner.a.clone()
    }

    /// Coefficients from the constant term up.
    fn coefficients(&self) -> Vec<BigInt> {
        self.inner.polynomial()
    }

    /// Coefficients of the real counterpart, constant term first.
    fn real_counterpart(&self) -> Vec<BigInt> {
        self.inner.real_counterpart().coeffs
    }

    fn is_weil(&self) -> bool {
        self.inner.is_weil()
    }

    fn is_ordinary(&self) -> bool {
        self.inner.is_ordinary()
    }

    fn f_at_one(&self) -> BigInt {
        self.inner.f_at_one()
    }

    fn fprime_at_one(&self) -> BigInt {
        self.inner.fprime_at_one()
    }

    fn __repr__(&self) -> String {
        format!("WeilPolynomial(q={}, a={:?})", self.inner.field.q, self.inner.a)
    }
}

#[pyclass(name = "IsogenyClass", module = "pyweil", frozen)]
pub struct PyIsogenyClass {
    inner: IsogenyClassRecord,
}

#[pymethods]
impl PyIsogenyClass {
    #[getter]
    fn q(&self) -> u64 {
        self.inner.coeffs.field.q
    }

    #[getter]
    fn a(&self) -> Vec<i64> {
        self.inner.coeffs.a.clone()
    }

    #[getter]
    fn ordinary(&self) -> bool {
        self.inner.ordinary
    }

    #[getter]
    fn candidate_only(&self) -> bool {
        self.inner.candidate_only
    }

    fn polynomial(&self) -> PyWeilPolynomial {
        PyWeilPolynomial {
            inner: self.inner.coeffs.clone(),
        }
    }

    /// `"trivial"`, `"cyclic"` or `"noncyclic"` for the ℓ-part.
    fn status(&self, ell: u64) -> &'static str {
        match cyclicity::ell_verdict(&self.inner, ell).status {
            Status::TrivialPart => "trivial",
            Status::Cyclic => "cyclic",
            Status::NonCyclic => "noncyclic",
        }
    }

    fn is_s_cyclic(&self, s: Vec<u64>) -> PyResult<bool> {
        Ok(cyclicity::s_cyclic(&self.inner, &prime_set(s)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "IsogenyClass(q={}, a={:?}, ordinary={})",
            self.inner.coeffs.field.q,
            self.inner.coeffs.a,
            if self.inner.ordinary { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "CountSummary", module = "pyweil", frozen)]
pub struct PyCountSummary {
    inner: cyclicity::CountSummary,
}

#[pymethods]
impl PyCountSummary {
    #[getter]
    fn q(&self) -> u64 {
        self.inner.q
    }

    #[getter]
    fn g(&self) -> usize {
        self.inner.g
    }

    #[getter(S)]
    fn s(&self) -> Vec<u64> {
        self.inner.set.primes().to_vec()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    #[getter]
    fn n_total(&self) -> u64 {
        self.inner.n_total
    }

    #[getter]
    fn n_nontrivial(&self) -> u64 {
        self.inner.n_nontrivial
    }

    #[getter]
    fn n_noncyclic(&self) -> u64 {
        self.inner.n_noncyclic
    }

    #[getter]
    fn fraction_cyclic(&self) -> Option<BigRational> {
        self.inner.fraction_cyclic.clone()
    }

    #[getter]
    fn bounds(&self) -> (BigRational, BigRational) {
        (self.inner.bounds.lower.clone(), self.inner.bounds.upper.clone())
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "CountSummary(q={}, g={}, S={}, n_nontrivial={}, n_noncyclic={})",
            self.inner.q, self.inner.g, self.inner.set, self.inner.n_nontrivial, self.inner.n_noncyclic
        )
    }
}

#[pyfunction]
fn is_weil(q: u64, a: Vec<i64>) -> PyResult<bool> {
    Ok(PyWeilPolynomial::new(q, a)?.inner.is_weil())
}

#[pyfunction]
#[pyo3(signature = (q, g, mode = "ordinary"))]
fn enumerate(py: Python<'_>, q: u64, g: usize, mode: &str) -> PyResult<Vec<PyIsogenyClass>> {
    let m = self::mode(mode)?;
    let records = py.detach(|| Enumerator::new(q, g, m).map(|e| e.collect_parallel()));
    Ok(records
        .map_err(err)?
        .into_iter()
        .map(|inner| PyIsogenyClass { inner })
        .collect())
}

#[pyfunction]
#[pyo3(signature = (q, g, s, mode = "ordinary"))]
fn classify(py: Python<'_>, q: u64, g: usize, s: Vec<u64>, mode: &str) -> PyResult<PyCountSummary> {
    let set = prime_set(s)?;
    let m = self::mode(mode)?;
    let inner = py.detach(|| cyclicity::classify(q, g, &set, m)).map_err(err)?;
    Ok(PyCountSummary { inner })
}

#[pyfunction]
fn theorem_bounds(s: Vec<u64>) -> PyResult<(BigRational, BigRational)> {
    let b = sigma::theorem_bounds(&prime_set(s)?).map_err(err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn sigma_value(s: Vec<u64>, i: u32) -> PyResult<BigRational> {
    Ok(sigma::sigma(&prime_set(s)?, i))
}

#[pyfunction]
fn count_nontrivial_residues(py: Python<'_>, q: u64, g: usize, s: Vec<u64>) -> PyResult<u64> {
    let set = prime_set(s)?;
    py.detach(|| residue::count_nontrivial_residues(q, g, &set)).map_err(err)
}

#[pyfunction]
fn count_noncyclic_residues(py: Python<'_>, q: u64, g: usize, s: Vec<u64>) -> PyResult<u64> {
    let set = prime_set(s)?;
    py.detach(|| residue::count_noncyclic_residues(q, g, &set)).map_err(err)
}

#[pyfunction]
fn local_solution_count(py: Python<'_>, q: u64, g: usize, ell: u64) -> PyResult<u64> {
    py.detach(|| residue::local_solution_count(q, g, ell)).map_err(err)
}

/// Points of the lattice `kind` (`"Lambda"`, `"LambdaPrime"`, `"LambdaDoublePrime"`)
/// with modulus F and shift m inside the Weil region.
#[pyfunction]
#[pyo3(signature = (kind, q, g, f = 1, shift = None))]
fn lattice_count(
    py: Python<'_>,
    kind: &str,
    q: u64,
    g: usize,
    f: u64,
    shift: Option<Vec<i64>>,
) -> PyResult<u64> {
    let kind: LatticeKind = kind.parse().map_err(err)?;
    let shift = shift.unwrap_or_else(|| vec![0; g]);
    let spec = LatticeSpec::new(kind, q, g, f, &shift).map_err(err)?;
    py.detach(|| lattice::count_points(&spec)).map_err(err)
}

/// Monte Carlo volume of V_g as `(value, standard_error)`.
#[pyfunction]
#[pyo3(signature = (g, samples, seed = 0))]
fn volume_vg(py: Python<'_>, g: usize, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let v = py.detach(|| lattice::volume_vg(g, samples, seed)).map_err(err)?;
    Ok((v.value, v.std_error))
}

/// Group structures `(n₁, n₂)` of elliptic curves over a prime field,
/// keyed by a₁ = −trace.
#[pyfunction]
fn elliptic_oracle(q: u64) -> PyResult<BTreeMap<i64, Vec<(u64, u64)>>> {
    Ok(elliptic::elliptic_oracle(q)
        .map_err(err)?
        .into_iter()
        .map(|(a1, shapes)| (a1, shapes.into_iter().map(|s| (s.n1, s.n2)).collect()))
        .collect())
}

#[pymodule]
fn pyweil(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CapExceeded", m.py().get_type::<CapExceeded>())?;
    m.add_class::<PyWeilPolynomial>()?;
    m.add_class::<PyIsogenyClass>()?;
    m.add_class::<PyCountSummary>()?;
    m.add_function(wrap_pyfunction!(is_weil, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_value, m)?)?;
    m.add_function(wrap_pyfunction!(count_nontrivial_residues, m)?)?;
    m.add_function(wrap_pyfunction!(count_noncyclic_residues, m)?)?;
    m.add_function(wrap_pyfunction!(local_solution_count, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_count, m)?)?;
    m.add_function(wrap_pyfunction!(volume_vg, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_oracle, m)?)?;
    Ok(())
}
