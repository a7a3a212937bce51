//! Cross-module checks: residue formulas, partition identity, lattice
//! tables and counts, and the Euler-product bounds.

use std::io::Write;

use serde_json::json;
use weil_census::cyclicity::PrimeSet;
use weil_census::enumeration::{Enumerator, Mode};
use weil_census::lattice::{self, LatticeKind, LatticeSpec};
use weil_census::residue;
use weil_census::sigma;

use crate::commands::{fields, output, prime_set};
use crate::{Common, Failure, Format};

/// Names accepted by the hidden `--mutate` flag.
const MUTATIONS: [&str; 3] = ["nontrivial-formula", "local-formula", "partition"];

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub q: Option<u64>,
    pub g: Option<usize>,
    pub set: Option<String>,
    pub passed: bool,
    pub detail: String,
}

fn check(
    name: &'static str,
    q: Option<u64>,
    g: Option<usize>,
    set: Option<&PrimeSet>,
    passed: bool,
    detail: String,
) -> Check {
    Check {
        name,
        q,
        g,
        set: set.map(ToString::to_string),
        passed,
        detail,
    }
}

fn subsets(base: &PrimeSet) -> Vec<PrimeSet> {
    let p = base.primes();
    (1u32..(1 << p.len()))
        .map(|mask| {
            let pick = p
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &l)| l)
                .collect();
            PrimeSet::new(pick).expect("subset of primes")
        })
        .collect()
}

fn residue_checks(
    q: u64,
    g: usize,
    set: &PrimeSet,
    mode: Mode,
    mutate: Option<&str>,
    out: &mut Vec<Check>,
) -> Result<(), Failure> {
    let s = Some(set);
    let measured = residue::count_nontrivial_residues(q, g, set)?;
    let mut formula = residue::nontrivial_formula(g, set);
    if mutate == Some("nontrivial-formula") {
        formula += 1u32;
    }
    out.push(check(
        "residue.nontrivial-formula",
        Some(q),
        Some(g),
        s,
        formula == measured.into(),
        format!("measured {measured}, formula {formula}"),
    ));

    let noncyclic = residue::count_noncyclic_residues(q, g, set)?;
    let crt = residue::crt_reassembly(q, g, set)?;
    out.push(check(
        "residue.crt-reassembly",
        Some(q),
        Some(g),
        s,
        crt == (measured, noncyclic),
        format!("direct ({measured}, {noncyclic}), reassembled {crt:?}"),
    ));

    if g >= 2 {
        let (lo, hi) = residue::noncyclic_bounds(g, set);
        out.push(check(
            "residue.noncyclic-bounds",
            Some(q),
            Some(g),
            s,
            residue::within_noncyclic_bounds(g, set, noncyclic),
            format!("{noncyclic} in [{lo}, {hi}]"),
        ));
    }

    let mut part = residue::partition_checksum(q, g, set, mode)?;
    if mutate == Some("partition") {
        part.reassembled_nontrivial += 1;
    }
    out.push(check(
        "partition.checksum",
        Some(q),
        Some(g),
        s,
        part.holds(),
        format!(
            "direct ({}, {}), reassembled ({}, {})",
            part.direct_nontrivial,
            part.direct_noncyclic,
            part.reassembled_nontrivial,
            part.reassembled_noncyclic
        ),
    ));
    Ok(())
}

fn local_checks(
    q: u64,
    g: usize,
    base: &PrimeSet,
    mutate: Option<&str>,
    out: &mut Vec<Check>,
) -> Result<(), Failure> {
    for &ell in base.primes() {
        let Some(mut formula) = residue::local_solution_formula(q, g, ell) else {
            continue;
        };
        if mutate == Some("local-formula") {
            formula += 1;
        }
        let measured = residue::local_solution_count(q, g, ell)?;
        out.push(check(
            "residue.local-formula",
            Some(q),
            Some(g),
            Some(&PrimeSet::single(ell)?),
            measured == formula,
            format!("measured {measured}, formula {formula}"),
        ));
    }
    Ok(())
}

fn lattice_checks(q: u64, g: usize, base: &PrimeSet, out: &mut Vec<Check>) -> Result<(), Failure> {
    let zero = vec![0; g];
    let count = |kind| -> Result<u64, Failure> {
        Ok(lattice::count_points(&LatticeSpec::new(kind, q, g, 1, &zero)?)?)
    };
    let all = count(LatticeKind::Lambda)?;
    let lp = count(LatticeKind::LambdaPrime)?;
    let lpp = count(LatticeKind::LambdaDoublePrime)?;
    let ord = Enumerator::new(q, g, Mode::OrdinaryOnly)?.count();
    let cand = Enumerator::new(q, g, Mode::WithNonordinaryCandidates)?.count();
    out.push(check(
        "lattice.enumeration-counts",
        Some(q),
        Some(g),
        None,
        all - lp == ord && ord + lpp == cand,
        format!("Λ {all}, Λ′ {lp}, Λ″ {lpp}; ordinary {ord}, with candidates {cand}"),
    ));
    if g >= 2 {
        let p = weil_census::FieldParams::new(q)?.p;
        let mut fs = vec![1u64];
        fs.extend(subsets(base).iter().filter_map(|s| s.product_u64()).filter(|f| f % p != 0));
        let mut bad = Vec::new();
        for &f in &fs {
            for kind in LatticeKind::ALL {
                let spec = LatticeSpec::new(kind, q, g, f, &zero)?;
                if !(spec.covolume_matches_table() && spec.mesh_matches_table()) {
                    bad.push(format!("{kind} F={f}"));
                }
            }
        }
        out.push(check(
            "lattice.table",
            Some(q),
            Some(g),
            None,
            bad.is_empty(),
            if bad.is_empty() {
                format!("{} lattices match", 3 * fs.len())
            } else {
                format!("mismatch: {}", bad.join(", "))
            },
        ));
    }
    Ok(())
}

fn sigma_checks(base: &PrimeSet, out: &mut Vec<Check>) -> Result<(), Failure> {
    let b = sigma::theorem_bounds(&PrimeSet::single(2)?)?;
    out.push(check(
        "sigma.base-bounds",
        None,
        None,
        None,
        b.lower.to_string() == "1/2" && b.upper.to_string() == "3/4",
        format!("S={{2}}: ({}, {})", b.lower, b.upper),
    ));
    for &ell in base.primes() {
        let b = sigma::theorem_bounds(&PrimeSet::single(ell)?)?;
        let lo = sigma::single_prime_limit(ell, ell + 1);
        let hi = sigma::single_prime_limit(ell, ell + 2);
        // the bounds are the two possible single-prime limits
        let ok = b.lower == lo && b.upper == hi;
        out.push(check(
            "sigma.single-prime",
            None,
            None,
            Some(&PrimeSet::single(ell)?),
            ok,
            format!("({}, {})", b.lower, b.upper),
        ));
    }
    for set in subsets(base) {
        let b = sigma::theorem_bounds(&set)?;
        out.push(check(
            "sigma.ordered",
            None,
            None,
            Some(&set),
            b.lower < b.upper,
            format!("({}, {})", sigma::decimal(&b.lower, 6), sigma::decimal(&b.upper, 6)),
        ));
    }
    Ok(())
}

fn volume_check(g: usize, seed: u64, out: &mut Vec<Check>) -> Result<(), Failure> {
    let samples = lattice::default_samples(g);
    let v = lattice::volume_vg(g, samples, seed)?;
    let (passed, detail) = if g == 2 {
        let exact = 32.0 / 3.0;
        (
            (v.value - exact).abs() <= 3.0 * v.std_error,
            format!("{:.4} ± {:.4} vs 32/3", v.value, v.std_error),
        )
    } else {
        let w = lattice::volume_vg(g, samples, seed.wrapping_add(1))?;
        let se = (v.std_error.powi(2) + w.std_error.powi(2)).sqrt();
        (
            v.value > 0.0 && (v.value - w.value).abs() <= 4.0 * se,
            format!("{:.4} ± {:.4} and {:.4} ± {:.4}", v.value, v.std_error, w.value, w.std_error),
        )
    };
    out.push(check("lattice.volume", None, Some(g), None, passed, detail));
    Ok(())
}

pub fn run(c: &Common, mutate: Option<&str>) -> Result<(), Failure> {
    if let Some(m) = mutate {
        if !MUTATIONS.contains(&m) {
            return Err(Failure::Invalid(format!("unknown mutation {m:?}")));
        }
    }
    let qs = if c.q.is_empty() && c.q_range.is_none() {
        vec![5, 7, 11]
    } else {
        fields(c)?
    };
    let gs = if c.g.is_empty() { vec![1, 2] } else { c.g.clone() };
    let base = if c.s.is_none() && c.n.is_none() {
        PrimeSet::new(vec![2, 3, 5])?
    } else {
        prime_set(c)?
    };
    let mode: Mode = c.mode.parse()?;
    let mut checks = Vec::new();
    sigma_checks(&base, &mut checks)?;
    for &g in &gs {
        if g >= 2 {
            eprintln!("g={g}: volume estimate, seed {}", c.seed);
            volume_check(g, c.seed, &mut checks)?;
        }
        for &q in &qs {
            eprintln!("q={q} g={g}: residue, partition and lattice checks");
            for set in subsets(&base) {
                residue_checks(q, g, &set, mode, mutate, &mut checks)?;
            }
            local_checks(q, g, &base, mutate, &mut checks)?;
            lattice_checks(q, g, &base, &mut checks)?;
        }
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    let mut out = output(c)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "# seed={}", c.seed)?;
            writeln!(out, "check,q,g,S,status,detail")?;
            for k in &checks {
                writeln!(
                    out,
                    "{},{},{},{},{},\"{}\"",
                    k.name,
                    opt(k.q.map(|x| x.to_string())),
                    opt(k.g.map(|x| x.to_string())),
                    opt(k.set.clone()).replace(',', ";"),
                    if k.passed { "PASS" } else { "FAIL" },
                    k.detail.replace('"', "'")
                )?;
            }
        }
        Format::Json => {
            let v = json!({
                "seed": c.seed.to_string(),
                "checks": checks.iter().map(|k| json!({
                    "check": k.name,
                    "q": k.q.map(|x| x.to_string()),
                    "g": k.g.map(|x| x.to_string()),
                    "S": k.set,
                    "passed": k.passed,
                    "detail": k.detail,
                })).collect::<Vec<_>>(),
            });
            writeln!(out, "{v}")?;
        }
    }
    out.flush()?;
    eprintln!("{} checks, {} failed", checks.len(), failed.len());
    match failed.first() {
        None => Ok(()),
        Some(k) => Err(Failure::Failed(format!(
            "{} ({} failing checks, first: {} at q={} g={} S={})",
            k.name,
            failed.len(),
            k.detail,
            opt(k.q.map(|x| x.to_string())),
            opt(k.g.map(|x| x.to_string())),
            opt(k.set.clone())
        ))),
    }
}
