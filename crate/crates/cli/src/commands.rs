use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use weil_census::cyclicity::{classify as classify_one, CountSummary, PrimeSet};
use weil_census::enumeration::{EnumerationManifest, Enumerator, Mode};
use weil_census::lattice::{self, LatticeKind};
use weil_census::primes::{is_prime, prime_powers_in};
use weil_census::residue::residue_census;
use weil_census::sigma::{self, decimal};
use weil_census::{census_file, FieldParams};

use crate::{Common, Failure, Format};

pub fn output(c: &Common) -> Result<Box<dyn Write>, Failure> {
    Ok(match &c.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(io::BufWriter::new(fs::File::create(p)?))
        }
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

/// `--q` values followed by the prime powers in `--q-range`, each checked.
pub fn fields(c: &Common) -> Result<Vec<u64>, Failure> {
    let mut qs = c.q.clone();
    if let Some(r) = &c.q_range {
        let (a, b) = r
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?)))
            .ok_or_else(|| Failure::Invalid(format!("--q-range expects a:b, got {r:?}")))?;
        if a > b {
            return Err(Failure::Invalid(format!("empty range {r}")));
        }
        qs.extend(prime_powers_in(a, b));
    }
    if qs.is_empty() {
        return Err(Failure::Invalid("no field given (--q or --q-range)".into()));
    }
    for &q in &qs {
        FieldParams::new(q)?;
    }
    Ok(qs)
}

pub fn single_g(c: &Common) -> Result<usize, Failure> {
    match c.g.as_slice() {
        [g] => Ok(*g),
        [] => Err(Failure::Invalid("--g is required".into())),
        _ => Err(Failure::Invalid("this command takes a single --g".into())),
    }
}

pub fn prime_set(c: &Common) -> Result<PrimeSet, Failure> {
    let set = match (&c.s, c.n) {
        (Some(_), Some(_)) => return Err(Failure::Invalid("give --S or --N, not both".into())),
        (Some(s), None) => PrimeSet::new(s.clone())?,
        (None, Some(n)) => sigma::prime_set_up_to(n)?,
        (None, None) => return Err(Failure::Invalid("--S or --N is required".into())),
    };
    if set.is_empty() {
        return Err(Failure::Invalid("S is empty".into()));
    }
    Ok(set)
}

pub fn mode(c: &Common) -> Result<Mode, Failure> {
    Ok(c.mode.parse::<Mode>()?)
}

fn format_or(c: &Common, default: Format) -> Format {
    c.format.unwrap_or(default)
}

fn set_field(set: &PrimeSet) -> String {
    set.primes()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn cache_path(dir: &Path, q: u64, g: usize, mode: Mode) -> PathBuf {
    dir.join(format!("weil-census_q{q}_g{g}_{mode}.csv"))
}

fn manifest_for(c: &Common, q: u64, g: usize, mode: Mode) -> Result<EnumerationManifest, Failure> {
    let path = c.cache_dir.as_deref().map(|d| cache_path(d, q, g, mode));
    if let Some(p) = path.as_deref().filter(|p| p.exists()) {
        match census_file::load(p) {
            Ok((m, _)) if m.q == q && m.g == g && m.mode == mode => {
                eprintln!("q={q} g={g}: cache hit {}", p.display());
                return Ok(m);
            }
            Ok(_) => eprintln!("q={q} g={g}: cache header mismatch, re-enumerating"),
            Err(e) => eprintln!("q={q} g={g}: cache rejected ({e}), re-enumerating"),
        }
    }
    eprintln!("q={q} g={g}: enumerating ({mode})");
    let records = Enumerator::new(q, g, mode)?.collect_parallel();
    match path {
        Some(p) => Ok(census_file::persist(&p, q, g, mode, &records)?),
        None => Ok(EnumerationManifest::from_records(q, g, mode, &records)),
    }
}

pub fn enumerate(c: &Common) -> Result<(), Failure> {
    let qs = fields(c)?;
    let g = single_g(c)?;
    let mode = mode(c)?;
    let manifests = qs
        .iter()
        .map(|&q| manifest_for(c, q, g, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = output(c)?;
    match format_or(c, Format::Csv) {
        Format::Csv => {
            writeln!(out, "q,g,mode,total,partitions,crc32")?;
            for m in &manifests {
                writeln!(
                    out,
                    "{},{},{},{},{},{:08x}",
                    m.q,
                    m.g,
                    m.mode,
                    m.total,
                    m.partitions.len(),
                    m.checksum
                )?;
            }
        }
        Format::Json => {
            for m in &manifests {
                let v = json!({
                    "q": m.q.to_string(),
                    "g": m.g.to_string(),
                    "mode": m.mode.as_str(),
                    "total": m.total.to_string(),
                    "partitions": m.partitions.len().to_string(),
                    "crc32": format!("{:08x}", m.checksum),
                });
                writeln!(out, "{v}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn summary_csv_header() -> &'static str {
    "q,g,S,mode,n_total,n_nontrivial,n_noncyclic,fraction_cyclic,fraction_cyclic_decimal,bound_lower,bound_upper"
}

fn summary_csv_row(s: &CountSummary) -> String {
    let frac = s.fraction_cyclic.as_ref();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        s.q,
        s.g,
        set_field(&s.set),
        s.mode,
        s.n_total,
        s.n_nontrivial,
        s.n_noncyclic,
        frac.map(ToString::to_string).unwrap_or_default(),
        frac.map(|f| decimal(f, 6)).unwrap_or_default(),
        decimal(&s.bounds.lower, 6),
        decimal(&s.bounds.upper, 6)
    )
}

pub fn classify(c: &Common) -> Result<(), Failure> {
    let qs = fields(c)?;
    let g = single_g(c)?;
    let set = prime_set(c)?;
    let mode = mode(c)?;
    let mut summaries = Vec::with_capacity(qs.len());
    for &q in &qs {
        eprintln!("q={q} g={g}: classifying for S={set}");
        summaries.push(classify_one(q, g, &set, mode)?);
    }
    let mut out = output(c)?;
    match format_or(c, Format::Json) {
        Format::Json => {
            for s in &summaries {
                writeln!(out, "{}", s.to_json())?;
            }
        }
        Format::Csv => {
            writeln!(out, "{}", summary_csv_header())?;
            for s in &summaries {
                writeln!(out, "{}", summary_csv_row(s))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn limits(c: &Common, class: Option<u64>, primes_only: bool) -> Result<(), Failure> {
    let set = prime_set(c)?;
    let [ell] = set.primes() else {
        return Err(Failure::Invalid("limits takes a single prime in --S".into()));
    };
    let ell = *ell;
    let g = single_g(c)?;
    let mode = mode(c)?;
    let ladder: Vec<u64> = fields(c)?
        .into_iter()
        .filter(|q| class.is_none_or(|r| q % ell == r % ell))
        .filter(|&q| !primes_only || is_prime(q))
        .collect();
    if ladder.is_empty() {
        return Err(Failure::Invalid("no field left after filtering".into()));
    }
    let mut rows = Vec::new();
    for &q in &ladder {
        eprintln!("q={q}: classifying for ℓ={ell}");
        rows.push((classify_one(q, g, &set, mode)?, sigma::single_prime_limit(ell, q)));
    }
    let fractions: Vec<f64> = rows.iter().filter_map(|(s, _)| s.fraction_f64()).collect();
    let mean = (!fractions.is_empty()).then(|| fractions.iter().sum::<f64>() / fractions.len() as f64);
    let mut out = output(c)?;
    match format_or(c, Format::Csv) {
        Format::Csv => {
            writeln!(out, "q,n_total,n_nontrivial,n_noncyclic,fraction,limit")?;
            for (s, lim) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.q,
                    s.n_total,
                    s.n_nontrivial,
                    s.n_noncyclic,
                    s.fraction_cyclic.as_ref().map(|f| decimal(f, 6)).unwrap_or_default(),
                    decimal(lim, 6)
                )?;
            }
            if let Some(m) = mean {
                eprintln!("mean fraction over {} fields: {m:.6}", fractions.len());
            }
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(s, lim)| {
                    json!({
                        "q": s.q.to_string(),
                        "n_total": s.n_total.to_string(),
                        "n_nontrivial": s.n_nontrivial.to_string(),
                        "n_noncyclic": s.n_noncyclic.to_string(),
                        "fraction": s.fraction_cyclic.as_ref().map(ToString::to_string),
                        "limit": lim.to_string(),
                    })
                })
                .collect();
            let v = json!({
                "ell": ell.to_string(),
                "g": g.to_string(),
                "mode": mode.as_str(),
                "rows": rows,
                "mean_fraction": mean.map(|m| format!("{m:.6}")),
            });
            writeln!(out, "{v}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn sigma_table(c: &Common) -> Result<(), Failure> {
    let mut out = output(c)?;
    let fmt = format_or(c, Format::Csv);
    match (c.n, &c.s) {
        (Some(n), None) => {
            let rows = sigma::bound_stabilization_table(n)?;
            match fmt {
                Format::Csv => write!(out, "{}", sigma::stabilization_csv(&rows))?,
                Format::Json => {
                    for r in &rows {
                        let v = json!({
                            "N": r.n.to_string(),
                            "lower": r.lower.to_string(),
                            "upper": r.upper.to_string(),
                            "lower_decimal": decimal(&r.lower, 6),
                            "upper_decimal": decimal(&r.upper, 6),
                        });
                        writeln!(out, "{v}")?;
                    }
                }
            }
        }
        _ => {
            let set = prime_set(c)?;
            let v = sigma::sigma_values(&set);
            let b = sigma::theorem_bounds(&set)?;
            match fmt {
                Format::Csv => {
                    writeln!(out, "S,sigma1,sigma2,sigma3,lower,upper")?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        set_field(&set),
                        decimal(&v.sigma1, 6),
                        decimal(&v.sigma2, 6),
                        decimal(&v.sigma3, 6),
                        decimal(&b.lower, 6),
                        decimal(&b.upper, 6)
                    )?;
                }
                Format::Json => {
                    let v = json!({
                        "S": set.primes().iter().map(u64::to_string).collect::<Vec<_>>(),
                        "sigma1": v.sigma1.to_string(),
                        "sigma2": v.sigma2.to_string(),
                        "sigma3": v.sigma3.to_string(),
                        "lower": b.lower.to_string(),
                        "upper": b.upper.to_string(),
                        "lower_decimal": decimal(&b.lower, 6),
                        "upper_decimal": decimal(&b.upper, 6),
                    });
                    writeln!(out, "{v}")?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn residue_count(c: &Common) -> Result<(), Failure> {
    let qs = fields(c)?;
    let g = single_g(c)?;
    let set = prime_set(c)?;
    let mut censuses = Vec::new();
    for &q in &qs {
        eprintln!("q={q} g={g}: scanning residues mod F² for S={set}");
        censuses.push(residue_census(q, g, &set)?);
    }
    let mut out = output(c)?;
    match format_or(c, Format::Csv) {
        Format::Csv => {
            writeln!(out, "q,quantity,measured,formula,lower,upper")?;
            for census in &censuses {
                for line in census.to_csv().lines().skip(1) {
                    writeln!(out, "{},{line}", census.q)?;
                }
            }
        }
        Format::Json => {
            for census in &censuses {
                writeln!(out, "{}", census.to_json())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn lattice_verify(
    c: &Common,
    kind: &str,
    shift: &[i64],
    samples: Option<u64>,
    envelope: bool,
) -> Result<(), Failure> {
    let mut qs = fields(c)?;
    qs.sort_unstable();
    qs.dedup();
    let g = single_g(c)?;
    let kind: LatticeKind = kind.parse()?;
    let f = match (&c.s, c.n) {
        (None, None) => 1,
        _ => prime_set(c)?
            .product_u64()
            .ok_or_else(|| Failure::Invalid("F does not fit in 64 bits".into()))?,
    };
    let shift = if shift.is_empty() { vec![0; g] } else { shift.to_vec() };
    if shift.len() != g {
        return Err(Failure::Invalid(format!("--shift needs {g} entries")));
    }
    let samples = samples.unwrap_or_else(|| lattice::default_samples(g));
    eprintln!("estimating vol(V_{g}) with {samples} samples, seed {}", c.seed);
    let vol = lattice::volume_vg(g, samples, c.seed)?;
    let calib_len = qs.len().div_ceil(2);
    let calib = lattice::calibrate(kind, &qs[..calib_len], g, f, &[shift.clone()], vol.value)?;
    let mut out = output(c)?;
    let fmt = format_or(c, Format::Csv);
    let meta = json!({
        "seed": c.seed.to_string(),
        "samples": vol.samples.to_string(),
        "v_g": format!("{:.6}", vol.value),
        "v_g_std_error": format!("{:.6}", vol.std_error),
        "c_empirical": format!("{:.6}", calib.c),
        "calibration_q_min": calib.q_min.to_string(),
        "calibration_q_max": calib.q_max.to_string(),
        "F": f.to_string(),
        "g": g.to_string(),
        "shift": shift.iter().map(i64::to_string).collect::<Vec<_>>(),
    });
    let write_meta = |out: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(
            out,
            "# seed={} samples={} v_g={:.6} se={:.6} F={f} shift={}",
            c.seed,
            vol.samples,
            vol.value,
            vol.std_error,
            shift.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
        )?;
        writeln!(
            out,
            "# c_empirical={:.6} calibrated on q in [{}, {}]",
            calib.c, calib.q_min, calib.q_max
        )
    };
    let all_pass;
    if envelope {
        let rows = lattice::envelope_scan(&qs, g, f, &shift, vol.value, calib.c)?;
        let q0 = lattice::recorded_q0(&rows);
        all_pass = q0.is_some();
        match fmt {
            Format::Csv => {
                write_meta(&mut out)?;
                writeln!(out, "# q0={}", q0.map(|q| q.to_string()).unwrap_or_else(|| "none".into()))?;
                writeln!(out, "q,count,lower,upper,inside,pre_asymptotic")?;
                for r in &rows {
                    writeln!(
                        out,
                        "{},{},{:.6},{:.6},{},{}",
                        r.envelope.q, r.count, r.envelope.lower, r.envelope.upper, r.inside, r.envelope.pre_asymptotic
                    )?;
                }
            }
            Format::Json => {
                let v = json!({
                    "meta": meta,
                    "q0": q0.map(|q| q.to_string()),
                    "rows": rows.iter().map(|r| json!({
                        "q": r.envelope.q.to_string(),
                        "count": r.count.to_string(),
                        "lower": format!("{:.6}", r.envelope.lower),
                        "upper": format!("{:.6}", r.envelope.upper),
                        "inside": r.inside,
                        "pre_asymptotic": r.envelope.pre_asymptotic,
                    })).collect::<Vec<_>>(),
                });
                writeln!(out, "{v}")?;
            }
        }
    } else {
        let reports = lattice::verify_prop_lattice(kind, &qs, g, f, &shift, vol.value, calib.c)?;
        all_pass = reports.iter().all(|r| r.pass);
        let stab = lattice::stabilization_ratio(&reports);
        match fmt {
            Format::Csv => {
                write_meta(&mut out)?;
                write!(out, "{}", lattice::LatticeCountReport::csv_header())?;
                for r in &reports {
                    write!(out, "{}", r.csv_row())?;
                }
            }
            Format::Json => {
                let v = json!({
                    "meta": meta,
                    "stabilization_ratio": stab.map(|s| format!("{s:.6}")),
                    "reports": reports.iter().map(|r| json!({
                        "q": r.q.to_string(),
                        "kind": r.kind.as_str(),
                        "count": r.count.to_string(),
                        "prediction": format!("{:.6}", r.prediction),
                        "residual": format!("{:.6}", r.residual),
                        "c_empirical": format!("{:.6}", r.c_empirical),
                        "pass": r.pass,
                    })).collect::<Vec<_>>(),
                });
                writeln!(out, "{v}")?;
            }
        }
        if let Some(s) = stab {
            eprintln!("stabilization ratio (upper/lower half max): {s:.3}");
        }
    }
    out.flush()?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Failed("some fields fall outside the stored bound".into()))
    }
}
