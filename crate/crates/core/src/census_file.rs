//! Plain-text cache format for enumeration streams.
//!
//! ```text
//! weil-census v1 q=<q> g=<g> mode=<mode>
//! a1,...,ag,f1,fp1,ordinary,candidate_only
//! ...
//! count=<n> crc32=<hex>
//! ```
//!
//! Booleans are written `1`/`0`. The CRC-32 covers the data rows exactly as
//! written, newline included.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::enumeration::{EnumerationManifest, IsogenyClassRecord, Mode};
use crate::error::{Error, Result};
use crate::weil::{values_at_one, FieldParams, WeilCoefficients};

const MAGIC: &str = "weil-census v1";

pub fn header(q: u64, g: usize, mode: Mode) -> String {
    format!("{MAGIC} q={q} g={g} mode={mode}\n")
}

/// One data row, newline-terminated.
pub fn row(r: &IsogenyClassRecord) -> String {
    let mut s = String::new();
    for a in &r.coeffs.a {
        s.push_str(&a.to_string());
        s.push(',');
    }
    s.push_str(&format!(
        "{},{},{},{}\n",
        r.f1,
        r.fp1,
        u8::from(r.ordinary),
        u8::from(r.candidate_only)
    ));
    s
}

pub fn persist(
    path: &Path,
    q: u64,
    g: usize,
    mode: Mode,
    records: &[IsogenyClassRecord],
) -> Result<EnumerationManifest> {
    let manifest = EnumerationManifest::from_records(q, g, mode, records);
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(header(q, g, mode).as_bytes())?;
    for r in records {
        out.write_all(row(r).as_bytes())?;
    }
    writeln!(
        out,
        "count={} crc32={:08x}",
        manifest.total, manifest.checksum
    )?;
    out.flush()?;
    Ok(manifest)
}

pub fn load(path: &Path) -> Result<(EnumerationManifest, Vec<IsogenyClassRecord>)> {
    let text = fs::read_to_string(path)?;
    let bad = |line: usize, reason: &str| Error::Malformed {
        path: PathBuf::from(path),
        line,
        reason: reason.to_string(),
    };
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    if lines.len() < 2 {
        return Err(bad(1, "missing header or trailer"));
    }
    let (q, g, mode) = parse_header(lines[0].trim_end()).ok_or_else(|| bad(1, "bad header"))?;
    let field = FieldParams::new(q).map_err(|e| bad(1, &e.to_string()))?;
    let trailer_no = lines.len();
    let (count, stored) =
        parse_trailer(lines[trailer_no - 1].trim_end()).ok_or_else(|| bad(trailer_no, "bad trailer"))?;

    let mut hasher = crc32fast::Hasher::new();
    for line in &lines[1..trailer_no - 1] {
        hasher.update(line.as_bytes());
    }
    let computed = hasher.finalize();
    if computed != stored {
        return Err(Error::ChecksumMismatch {
            path: PathBuf::from(path),
            stored,
            computed,
        });
    }

    let mut records = Vec::with_capacity(trailer_no.saturating_sub(2));
    for (i, line) in lines[1..trailer_no - 1].iter().enumerate() {
        let no = i + 2;
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != g + 4 {
            return Err(bad(no, "wrong field count"));
        }
        let a = fields[..g]
            .iter()
            .map(|x| x.parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(no, "bad coefficient"))?;
        let f1: i128 = fields[g].parse().map_err(|_| bad(no, "bad f1"))?;
        let fp1: i128 = fields[g + 1].parse().map_err(|_| bad(no, "bad fp1"))?;
        let flag = |s: &str| match s {
            "1" => Ok(true),
            "0" => Ok(false),
            _ => Err(bad(no, "bad flag")),
        };
        let ordinary = flag(fields[g + 2])?;
        let candidate_only = flag(fields[g + 3])?;
        if values_at_one(q, &a) != Some((f1, fp1)) {
            return Err(bad(no, "f1/fp1 inconsistent with coefficients"));
        }
        records.push(IsogenyClassRecord {
            coeffs: WeilCoefficients { field, a },
            f1,
            fp1,
            ordinary,
            candidate_only,
        });
    }
    if records.len() as u64 != count {
        return Err(bad(trailer_no, "record count does not match trailer"));
    }
    let manifest = EnumerationManifest::from_records(q, g, mode, &records);
    Ok((manifest, records))
}

fn parse_header(line: &str) -> Option<(u64, usize, Mode)> {
    let rest = line.strip_prefix(MAGIC)?.trim_start();
    let mut q = None;
    let mut g = None;
    let mut mode = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        match k {
            "q" => q = v.parse().ok(),
            "g" => g = v.parse().ok(),
            "mode" => mode = v.parse().ok(),
            _ => return None,
        }
    }
    Some((q?, g?, mode?))
}

fn parse_trailer(line: &str) -> Option<(u64, u32)> {
    let mut parts = line.split_whitespace();
    let count = parts.next()?.strip_prefix("count=")?.parse().ok()?;
    let crc = u32::from_str_radix(parts.next()?.strip_prefix("crc32=")?, 16).ok()?;
    parts.next().is_none().then_some((count, crc))
}
