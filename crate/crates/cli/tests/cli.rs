use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_weil-census"));
    c.env_remove("WEIL_CACHE_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/count_summary.schema.json");
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

#[test]
fn enumerate_summary_and_exit_codes() {
    let o = run(&["enumerate", "--q", "5", "--g", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("5,1,ordinary,8,"), "{row}");

    let o = run(&["enumerate", "--q", "6", "--g", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["enumerate", "--q", "5", "--g", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["enumerate", "--q", "5", "--g", "1", "--mode", "everything"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["enumerate", "--q", "5", "--g", "1", "--workers", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn warm_cache_gives_identical_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["enumerate", "--q", "7,9", "--g", "2", "--cache-dir", d];
    let cold = run(&args);
    assert!(cold.status.success());
    assert!(dir.path().join("weil-census_q7_g2_ordinary.csv").exists());
    let warm = run(&args);
    assert_eq!(stdout(&cold), stdout(&warm));
    assert!(String::from_utf8_lossy(&warm.stderr).contains("cache hit"));

    // a damaged cache file is rejected and rebuilt
    let f = dir.path().join("weil-census_q9_g2_ordinary.csv");
    let mut bytes = std::fs::read(&f).unwrap();
    let pos = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
    bytes[pos] = if bytes[pos] == b'-' { b'1' } else { b'-' };
    std::fs::write(&f, bytes).unwrap();
    let again = run(&args);
    assert_eq!(stdout(&cold), stdout(&again));
    assert!(String::from_utf8_lossy(&again.stderr).contains("cache rejected"));

    // environment fallback
    let env_dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_weil-census"))
        .args(["enumerate", "--q", "5", "--g", "1"])
        .env("WEIL_CACHE_DIR", env_dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_dir.path().join("weil-census_q5_g1_ordinary.csv").exists());
}

#[test]
fn classify_json_matches_schema() {
    let v = schema();
    let o = run(&["classify", "--q", "5", "--g", "1", "--S", "2"]);
    assert!(o.status.success());
    let j: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v.is_valid(&j), "{j}");
    assert_eq!(j["n_nontrivial"], "4");
    assert_eq!(j["n_noncyclic"], "2");
    assert_eq!(j["fraction_cyclic"], "1/2");
    assert_eq!(j["fraction_cyclic_decimal"], "0.500000");
    assert_eq!(j["bound_lower"], "1/2");
    assert_eq!(j["bound_upper"], "3/4");

    // absent fraction, several fields, with candidates
    let o = run(&["classify", "--q", "2,3,4", "--g", "2", "--S", "5", "--mode", "with-candidates"]);
    assert!(o.status.success());
    for line in stdout(&o).lines() {
        let j: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.is_valid(&j), "{j}");
    }
    let o = run(&["classify", "--q", "2", "--g", "1", "--S", "5"]);
    let j: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(j["fraction_cyclic"].is_null());
    assert!(v.is_valid(&j));

    assert_eq!(run(&["classify", "--q", "5", "--g", "1", "--S", ""]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--q", "5", "--g", "1"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--q", "5", "--g", "1", "--S", "4"]).status.code(), Some(2));
}

#[test]
fn classify_csv_and_n_sets() {
    let o = run(&["classify", "--q", "5", "--g", "1", "--N", "3", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("q,g,S,mode,n_total"));
    assert!(lines.next().unwrap().starts_with("5,1,2;3,ordinary,8,"));
}

#[test]
fn sigma_table_rows() {
    let o = run(&["sigma-table", "--N", "3"]);
    assert_eq!(stdout(&o), "N,lower,upper\n2,0.500000,0.750000\n3,0.500000,0.763889\n");
    let o = run(&["sigma-table", "--S", "2"]);
    assert!(stdout(&o).contains("2,0.500000,0.750000,0.875000,0.500000,0.750000"));
}

#[test]
fn limits_ladder() {
    let o = run(&["limits", "--S", "2", "--g", "1", "--q-range", "100:140", "--primes-only"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("q,n_total,n_nontrivial,n_noncyclic,fraction,limit\n"));
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",0.500000"), "{line}");
    }
    let o = run(&["limits", "--S", "2,3", "--g", "1", "--q", "101"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn residue_count_rows() {
    let o = run(&["residue-count", "--q", "5", "--g", "1", "--S", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("5,nontrivial,2,2,,"));
    let o = run(&["residue-count", "--q", "5", "--g", "3", "--S", "2,3,5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lattice_output_is_deterministic() {
    let args = [
        "lattice-verify", "--q-range", "4:40", "--g", "2", "--samples", "20000", "--seed", "11",
    ];
    let a = run(&args);
    let b = bin().args(args).args(["--workers", "1"]).output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# seed=11 samples=20000"));
    assert!(text.contains("\nq,kind,count,prediction,residual,c_empirical,pass\n"));

    let e = run(&["lattice-verify", "--q-range", "4:200", "--g", "1", "--envelope"]);
    assert!(e.status.success());
    assert!(stdout(&e).contains("# q0="));
}

#[test]
fn verify_pass_mutation_and_cap() {
    let o = run(&["verify", "--q", "5,7", "--g", "1,2", "--S", "2,3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(&["verify", "--q", "5", "--g", "2", "--S", "2,3", "--mutate", "nontrivial-formula"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residue.nontrivial-formula"));

    let o = run(&["verify", "--q", "5", "--g", "3", "--S", "2,3,5"]);
    assert_eq!(o.status.code(), Some(3));
}
