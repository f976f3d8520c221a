use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn afm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn analyze_torus() {
    let o = afm(&["analyze", corpus("torus.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("b1=4") && out.contains("form=3H"), "{out}");
}

#[test]
fn analyze_heisenberg_quotient_gives_zero_form() {
    let o = afm(&["--format", "json", "analyze", corpus("ab_case5_z2.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["b1"], 1);
    assert_eq!(v["b2"], 0);
    assert_eq!(v["form"]["type"], "zero");
}

#[test]
fn corrupted_file_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ \"schema\": 1,\n  \"label\": \"x\",\n  \"dim\": 4,, }").unwrap();
    let o = afm(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn abelianize_presentations() {
    let o = afm(&["abelianize", "< a, b | [a,b] >"]);
    assert_eq!(stdout(&o).trim(), "Z^2");
    let c2 = "< t1,t2,t3,al | [t1,t2], [t1,t3], [t2,t3], al^2 = t1, \
              al*t2*al^-1 = t2^-1, al*t3*al^-1 = t3^-1 >";
    let o = afm(&["abelianize", c2]);
    assert_eq!(stdout(&o).trim(), "Z + Z/2 + Z/2");
    let o = afm(&["abelianize", "< a | b >"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('b'));
}

#[test]
fn form_operations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    fs::write(&path, "2 2\n0 1\n1 0\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&afm(&["form", p, "classify"])).trim(), "1H");
    assert_eq!(stdout(&afm(&["form", p, "signature"])).trim(), "0");
    assert_eq!(stdout(&afm(&["form", p, "even"])).trim(), "true");
    fs::write(&path, "2 2\n0 1\n2 0\n").unwrap();
    let o = afm(&["form", p, "classify"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn snf_of_a_small_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    fs::write(&path, "2 2\n2 4\n6 8\n").unwrap();
    let o = afm(&["--format", "json", "snf", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d"], serde_json::json!([2, 4]));
}

#[test]
fn corpus_run_with_planted_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(corpus("bieberbach_z2_rank2.json"))
        .unwrap()
        .replace(r#""type": "hyperbolic", "n": 1"#, r#""type": "zero", "n": 0"#);
    fs::write(dir.path().join("planted.json"), text).unwrap();
    let o = afm(&["corpus-run", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn corpus_run_shipped_passes() {
    let o = afm(&["corpus-run", corpus("").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn corpus_run_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = afm(&["corpus-run", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn json_output_is_stable() {
    let dir = corpus("");
    let d = dir.to_str().unwrap();
    let first = afm(&["--format", "json", "corpus-run", d]).stdout;
    assert_eq!(afm(&["--format", "json", "corpus-run", d]).stdout, first);
    assert_eq!(afm(&["--format", "json", "--parallel", "4", "corpus-run", d]).stdout, first);
}
