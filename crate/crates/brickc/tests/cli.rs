use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/running_example.mcil.json")
}

fn brickc(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_brickc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(1));
    serde_json::from_slice::<Value>(&out.stderr).unwrap()["error"].clone()
}

#[test]
fn check_prints_the_sequent() {
    let v = json(&brickc(&["check", corpus().to_str().unwrap()], None));
    assert_eq!(v["sequent"], "x1 x2 ⊢ x6 x7");
}

#[test]
fn stdin_is_accepted() {
    let text = std::fs::read_to_string(corpus()).unwrap();
    let v = json(&brickc(&["stats", "-"], Some(&text)));
    assert_eq!(v["generator_leaves"], 4);
    assert_eq!(v["tensor_width"], 2);
}

#[test]
fn compile_uses_document_bindings() {
    let v = json(&brickc(&["compile", corpus().to_str().unwrap()], None));
    assert_eq!((v["rows"].as_u64(), v["cols"].as_u64()), (Some(4), Some(4)));
    assert_eq!(v["entries"].as_array().unwrap().len(), 16);
}

#[test]
fn seeded_compile_matches_bindings_file() {
    let path = corpus();
    let p = path.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    let out = brickc(&["bindings", p, "--seed", "9", "--mode", "dirsum", "--dim", "1"], None);
    assert!(out.status.success());
    std::fs::write(&b, &out.stdout).unwrap();
    let from_file = brickc(&["compile", p, "--bindings", b.to_str().unwrap()], None);
    let seeded = brickc(&["compile", p, "--seed", "9", "--dim", "1", "--mode", "dirsum"], None);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(from_file.stdout, seeded.stdout);
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("d.svg");
    let out = brickc(
        &[
            "render",
            corpus().to_str().unwrap(),
            "--style",
            "brick",
            "-o",
            out_path.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(out_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("id=\"node:").count(), 4);
}

#[test]
fn normalize_output_reparses() {
    let out = brickc(&["normalize", corpus().to_str().unwrap(), "--minimize-width"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let doc = brickc_core::il::parse(&text).unwrap();
    assert!(doc.term.is_some());
}

#[test]
fn proof_formats() {
    let plain = brickc(&["proof", corpus().to_str().unwrap()], None);
    assert!(String::from_utf8(plain.stdout).unwrap().starts_with("(cut) x1 x2 ⊢ x6 x7"));
    let latex = brickc(&["proof", corpus().to_str().unwrap(), "--latex"], None);
    assert!(latex.status.success());
    assert!(String::from_utf8(latex.stdout).unwrap().contains("\\BinaryInfC"));
}

#[test]
fn errors_are_json_on_stderr() {
    let e = error(&brickc(&["check", "-"], Some("")));
    assert_eq!(e["code"], "syntax-error");
    let ill = r#"{"version":1,"signature":{"objects":["x"],"generators":[{"name":"f","dom":["x"],"cod":["x","x"]}]},
        "term":{"op":"seq","args":[{"op":"gen","name":"f"},{"op":"gen","name":"f"}]}}"#;
    assert_eq!(error(&brickc(&["check", "-"], Some(ill)))["code"], "type-error");
    let e = error(&brickc(
        &["compile", "-"],
        Some(&ill.replace(r#"{"op":"gen","name":"f"}]"#, r#"{"op":"id","wire":["x","x"]}]"#)),
    ));
    assert_eq!(e["code"], "missing-bindings");
    assert_eq!(error(&brickc(&["check", "/nonexistent/doc.json"], None))["code"], "io-error");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(brickc(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(brickc(&["compile"], None).status.code(), Some(2));
}

#[test]
fn unknown_template_is_rejected() {
    let e = error(&brickc(&["compile", corpus().to_str().unwrap(), "--emit", "fortran"], None));
    assert_eq!(e["code"], "unknown-template");
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    let (r, c) = (v["rows"].as_u64().unwrap() as usize, v["cols"].as_u64().unwrap() as usize);
    let e: Vec<f64> = v["entries"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    (0..r).map(|i| e[i * c..(i + 1) * c].to_vec()).collect()
}

fn kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for ra in a {
        for rb in b {
            out.push(ra.iter().flat_map(|x| rb.iter().map(move |y| x * y)).collect());
        }
    }
    out
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

#[test]
fn seed_42_compile_matches_dense_oracle() {
    let p = corpus();
    let p = p.to_str().unwrap();
    let b = json(&brickc(&["bindings", p, "--seed", "42", "--mode", "kron"], None));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seed42.json");
    std::fs::write(&path, b.to_string()).unwrap();
    let got = matrix(&json(&brickc(
        &["compile", p, "--bindings", path.to_str().unwrap(), "--mode", "kron"],
        None,
    )));
    let m = |g: &str| matrix(&b["matrices"][g]);
    let want = mul(&kron(&m("f1"), &m("f2")), &kron(&m("f3"), &m("f4")));
    let diff = got
        .iter()
        .flatten()
        .zip(want.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert_eq!((got.len(), got[0].len()), (4, 4));
    assert!(diff < 1e-12, "{diff}");
}
