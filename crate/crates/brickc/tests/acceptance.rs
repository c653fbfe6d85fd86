//! One line per acceptance criterion. Exits nonzero if any fails.

use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use brickc_core::backend::{codegen, evaluate, Matrix, MatrixBindings, Mode, TargetTemplate};
use brickc_core::il;
use brickc_core::render::{render, scene_checks, RenderOptions};
use brickc_core::rewrite::{minimize_width, terms_equivalent, CostModel, Equivalence};
use brickc_core::sample::{random_dims, random_document, random_signature, random_term, random_variant, SampleConfig};
use brickc_core::signature::{running_example_signature, ObjectName, Signature, Word};
use brickc_core::term::{running_example_term, tensor_width, typecheck, Term};
use brickc_core::tiling::{brick_to_term, decompose, double_order_key, enumerate_tilings, pinwheel, term_to_brick};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn case(rng: &mut ChaCha8Rng, cfg: &SampleConfig) -> (Signature, Term) {
    let sig = random_signature(rng, cfg);
    let t = random_term(rng, &sig, cfg);
    (sig, t)
}

fn diff(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b).unwrap_or(f64::INFINITY)
}

fn coherence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = SampleConfig::default();
    let (mut worst, mut distinct) = (0.0f64, 0);
    for i in 0..1000 {
        let (sig, t) = case(&mut rng, &cfg);
        let variants: Vec<Term> = (0..5).map(|_| random_variant(&mut rng, &t, &sig, 5)).collect();
        distinct += variants.iter().filter(|v| **v != t).count();
        for mode in [Mode::Kron, Mode::Dirsum] {
            let dims = random_dims(&mut rng, &sig, 3);
            let m = MatrixBindings::random(&sig, &dims, mode, i).map_err(|e| e.to_string())?;
            let base = evaluate(&t, &m, mode).map_err(|e| e.to_string())?;
            for v in &variants {
                let d = diff(&base, &evaluate(v, &m, mode).map_err(|e| e.to_string())?);
                worst = worst.max(d);
                ensure(d <= 1e-9, || format!("term {i} ({mode:?}): {t} vs {v} differ by {d:e}"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "1000 terms x 5 variants ({distinct} rewritten), max diff {worst:e}, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn swap_value() -> Outcome {
    let sig = Signature::new(vec![ObjectName::new("x").unwrap()], Vec::new());
    let x = Word::from_names(["x"]);
    let m = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 1), Mode::Dirsum, 0).map_err(|e| e.to_string())?;
    let got = evaluate(&Term::sym(x.clone(), x), &m, Mode::Dirsum).map_err(|e| e.to_string())?;
    let want = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    ensure(got == want, || format!("got {got:?}"))?;
    Ok("[[0,1],[1,0]]".into())
}

type Dense = Vec<Vec<f64>>;

fn dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

fn dense_kron(a: &Dense, b: &Dense) -> Dense {
    let mut out = Vec::new();
    for ra in a {
        for rb in b {
            out.push(ra.iter().flat_map(|x| rb.iter().map(move |y| x * y)).collect());
        }
    }
    out
}

fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

fn running_example() -> Outcome {
    let sig = running_example_signature();
    let m = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 2), Mode::Kron, 42).map_err(|e| e.to_string())?;
    let got = dense(&evaluate(&running_example_term(), &m, Mode::Kron).map_err(|e| e.to_string())?);
    let f = |n: &str| dense(&m.matrices[n]);
    let want = dense_mul(&dense_kron(&f("f1"), &f("f2")), &dense_kron(&f("f3"), &f("f4")));
    ensure(got.len() == want.len() && got[0].len() == want[0].len(), || "shape mismatch".into())?;
    let d = got
        .iter()
        .flatten()
        .zip(want.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(d < 1e-12, || format!("max diff {d:e}"))?;
    Ok(format!("{}x{} result, max diff {d:e}", got.len(), got[0].len()))
}

fn pinwheel_theorem() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for n in 1..=4 {
        let all = enumerate_tilings(n);
        let bad = all.iter().filter(|t| decompose(t).is_err()).count();
        ensure(bad == 0, || format!("{bad} obstructed tilings with {n} cells"))?;
        counts.push(all.len());
    }
    let all = enumerate_tilings(5);
    counts.push(all.len());
    let mut keys: Vec<_> = all.iter().filter(|t| decompose(t).is_err()).map(double_order_key).collect();
    keys.sort();
    let p = pinwheel();
    let mut want = vec![double_order_key(&p), double_order_key(&p.mirrored())];
    want.sort();
    ensure(keys == want, || format!("{} obstructed tilings with 5 cells", keys.len()))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "tilings per size {counts:?}, obstructed: pinwheel and mirror only, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..200 {
        let doc = random_document(&mut rng);
        let text = il::serialize(&doc);
        let back = il::parse(&text).map_err(|e| format!("document {i}: {e}"))?;
        ensure(back == doc && il::serialize(&back) == text, || format!("document {i} changed"))?;
    }
    let cfg = SampleConfig::planar();
    for i in 0..200 {
        let (sig, t) = case(&mut rng, &cfg);
        let b = term_to_brick(&t, &sig).map_err(|e| format!("term {i}: {e}"))?;
        let back = brick_to_term(&b, &sig).map_err(|e| format!("term {i}: {e}"))?;
        let eq = terms_equivalent(&back, &t, &sig).map_err(|e| format!("term {i}: {e}"))?;
        ensure(eq == Equivalence::Yes, || format!("term {i}: {t} came back as {back} ({eq:?})"))?;
    }
    Ok("200 documents, 200 planar bricks".into())
}

fn width_heuristic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SampleConfig::default();
    let mut reduced = 0;
    for i in 0..500 {
        let (sig, t) = case(&mut rng, &cfg);
        let w = minimize_width(&t, &sig, &CostModel::default()).map_err(|e| e.to_string())?;
        let (before, after) = (tensor_width(&t), tensor_width(&w));
        ensure(after <= before, || format!("term {i}: width {before} -> {after}"))?;
        reduced += usize::from(after < before);
        for mode in [Mode::Kron, Mode::Dirsum] {
            let dims = random_dims(&mut rng, &sig, 3);
            let m = MatrixBindings::random(&sig, &dims, mode, i).map_err(|e| e.to_string())?;
            let d = diff(
                &evaluate(&t, &m, mode).map_err(|e| e.to_string())?,
                &evaluate(&w, &m, mode).map_err(|e| e.to_string())?,
            );
            ensure(d <= 1e-9, || format!("term {i} ({mode:?}): diff {d:e}"))?;
        }
    }
    Ok(format!("500 terms, {reduced} narrowed"))
}

fn string_names(t: &Term, sig: &Signature) -> Vec<String> {
    let mut names: Vec<String> = typecheck(t, sig).unwrap().dom.iter().map(|o| o.to_string()).collect();
    t.visit_leaves(&mut |_, leaf| {
        if let Term::Gen(g) = leaf {
            names.extend(sig.generator(g).unwrap().cod.iter().map(|o| o.to_string()));
        }
    });
    names.sort();
    names
}

fn cli(args: &[&str], stdin: &str) -> Vec<u8> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_brickc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn brickc");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    if out.status.success() {
        out.stdout
    } else {
        out.stderr
    }
}

fn service_outputs(docs: &[String]) -> Vec<(String, String, String)> {
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        tokio::spawn(brickc::server::serve(listener));
        let client = reqwest::Client::new();
        let mut out = Vec::new();
        for doc in docs {
            let mut v: Value = serde_json::from_str(doc).unwrap();
            let send = |route: &str, body: String| {
                let req = client.post(format!("{base}{route}")).body(body);
                async move { req.send().await.unwrap().text().await.unwrap() }
            };
            let compile = send("/v1/compile", doc.clone()).await;
            let normalize = send("/v1/normalize", doc.clone()).await;
            v["options"] = json!({"style": "string"});
            let render = send("/v1/render", v.to_string()).await;
            let svg: Value = serde_json::from_str(&render).unwrap();
            out.push((compile, normalize, svg["svg"].as_str().unwrap_or_default().to_string()));
        }
        out
    })
}

fn renderer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = SampleConfig::default();
    for i in 0..100 {
        let (sig, t) = case(&mut rng, &cfg);
        let s = render(&t, &sig, &RenderOptions::default()).map_err(|e| e.to_string())?;
        let bad = scene_checks(&s);
        ensure(bad.is_empty(), || format!("term {i}: {bad:?}"))?;
        ensure(s.node_count() == t.generator_count(), || format!("term {i}: node count"))?;
        ensure(s.wire_names() == string_names(&t, &sig), || format!("term {i}: wire names"))?;
    }
    let docs: Vec<String> = (0..20).map(|_| il::serialize(&random_document(&mut rng))).collect();
    let served = service_outputs(&docs);
    for (i, (doc, (compile, normalize, svg))) in docs.iter().zip(&served).enumerate() {
        ensure(cli(&["compile", "-"], doc) == compile.as_bytes(), || {
            format!("document {i}: compile differs")
        })?;
        ensure(cli(&["normalize", "-"], doc) == normalize.as_bytes(), || {
            format!("document {i}: normalize differs")
        })?;
        ensure(cli(&["render", "-"], doc) == svg.as_bytes(), || {
            format!("document {i}: render differs")
        })?;
    }
    Ok("100 scenes well-formed, 20 documents identical over CLI and HTTP".into())
}

fn python_matrix(source: &str) -> Result<Matrix, String> {
    let mut child = Command::new("python3")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("python3: {e}"))?;
    child.stdin.take().unwrap().write_all(source.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let entries = v["entries"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    Matrix::new(v["rows"].as_u64().unwrap() as usize, v["cols"].as_u64().unwrap() as usize, entries).map_err(|e| e.to_string())
}

fn codegen_numpy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = SampleConfig::default();
    let template = TargetTemplate::numpy();
    let mut worst = 0.0f64;
    for i in 0..50 {
        let (sig, t) = case(&mut rng, &cfg);
        let mode = if i % 2 == 0 { Mode::Kron } else { Mode::Dirsum };
        let dims = random_dims(&mut rng, &sig, 3);
        let m = MatrixBindings::random(&sig, &dims, mode, i).map_err(|e| e.to_string())?;
        let want = evaluate(&t, &m, mode).map_err(|e| e.to_string())?;
        let p = codegen(&t, &m, mode, &template).map_err(|e| e.to_string())?;
        let got = python_matrix(&p.source).map_err(|e| format!("term {i}: {e}"))?;
        let d = diff(&want, &got);
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("term {i} ({mode:?}): diff {d:e}"))?;
    }
    Ok(format!("50 programs under python3/numpy, max diff {worst:e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("coherence", coherence),
        ("swap value", swap_value),
        ("running example", running_example),
        ("pinwheel", pinwheel_theorem),
        ("round trips", round_trips),
        ("width heuristic", width_heuristic),
        ("renderer", renderer),
        ("codegen", codegen_numpy),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    std::io::stdout().flush().unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
