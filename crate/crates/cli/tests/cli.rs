use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Child, Command, Output};
use std::thread::sleep;
use std::time::Duration;

use htmot_core::export::Labels;
use htmot_core::{mod_beta_pdf, BetaParams, TopicTreeExport};
use serde_json::Value;

const SPEC: &str = r#"
seed = 5
docs_per_leaf = 40
tokens_per_doc = 30
level_weights = [0.5, 0.5]

[[topics]]
name = "sport"
words = 30

  [[topics.children]]
  name = "tennis"
  words = 20
  window = [0.0, 0.5]

  [[topics.children]]
  name = "golf"
  words = 20
  window = [0.5, 1.0]

[[topics]]
name = "music"
words = 30
window = [0.0, 1.0]
"#;

const PARAMS: &str = "alpha = 0.01\nbeta = 0.01\niterations = 12\nsgi = 8\nbatch_size = 40\n";

fn htmot(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_htmot")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "htmot {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Generates a corpus and trains a small model in `dir/model`.
fn trained(dir: &Path) -> String {
    let spec = dir.join("spec.toml");
    let params = dir.join("params.toml");
    std::fs::write(&spec, SPEC).unwrap();
    std::fs::write(&params, PARAMS).unwrap();
    let corpus = dir.join("corpus.jsonl");
    let model = dir.join("model");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    htmot(&["synth", "--spec", &s(&spec), "--out", &s(&corpus)]);
    htmot(&[
        "train",
        "--corpus",
        &s(&corpus),
        "--params",
        &s(&params),
        "--seed",
        "3",
        "--out",
        &s(&model),
        "--no-filters",
        "--checkpoint-every",
        "5",
    ]);
    s(&model)
}

#[test]
fn train_audit_export_label() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    for file in ["corpus.json", "checkpoint.json", "topics.json"] {
        assert!(Path::new(&model).join(file).exists(), "{file} missing");
    }
    assert!(stdout(&htmot(&["audit", "--model", &model])).starts_with("audit passed"));

    let export = TopicTreeExport::load(&Path::new(&model).join("topics.json")).unwrap();
    let first = export.topics.first().expect("at least one topic").id.clone();
    htmot(&["label", "--model", &model, "--set", &format!("{first}=Sport news")]);
    let bad = Command::new(env!("CARGO_BIN_EXE_htmot"))
        .args(["label", "--model", &model, "--set", "99.99=Nothing"])
        .output()
        .unwrap();
    assert!(!bad.status.success());

    let out = dir.path().join("copy.json");
    htmot(&["export", "--model", &model, "--out", out.to_str().unwrap(), "--top-words", "3"]);
    let copy = TopicTreeExport::load(&out).unwrap();
    assert_eq!(copy.topics[0].label.as_deref(), Some("Sport news"));
    assert!(copy.nodes().iter().all(|n| n.top_words.len() <= 3));
    // The model directory copy is refreshed too.
    let again = TopicTreeExport::load(&Path::new(&model).join("topics.json")).unwrap();
    assert_eq!(again, copy);
}

#[test]
fn resume_continues_to_the_same_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let a = std::fs::read(Path::new(&model).join("checkpoint.json")).unwrap();
    // More batches from the saved checkpoint are a no-op once finished.
    let corpus = dir.path().join("corpus.jsonl");
    htmot(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        &model,
        "--resume",
    ]);
    let b = std::fs::read(Path::new(&model).join("checkpoint.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eval_writes_survey_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let survey = dir.path().join("survey.txt");
    let out = htmot(&[
        "eval",
        "--model",
        &model,
        "--coherence-topn",
        "5",
        "--survey-out",
        survey.to_str().unwrap(),
        "--survey-topics",
        "6",
        "--seed",
        "1",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("topic\tdepth\tsize\tcoherence\ttime_variance"));
    assert!(survey.exists());
    let key = std::fs::read_to_string(dir.path().join("survey.key.tsv")).unwrap();
    assert!(key.starts_with("question\ttopic\tintruder\tposition\tsource"));
}

#[test]
fn document_topics() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let tree: Value = serde_json::from_slice(&htmot(&["doc", "--model", &model, "--id", "tennis-0"]).stdout).unwrap();
    assert_eq!(tree["doc_id"], "tennis-0");
    assert!(!tree["nodes"].as_array().unwrap().is_empty());
}

#[test]
fn fixture_matches_engine() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.json");
    htmot(&["fixture", "--out", path.to_str().unwrap()]);
    let cases: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    for case in cases.as_array().unwrap() {
        let params = BetaParams {
            rho1: case["rho1"].as_f64().unwrap(),
            rho2: case["rho2"].as_f64().unwrap(),
        };
        let delta = case["delta"].as_f64().unwrap();
        let t = case["t"].as_array().unwrap();
        let v = case["value"].as_array().unwrap();
        assert_eq!(t.len(), 200);
        for (t, v) in t.iter().zip(v) {
            let want = mod_beta_pdf(params, delta, t.as_f64().unwrap()).unwrap();
            assert_eq!(v.as_f64().unwrap(), want);
        }
    }
}

#[test]
fn bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.toml");
    std::fs::write(&params, "alpha = 0.01\nbeta = 0.01\n").unwrap();
    let out = dir.path().join("report");
    htmot(&[
        "bench",
        "--sizes",
        "90,180",
        "--passes",
        "2",
        "--params",
        params.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let table = std::fs::read_to_string(out.join("table.tsv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(out.join("depth1_90.tsv").exists());
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 2);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn request(port: u16, method: &str, path: &str, body: &str) -> Option<(u16, String)> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(
        stream,
        "{method} {path} HTTP/1.0\r\nHost: localhost\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .ok()?;
    let mut raw = String::new();
    stream.read_to_string(&mut raw).ok()?;
    let status = raw.split_whitespace().nth(1)?.parse().ok()?;
    let body = raw.split_once("\r\n\r\n").map(|x| x.1.to_string()).unwrap_or_default();
    Some((status, body))
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_label_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let port = free_port();
    let _server = Server(
        Command::new(env!("CARGO_BIN_EXE_htmot"))
            .args(["serve", "--dir", &model, "--port", &port.to_string()])
            .spawn()
            .unwrap(),
    );
    let mut topics = None;
    for _ in 0..100 {
        topics = request(port, "GET", "/topics.json", "");
        if topics.is_some() {
            break;
        }
        sleep(Duration::from_millis(50));
    }
    let (status, body) = topics.expect("server did not come up");
    assert_eq!(status, 200);
    let export: TopicTreeExport = serde_json::from_str(&body).unwrap();
    let id = export.topics[0].id.clone();

    let put = format!(r#"{{"{id}": "Sport", "42.42": "Ghost"}}"#);
    let (status, body) = request(port, "PUT", "/labels", &put).unwrap();
    assert_eq!(status, 200);
    let reply: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(reply["saved"], 1);
    assert_eq!(reply["rejected"][0]["id"], "42.42");

    let (status, body) = request(port, "GET", "/labels", "").unwrap();
    assert_eq!(status, 200);
    let labels: Labels = serde_json::from_str(&body).unwrap();
    assert_eq!(labels.get(&id).map(String::as_str), Some("Sport"));
    let on_disk: Labels =
        serde_json::from_slice(&std::fs::read(Path::new(&model).join("labels.json")).unwrap()).unwrap();
    assert_eq!(on_disk, labels);

    assert_eq!(request(port, "PUT", "/labels", "not json").unwrap().0, 400);
    assert_eq!(request(port, "GET", "/../corpus.jsonl", "").unwrap().0, 404);
    assert_eq!(request(port, "DELETE", "/labels", "").unwrap().0, 405);
}
