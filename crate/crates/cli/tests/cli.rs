use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use vistutor_core::model::write_dataset;
use vistutor_core::synthetic::{gaussian_blobs, with_blob_explanations, BlobSpec};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vistutor"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn vistutor")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

struct Fixture {
    dir: tempfile::TempDir,
    dataset: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let spec = BlobSpec {
            classes: 3,
            per_class: 30,
            ..Default::default()
        };
        let ds = with_blob_explanations(&gaussian_blobs(&spec, 5), 5, 5, 5).unwrap();
        let dataset = dir.path().join("dataset.json");
        write_dataset(&ds, &dataset).unwrap();
        Fixture { dir, dataset }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn hypotheses(&self) -> PathBuf {
        let out = self.path("hyp.json");
        let o = cli(&[
            "gen-hyp",
            "--dataset",
            &s(&self.dataset),
            "--out",
            &s(&out),
            "--num",
            "40",
            "--seed",
            "2",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    }

    fn select(&self, hyp: &Path, extra: &[&str], out: &Path) -> Output {
        let (ds, hyp, out) = (s(&self.dataset), s(hyp), s(out));
        let mut args = vec![
            "select",
            "--dataset",
            &ds,
            "--hypotheses",
            &hyp,
            "--seed",
            "2",
            "--out",
            &out,
        ];
        args.extend_from_slice(extra);
        cli(&args)
    }
}

fn item_ids(path: &Path) -> Vec<String> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    serde_json::from_value(v["item_ids"].clone()).unwrap()
}

#[test]
fn help_exits_zero() {
    let o = cli(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
}

#[test]
fn usage_errors_exit_one() {
    let f = Fixture::new();
    let ds = s(&f.dataset);
    let out = s(&f.path("h.json"));
    assert_eq!(code(&cli(&["gen-hyp", "--dataset", &ds, "--out", &out])), 1);
    assert_eq!(code(&cli(&["gen-hyp", "--out", &out, "--seed", "1"])), 1);
    assert_eq!(code(&cli(&["frobnicate"])), 1);
    let hyp = f.hypotheses();
    let sel = f.path("sel.json");
    assert_eq!(code(&f.select(&hyp, &["--strategy", "GREEDY"], &sel)), 1);
    assert_eq!(
        code(&f.select(&hyp, &["--strategy", "EXPLAIN", "--alpha", "0"], &sel)),
        1
    );
    assert_eq!(
        code(&f.select(&hyp, &["--strategy", "EXPLAIN", "--beta", "-1"], &sel)),
        1
    );
}

#[test]
fn data_errors_exit_two() {
    let f = Fixture::new();
    let missing = s(&f.path("nope.json"));
    let out = s(&f.path("h.json"));
    let o = cli(&[
        "gen-hyp",
        "--dataset",
        &missing,
        "--out",
        &out,
        "--seed",
        "1",
    ]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());

    let ds = s(&f.dataset);
    assert_eq!(
        code(&cli(&[
            "gen-hyp",
            "--dataset",
            &ds,
            "--out",
            &out,
            "--num",
            "3",
            "--seed",
            "1"
        ])),
        2
    );

    let hyp = f.hypotheses();
    let sel = f.path("sel.json");
    assert_eq!(
        code(&f.select(&hyp, &["--strategy", "STRICT", "--budget", "10000"], &sel)),
        2
    );
    assert!(!sel.exists());
}

#[test]
fn infinite_discounts_reduce_explain_to_strict() {
    let f = Fixture::new();
    let hyp = f.hypotheses();
    let (a, b) = (f.path("explain.json"), f.path("strict.json"));
    let o = f.select(
        &hyp,
        &[
            "--strategy",
            "EXPLAIN",
            "--beta",
            "inf",
            "--gamma",
            "inf",
            "--budget",
            "8",
        ],
        &a,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = f.select(&hyp, &["--strategy", "STRICT", "--budget", "8"], &b);
    assert_eq!(code(&o), 0);
    let ids = item_ids(&a);
    assert_eq!(ids.len(), 8);
    assert_eq!(ids, item_ids(&b));
}

#[test]
fn simulate_writes_report() {
    let f = Fixture::new();
    let hyp = f.hypotheses();
    let out = f.path("sim.json");
    let o = cli(&[
        "simulate",
        "--dataset",
        &s(&f.dataset),
        "--hypotheses",
        &s(&hyp),
        "--strategies",
        "STRICT,RAND_IM",
        "--budget",
        "5",
        "--learners",
        "20",
        "--seed",
        "3",
        "--out",
        &s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.is_object());
    assert!(report.to_string().contains("STRICT"));
}

#[test]
fn difficulty_rescores_dataset() {
    let f = Fixture::new();
    let out = f.path("scored.json");
    let o = cli(&["difficulty", "--dataset", &s(&f.dataset), "--out", &s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let items = v["items"].as_array().unwrap();
    assert_eq!(items.len(), 90);
    assert!(items.iter().all(|it| !it["explanation"].is_null()));
}

#[test]
fn serve_with_bad_config_exits_two() {
    let f = Fixture::new();
    let cfg = f.path("svc.json");
    std::fs::write(
        &cfg,
        r#"{"dataset": "dataset.json", "teaching_sets": {}, "data_dir": "logs"}"#,
    )
    .unwrap();
    assert_eq!(code(&cli(&["serve", "--config", &s(&cfg)])), 2);
    assert_eq!(
        code(&cli(&["serve", "--config", &s(&f.path("missing.json"))])),
        2
    );
}
