use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 3

[training]
max_epochs = 8
learning_rate = 1e-3

[featurizer]
dimension = 4096

[eval]
top_n = [10]

[synth]
n_samples = 400
seed = 11
"#;

fn selfpace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfpace"))
        .args(args)
        .env_remove("SELFPACE_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = selfpace(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn setup(root: &Path) -> (String, String) {
    let cfg = root.join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let corpus = root.join("corpus");
    ok(&["gen-synthetic", "--config", p(&cfg), "--out", p(&corpus)]);
    (p(&cfg).to_owned(), p(&corpus).to_owned())
}

#[test]
fn full_workflow() {
    let root = tempfile::tempdir().unwrap();
    let (cfg, corpus) = setup(root.path());
    let run = root.path().join("run");
    let stdout = ok(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        &corpus,
        "--out",
        p(&run),
    ]);
    assert!(stdout.contains("test f1"), "{stdout}");
    let ckpt = run.join("checkpoint.json");

    let eval_dir = root.path().join("eval");
    let stdout = ok(&[
        "evaluate",
        "--config",
        &cfg,
        "--checkpoint",
        p(&ckpt),
        "--corpus",
        &corpus,
        "--out",
        p(&eval_dir),
        "--tau-grid",
        "0.2,0.5,0.8",
    ]);
    let metrics: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(metrics["f1"].is_number());
    let sweep = std::fs::read_to_string(eval_dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);

    let stdout = ok(&[
        "inspect-difficulty",
        "--checkpoint",
        p(&ckpt),
        "--corpus",
        &corpus,
        "--filter",
        "positives",
        "--bins",
        "5",
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["histogram"]["counts"].as_array().unwrap().len(), 5);
}

#[test]
fn no_spl_trace_uses_all_samples() {
    let root = tempfile::tempdir().unwrap();
    let (cfg, corpus) = setup(root.path());
    let run = root.path().join("run");
    ok(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        &corpus,
        "--out",
        p(&run),
        "--mode",
        "no-spl",
    ]);
    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    let mut lines = trace.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "selected_ratio").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for row in rows {
        assert_eq!(
            row.split(',').nth(col).unwrap().parse::<f64>().unwrap(),
            1.0
        );
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut outputs = vec![];
    for root in [a.path(), b.path()] {
        let (cfg, corpus) = setup(root);
        let run = root.join("run");
        ok(&[
            "train",
            "--config",
            &cfg,
            "--corpus",
            &corpus,
            "--out",
            p(&run),
        ]);
        outputs.push(
            ["checkpoint.json", "trace.csv", "report.json"]
                .map(|f| std::fs::read(run.join(f)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn resume_after_halt_matches() {
    let root = tempfile::tempdir().unwrap();
    let (cfg, corpus) = setup(root.path());
    let full = root.path().join("full");
    ok(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        &corpus,
        "--out",
        p(&full),
    ]);
    let part = root.path().join("part");
    let stdout = ok(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        &corpus,
        "--out",
        p(&part),
        "--halt-after",
        "3",
    ]);
    assert!(stdout.contains("halted after epoch 3"), "{stdout}");
    let ck = part.join("checkpoint.json");
    ok(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        &corpus,
        "--out",
        p(&part),
        "--resume",
        p(&ck),
    ]);
    assert_eq!(
        std::fs::read(full.join("checkpoint.json")).unwrap(),
        std::fs::read(part.join("checkpoint.json")).unwrap()
    );
}

#[test]
fn errors_map_to_exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let (cfg, corpus) = setup(root.path());

    let bad = root.path().join("bad.toml");
    std::fs::write(&bad, "[selector]\nk = -1.0\n").unwrap();
    let out = selfpace(&[
        "train",
        "--config",
        p(&bad),
        "--corpus",
        &corpus,
        "--out",
        p(root.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.starts_with("error[config]:") && err.contains("k must be ≥ 0"),
        "{err}"
    );

    let empty = root.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = selfpace(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        p(&empty),
        "--out",
        p(root.path()),
    ]);
    assert_eq!(out.status.code(), Some(5));

    let out = selfpace(&[
        "evaluate",
        "--checkpoint",
        p(&root.path().join("nope.json")),
        "--corpus",
        &corpus,
    ]);
    assert_eq!(out.status.code(), Some(4));

    let run = root.path().join("run");
    ok(&[
        "train",
        "--config",
        &cfg,
        "--corpus",
        &corpus,
        "--out",
        p(&run),
        "--halt-after",
        "1",
    ]);
    let other = root.path().join("other.toml");
    std::fs::write(
        &other,
        CONFIG.replace("dimension = 4096", "dimension = 2048"),
    )
    .unwrap();
    let out = selfpace(&[
        "evaluate",
        "--config",
        p(&other),
        "--checkpoint",
        p(&run.join("checkpoint.json")),
        "--corpus",
        &corpus,
    ]);
    assert_eq!(
        out.status.code(),
        Some(6),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
