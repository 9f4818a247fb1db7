use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use codec_cli::{command, error_line, exit_code, ColorMode, RunConfig};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn codec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codec"))
        .args(args)
        .env("CODEC_COLOR", "never")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = codec(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A model trained on the fixture corpus and its index, built once through
/// the binary.
struct Pipeline {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Pipeline {
    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

fn pipeline() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let corpus = fixtures().join("fixture.jsonl");
        let ckpt = root.join("m.ckpt");
        let index = root.join("i.cdxi");
        ok(&["train", "--corpus", s(&corpus), "--checkpoint", s(&ckpt), "--log-every", "1000"]);
        ok(&["index", "--corpus", s(&corpus), "--checkpoint", s(&ckpt), "--index", s(&index), "--seed", "3"]);
        Pipeline { _dir: dir, root }
    })
}

fn scan_flags(p: &Pipeline) -> Vec<String> {
    vec![
        "--checkpoint".into(),
        p.path("m.ckpt").display().to_string(),
        "--index".into(),
        p.path("i.cdxi").display().to_string(),
    ]
}

fn with(base: &[&str], extra: &[String]) -> Vec<String> {
    base.iter().map(|a| a.to_string()).chain(extra.iter().cloned()).collect()
}

fn run(args: &[String]) -> Output {
    codec(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn error_json(out: &Output) -> serde_json::Value {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn help_documents_every_flag() {
    let cmd = command(ColorMode::Never);
    let top = String::from_utf8(ok(&["--help"]).stdout).unwrap();
    let subs: Vec<_> = cmd.get_subcommands().filter(|c| c.get_name() != "help").collect();
    assert_eq!(subs.len(), 9);
    for sub in subs {
        let name = sub.get_name();
        assert!(top.contains(name), "{name} missing from top-level help");
        assert!(sub.get_about().is_some(), "{name} has no description");
        let help = String::from_utf8(ok(&[name, "--help"]).stdout).unwrap();
        for arg in sub.get_arguments() {
            if arg.get_id() == "help" {
                continue;
            }
            assert!(
                arg.get_help().is_some_and(|h| !h.to_string().is_empty()),
                "{name}: `{}` is undocumented",
                arg.get_id()
            );
            let shown = match arg.get_long() {
                Some(l) => format!("--{l}"),
                None => format!("<{}>", arg.get_value_names().unwrap()[0]),
            };
            assert!(help.contains(&shown), "{name} --help does not show {shown}");
        }
    }
}

#[test]
fn config_text_round_trips() {
    let mut c = RunConfig::default();
    c.set("learning_rate", "0.0125").unwrap();
    c.set("optimizer", "sgd").unwrap();
    c.set("index", "/tmp/x y.cdxi").unwrap();
    c.set("seed", "18446744073709551615").unwrap();
    assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    assert!(RunConfig::parse("colour = red").is_err());
    assert!(RunConfig::parse("steps = many").is_err());
    assert!(RunConfig::parse("steps").is_err());
    let mut bad = RunConfig::default();
    bad.set("k", "0").unwrap();
    assert!(bad.validate().is_err());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let saved = dir.path().join("saved.cfg");
    std::fs::write(&cfg, "seed = 5\nk = 4\ndepth = 7\n").unwrap();
    let index = dir.path().join("missing.cdxi");
    let out = codec(&[
        "stats",
        "--config",
        s(&cfg),
        "--seed",
        "9",
        "--index",
        s(&index),
        "--save-config",
        s(&saved),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let back = RunConfig::parse(&std::fs::read_to_string(&saved).unwrap()).unwrap();
    assert_eq!((back.seed, back.k, back.depth), (9, 4, 7));
    assert_eq!(back.index.as_deref(), Some(index.as_path()));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "latent_dim = 0\n").unwrap();
    for args in [
        vec!["search"],
        vec!["train", "--bogus"],
        vec!["stats"],
        vec!["stats", "--config", s(&cfg), "--index", "x"],
        vec!["train", "--optimizer", "rmsprop", "--corpus", "c", "--checkpoint", "m"],
    ] {
        let out = codec(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&out)["error"]["kind"], "usage", "{args:?}");
    }
}

#[test]
fn error_kinds_map_to_exit_codes() {
    let numeric = anyhow::Error::new(codec_core::Error::NonFiniteObjective {
        step: 3,
        detail: "objective = NaN".into(),
    })
    .context("training");
    assert_eq!(exit_code(&numeric), 4);
    let line: serde_json::Value = serde_json::from_str(&error_line(&numeric)).unwrap();
    assert_eq!(line["error"]["kind"], "numeric");
    assert_eq!(line["error"]["code"], 4);
    let data = anyhow::Error::new(codec_core::Error::Format("bad magic".into()));
    assert_eq!(exit_code(&data), 3);
    assert_eq!(exit_code(&anyhow::Error::new(codec_cli::UsageError("x".into()))), 2);
}

#[test]
fn ingest_reproduces_the_fixture_corpus() {
    let expected = std::fs::read(fixtures().join("fixture.jsonl")).unwrap();
    let out = ok(&["ingest", s(&fixtures().join("corpus"))]);
    assert_eq!(out.stdout, expected);
    let again = ok(&["ingest", s(&fixtures().join("fixture.jsonl"))]);
    assert_eq!(again.stdout, expected);
}

#[test]
fn gui_query_retrieves_a_frame_creating_method() {
    let p = pipeline();
    let query = fixtures().join("queries/MyGuiAppl.mj");
    let out = run(&with(&["search", s(&query), "-k", "10", "--format", "json"], &scan_flags(p)));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 10);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r["rank"], i + 1);
        for key in ["id", "score", "sketch", "source"] {
            assert!(!r[key].is_null(), "missing {key}");
        }
    }
    let frame = rows.iter().find(|r| {
        let sk = r["sketch"].as_str().unwrap();
        sk.starts_with("ret JFrame\n") && sk.contains("JFrame.JFrame")
    });
    assert!(frame.is_some(), "no frame-creating method in the top 10");

    let table = run(&with(&["search", s(&query)], &scan_flags(p)));
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("rank"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn query_without_a_hole_is_rejected() {
    let p = pipeline();
    for (file, n) in [("NoHole.mj", 0), ("TwoHoles.mj", 2)] {
        let query = fixtures().join("queries").join(file);
        let out = run(&with(&["search", s(&query)], &scan_flags(p)));
        assert_eq!(out.status.code(), Some(3));
        assert!(out.stdout.is_empty());
        let e = error_json(&out);
        assert_eq!(e["error"]["kind"], "data");
        let msg = e["error"]["message"].as_str().unwrap();
        assert!(msg.contains("ambiguous query") && msg.contains(&format!("found {n}")), "{msg}");
    }
}

#[test]
fn eval_reports_are_byte_identical_for_a_seed() {
    let p = pipeline();
    let queries = fixtures().join("corpus");
    let base = ["eval", "--queries", s(&queries), "--tasks", "12", "--seed", "21"];
    let a = run(&with(&base, &scan_flags(p)));
    let mut flags = scan_flags(p);
    flags.extend(["--threads".into(), "1".into(), "--shards".into(), "3".into()]);
    let b = run(&with(&base, &flags));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["n_tasks"], 12);
    assert_eq!(report["scores"].as_array().unwrap().len(), 4);

    let other = ["eval", "--queries", s(&queries), "--tasks", "12", "--seed", "22"];
    let c = run(&with(&other, &scan_flags(p)));
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn index_and_stats_are_reproducible() {
    let p = pipeline();
    let again = p.path("again.cdxi");
    let corpus = fixtures().join("fixture.jsonl");
    ok(&[
        "index",
        "--corpus",
        s(&corpus),
        "--checkpoint",
        s(&p.path("m.ckpt")),
        "--index",
        s(&again),
        "--seed",
        "3",
        "--threads",
        "1",
    ]);
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(p.path("i.cdxi")).unwrap());
    let st: serde_json::Value =
        serde_json::from_slice(&ok(&["stats", "--index", s(&again), "--format", "json"]).stdout).unwrap();
    assert_eq!(st["count"], 116);
    assert_eq!(st["d"], 16);
    assert_eq!(st["checksum"].as_str().unwrap().len(), 64);
}

#[test]
fn oracle_check_and_bench_report_json() {
    let p = pipeline();
    let query = fixtures().join("queries/IO.mj");
    let out = run(&with(
        &["oracle-check", "--queries", s(&query), "--depth", "20", "--mc-samples", "50"],
        &scan_flags(p),
    ));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let j = r["mean_jaccard"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&j));
    assert_eq!(r["queries"][0]["query"], "IO");

    let out = run(&with(
        &["bench", "--queries", s(&query), "--repeats", "1", "--mc-entries", "20", "--threads", "1"],
        &scan_flags(p),
    ));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(b["entries"], 116);
    assert!(b["analytic_per_sec"].as_f64().unwrap() > 0.0);
}

#[test]
fn synthetic_sources_round_trip_through_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("syn");
    ok(&["gen-synthetic", "--out", s(&out), "--families", "3", "--per-family", "20", "--seed", "4"]);
    let first = std::fs::read(out.join("train.mj")).unwrap();
    ok(&["gen-synthetic", "--out", s(&out), "--families", "3", "--per-family", "20", "--seed", "4"]);
    assert_eq!(std::fs::read(out.join("train.mj")).unwrap(), first);
    let corpus = ok(&["ingest", s(&out.join("train.mj"))]).stdout;
    assert!(String::from_utf8(corpus).unwrap().lines().count() > 54);
}
