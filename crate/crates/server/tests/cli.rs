use std::path::Path;
use std::process::{Command, Output};

const FEED: &str = r#"{"source":"kb","source_version":"1","back_pointer":"test"}
{"src":{"name":"Human","type":"Concept"},"edge":"CanUse","dst":{"name":"Cup","type":"Concept"}}
"#;

fn brain(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brain"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .env_remove("BRAIN_DATA_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn ingest_query_stats_rebuild() {
    let tmp = tempfile::tempdir().unwrap();
    let feed = tmp.path().join("feed.jsonl");
    std::fs::write(&feed, FEED).unwrap();
    let data = tmp.path().join("data");

    let o = brain(&data, &["register-source", "kb", "0.8"]);
    assert!(o.status.success());
    let o = brain(&data, &["ingest", feed.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["report"]["nodes_added"], 2);

    let o = brain(&data, &["query", "fetch ({name:`Human'})→[`CanUse']→(v)"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v[0]["name"], "Cup");
    assert!((v[0]["belief"].as_f64().unwrap() - 4.2 / 6.0).abs() < 1e-12);

    let o = brain(&data, &["stats"]);
    assert_eq!(stdout_json(&o)["edge_count"], 1);

    let o = brain(&data, &["rebuild"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["matches_live"], true);

    let o = brain(&data, &["rebuild", "--exclude", "kb"]);
    assert_eq!(stdout_json(&o)["node_count"], 0);
    assert_eq!(stdout_json(&o)["live_node_count"], 2);
}

#[test]
fn data_dir_flag_overrides_env() {
    let tmp = tempfile::tempdir().unwrap();
    let feed = tmp.path().join("feed.jsonl");
    std::fs::write(&feed, FEED).unwrap();
    let flag = tmp.path().join("flag");
    let env = tmp.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_brain"))
        .args(["--data-dir", flag.to_str().unwrap(), "ingest", feed.to_str().unwrap()])
        .env("BRAIN_DATA_DIR", &env)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag.join("kb.log").exists());
    assert!(!env.join("kb.log").exists());

    let o = Command::new(env!("CARGO_BIN_EXE_brain"))
        .args(["stats"])
        .env("BRAIN_DATA_DIR", &flag)
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["node_count"], 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert_eq!(brain(&data, &["query", "fetch(("]).status.code(), Some(1));
    assert_eq!(brain(&data, &["ingest", "/definitely/not/here.jsonl"]).status.code(), Some(1));
    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{}\n").unwrap();
    let o = brain(&data, &["ingest", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(brain(&data, &["register-source", "x", "1.5"]).status.code(), Some(1));

    std::fs::create_dir_all(&data).unwrap();
    std::fs::write(data.join("sources.toml"), "not = [valid").unwrap();
    assert_eq!(brain(&data, &["stats"]).status.code(), Some(1));
}
