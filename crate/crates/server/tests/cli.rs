use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use mylibrary::config::Config;
use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mylibrary"))
        .args(args)
        .env("RUST_LOG", "warn")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn callno_sort_and_match() {
    let input = "QA76.9 .D3\nbd41 .m67 1999\nQA76.73 .R87 2026\nZ671 .L7\nB1\n";
    let sorted = run(&["callno", "sort"], input);
    assert!(sorted.status.success());
    assert_eq!(stdout(&sorted), "B1\nbd41 .m67 1999\nQA76.73 .R87 2026\nQA76.9 .D3\nZ671 .L7\n");

    let matched = run(&["callno", "match", "--ranges", "b - bd, z - zz"], input);
    assert_eq!(stdout(&matched), "bd41 .m67 1999\nZ671 .L7\nB1\n");

    let parsed = run(&["callno", "parse"], "bd41 .m67 1999\n");
    assert!(stdout(&parsed).starts_with("BD41 .M67 1999\t"));
}

#[test]
fn callno_reports_bad_lines_with_exit_two() {
    let o = run(&["callno", "sort"], "QA76\n76QA\n");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "QA76\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let bad = run(&["callno", "match", "--ranges", "bd - b"], "");
    assert!(!bad.status.success());
}

#[test]
fn seed_ingest_and_weekly_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().to_str().unwrap();
    let config = dir.path().join("mylibrary.toml");
    std::fs::write(
        &config,
        format!("data_dir = {data:?}\n[mail]\ntransport = \"spool\"\n"),
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let seed = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/seed.jsonl");

    let o = run(&["--config", config, "seed", seed.to_str().unwrap()], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let feed = dir.path().join("feed.tsv");
    std::fs::write(&feed, "BD41 .M67 1999\tKant\tCritique\thttps://x/1\t2026-10-07\nnot a row\n").unwrap();
    let o = run(&["--config", config, "ingest", feed.to_str().unwrap()], "");
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["accepted"], 1);

    let o = run(&["--config", config, "run-weekly", "--now", "2026-10-14"], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["week"], "2026-W41");

    let o = run(&["--config", config, "run-weekly", "--now", "yesterday"], "");
    assert!(!o.status.success());
}

#[test]
fn admin_password_comes_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().to_str().unwrap();
    let o = run(&["--data-dir", data, "admin", "add-user", "--username", "root", "--password-stdin"], "correct horse\n");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let short = run(&["--data-dir", data, "admin", "add-user", "--username", "x", "--password-stdin"], "short\n");
    assert!(!short.status.success());
}

#[test]
fn example_config_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../mylibrary.example.toml");
    let config = Config::load(&path).unwrap();
    assert_eq!(config.utc_offset.local_minus_utc(), -5 * 3600);
    assert_eq!(config.weekly.hour, 6);
}
