use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shelf(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shelf"))
        .args(args)
        .env("SHELF_CACHE_DIR", cache)
        .output()
        .expect("run shelf")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn guess_g_four_cards() {
    let dir = tempfile::tempdir().unwrap();
    let out = shelf(
        dir.path(),
        &["guess", "--n", "4", "--k", "1", "--strategy", "G"],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["exact_score"], "7/4");
    assert_eq!(doc["backend"], "exact");
    assert_eq!(doc["positions"][1]["exact"], "3/8");
}

#[test]
fn guess_strategies_and_backends() {
    let dir = tempfile::tempdir().unwrap();
    let out = shelf(dir.path(), &["guess", "--n", "3", "--k", "2"]);
    assert_eq!(json(&out)["exact_score"], "9/8");

    let out = shelf(
        dir.path(),
        &["guess", "--n", "9", "--strategy", "constant:4"],
    );
    assert_eq!(json(&out)["exact_score"], "1/1");

    let file = dir.path().join("guesses.txt");
    fs::write(&file, "# G for n = 4\n1, 3\n3 1\n").unwrap();
    let arg = format!("file:{}", file.display());
    let out = shelf(dir.path(), &["guess", "--n", "4", "--strategy", &arg]);
    assert_eq!(json(&out)["exact_score"], "7/4");

    let out = shelf(dir.path(), &["guess", "--n", "100"]);
    let doc = json(&out);
    assert_eq!(doc["backend"], "float");
    assert!(doc["exact_score"].is_null());

    let out = shelf(dir.path(), &["guess", "--n", "66", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(json(&out)["exact_score"].as_str().unwrap().contains('/'));
}

#[test]
fn guess_writes_position_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("positions.csv");
    let out = shelf(
        dir.path(),
        &[
            "guess",
            "--n",
            "4",
            "--strategy",
            "G",
            "--table",
            table.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "\"position\",\"guess\",\"value\",\"exact\",\"error_bound\",\"ambiguous\""
    );
    assert_eq!(lines.next().unwrap(), "1,1,0.5,\"1/2\",0,\"false\"");
}

#[test]
fn matrix_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = shelf(dir.path(), &["matrix", "--n", "3"]);
    let doc = json(&out);
    assert_eq!(doc[0], serde_json::json!(["1/2", "0/1", "1/2"]));
    assert_eq!(doc[2][1], "1/2");

    let out = shelf(
        dir.path(),
        &["matrix", "--n", "3", "--which", "b-inv", "--format", "csv"],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("\"i\",1,2,3\n"));
    assert_eq!(text.lines().count(), 4);

    let out = shelf(dir.path(), &["matrix", "--n", "4", "--which", "t"]);
    assert_eq!(json(&out)[2][2], "1/4");
}

#[test]
fn out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = shelf(
        dir.path(),
        &["matrix", "--n", "5", "--out", path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 5);
}

#[test]
fn spectrum_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let first = shelf(dir.path(), &["spectrum", "--n", "16"]);
    assert_eq!(first.status.code(), Some(0));
    let entry = dir.path().join("eigensystem-v1-n16.json");
    assert!(entry.exists());
    let second = shelf(dir.path(), &["spectrum", "--n", "16"]);
    assert_eq!(first.stdout, second.stdout);
    let doc = json(&second);
    assert_eq!(doc["verified"], true);
    assert_eq!(doc["kernel_dimension"], 8);
    assert_eq!(doc["eigenvalues"][1], "1/4");

    fs::write(&entry, "garbage").unwrap();
    let third = shelf(dir.path(), &["spectrum", "--n", "16"]);
    assert_eq!(third.stdout, first.stdout);
    assert!(String::from_utf8_lossy(&third.stderr).contains("discarding cache entry"));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = shelf(dir.path(), &["verify", "--n", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["passed"], true);
    assert!(doc["checks"].as_array().unwrap().len() > 15);

    let out = shelf(dir.path(), &["verify", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn counterexample_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = shelf(dir.path(), &["counterexample"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["entry_19"], "1615/16384");
    assert_eq!(doc["entry_20"], "52003/524288");
    assert_eq!(doc["card_19_beaten"], true);
    assert_eq!(doc["column"].as_array().unwrap().len(), 24);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--n", "5", "--samples", "5000", "--seed", "9"];
    let a = shelf(dir.path(), &[&args[..], &["--threads", "1"]].concat());
    let b = shelf(dir.path(), &[&args[..], &["--threads", "3"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["mode"], "matrix");
    assert_eq!(doc["counts"][0].as_array().unwrap().len(), 5);

    let out = shelf(
        dir.path(),
        &[
            "simulate",
            "--n",
            "4",
            "--mode",
            "game",
            "--strategy",
            "G",
            "--samples",
            "2000",
            "--format",
            "csv",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("\"score\",\"count\"\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["guess"][..],
        &["guess", "--n", "4", "--bogus"][..],
        &["guess", "--n", "4", "--strategy", "best"][..],
        &["guess", "--n", "4", "--strategy", "constant:9"][..],
        &["guess", "--n", "4", "--k", "0"][..],
        &["simulate", "--n", "4", "--samples", "0"][..],
        &["matrix", "--n", "1"][..],
    ] {
        let out = shelf(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    let out = shelf(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("counterexample"));
}

#[test]
fn outputs_carry_schema_required_fields() {
    let schema: Value = serde_json::from_str(
        &fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../schema/output.schema.json"
        ))
        .unwrap(),
    )
    .unwrap();
    let defs = &schema["$defs"];
    let dir = tempfile::tempdir().unwrap();
    for (def, args) in [
        ("spectrum", &["spectrum", "--n", "5"][..]),
        ("guess", &["guess", "--n", "5"][..]),
        (
            "simulate",
            &["simulate", "--n", "5", "--samples", "100"][..],
        ),
        ("verify", &["verify", "--n", "5"][..]),
        ("counterexample", &["counterexample"][..]),
    ] {
        let doc = json(&shelf(dir.path(), args));
        for key in defs[def]["required"].as_array().unwrap() {
            assert!(
                doc.get(key.as_str().unwrap()).is_some(),
                "{def} lacks {key}"
            );
        }
    }
}
