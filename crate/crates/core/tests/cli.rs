use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn leibniz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leibniz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn catalog_list_names_all_algebras() {
    let out = leibniz(&["--format", "json", "catalog", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = json(&out)["algebras"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["name"].as_str().unwrap().to_string())
        .collect();
    let expected: Vec<String> = (1..=21).map(|i| format!("L{i}")).collect();
    assert_eq!(names, expected);
}

#[test]
fn unknown_algebra_is_a_usage_error() {
    let out = leibniz(&["equations", "L99", "--op", "nijenhuis"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown algebra"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flags_exit_2_and_name_the_flag() {
    let out = leibniz(&["lcs", "L13", "--param", "mu=2/"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--param"));
    assert!(stderr(&out).contains("quotients"));
    let out = leibniz(&["equations", "L1", "--op", "nijenhuis", "--weight", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = leibniz(&["enumerate", "L1", "--op", "rb", "--field", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(leibniz(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"[{"algebra": "L1", "kind": "rota-baxter", "weight": "0",
             "chart": [["0","0","0","0"],["0","0","0","0"],["r31","r32","r33","0"],["r41","r42","r43","0"]],
             "free": ["r31","r32","r33","r41","r42","r43"], "constraints": []}]"#,
    )
    .unwrap();
    let out = leibniz(&["verify", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"[{"algebra": "L1", "kind": "nijenhuis",
             "chart": [["1","0","0","0"],["0","0","0","0"],["0","0","0","0"],["0","0","0","0"]],
             "free": [], "constraints": []}]"#,
    )
    .unwrap();
    let out = leibniz(&["--format", "json", "verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let fam = &json(&out)["families"][0];
    assert_eq!(fam["classification"], "fails");
    let w = &fam["verdict"]["witness"];
    assert_eq!((&w["i"], &w["j"], &w["q"], &w["value"]), (&1.into(), &1.into(), &2.into(), &"1".into()));
    let out = leibniz(&["verify", "families/rb.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("passed 71/101"));
}

#[test]
fn output_into_missing_directory_fails_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("list.json");
    let out = leibniz(&["catalog", "list", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing"));
}

fn run_to(path: &Path, args: &[&str]) {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--output", path.to_str().unwrap()]);
    let out = leibniz(&all);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", stderr(&out));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["--format", "json", "enumerate", "L17", "--op", "nijenhuis", "--field", "2"],
        &["--format", "json", "--shards", "3", "verify", "families/averaging.json", "--symbolic-weight"],
        &["--format", "text", "check-leibniz", "--literal"],
        &["--format", "json", "dim-report", "--op", "reynolds"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (a, b) = (dir.path().join(format!("{i}a")), dir.path().join(format!("{i}b")));
        run_to(&a, args);
        run_to(&b, args);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{args:?}");
    }
}

#[test]
fn coverage_text_header() {
    let out = leibniz(&["enumerate", "L17", "--op", "nijenhuis", "--field", "2", "--cap", "2", "--dual"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("not proof"));
    let header = lines.next().unwrap();
    assert!(header.starts_with("L17 nijenhuis over F_2"), "{header}");
    assert!(text.contains("agree"));
}

#[test]
fn json_has_no_floats() {
    let out = leibniz(&["--format", "json", "compat", "L4", "L9"]);
    assert_eq!(out.status.code(), Some(1));
    fn walk(v: &Value) {
        match v {
            Value::Number(n) => assert!(n.is_u64() || n.is_i64(), "{n}"),
            Value::Array(a) => a.iter().for_each(walk),
            Value::Object(o) => o.values().for_each(walk),
            _ => {}
        }
    }
    let j = json(&out);
    walk(&j);
    assert_eq!(j["compatible"], false);
    assert_eq!(j["witness"]["triple"].as_array().unwrap().len(), 3);
}

#[test]
fn data_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_leibniz"))
        .args(["catalog", "list"])
        .env("LEIBNIZ_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("catalog.json"));
}
