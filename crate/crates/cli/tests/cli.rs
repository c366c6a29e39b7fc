mod support;

use std::fs;

use support::{golden_dir, run, transcript, CORPUS};

fn fixture(name: &str) -> String {
    golden_dir().join(name).to_str().unwrap().to_string()
}

#[test]
fn pairing_on_path_is_unreduced() {
    let (code, out, _) = run(&["pairing", "--structure", &fixture("p10.json"), "--formula", "adj(x1,x2)"]);
    assert_eq!(code, 0);
    assert_eq!(out, "18/100 0.180000000000\n");
}

#[test]
fn generated_file_feeds_pairing() {
    let dir = tempfile::tempdir().unwrap();
    let p3 = dir.path().join("p3.json");
    let p3 = p3.to_str().unwrap();
    let (code, _, _) = run(&["gen", "--family", "path", "--n", "3", "--out", p3]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&["pairing", "-s", p3, "--formula", "true"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("1/1 "), "{out}");
}

#[test]
fn break_on_star_reports_center_zero() {
    let (code, out, _) = run(&["break", "--structure", &fixture("star10.json"), "--eps", "1/2", "--r", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("centers [0]\n"), "{out}");
    assert!(out.contains("invariants ok\n"), "{out}");
}

#[test]
fn decimal_epsilon_is_a_usage_error() {
    let (code, out, err) = run(&["break", "-s", &fixture("star10.json"), "--eps", "0.5", "--r", "1"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("--eps"), "{err}");
}

#[test]
fn missing_flag_and_unknown_command_are_usage_errors() {
    assert_eq!(run(&["pairing", "-s", &fixture("p10.json")]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["--threads", "0", "residual", "-s", &fixture("p10.json"), "--r", "1"]).0, 2);
    assert_eq!(run(&["gen", "--family", "path"]).0, 2);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("pairing"));
}

#[test]
fn malformed_structure_names_file_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"domain\": 3,\n \"relations\": [}").unwrap();
    let bad = bad.to_str().unwrap();
    let (code, _, err) = run(&["residual", "-s", bad, "--r", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains(bad), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_is_a_domain_error() {
    let (code, _, err) = run(&["residual", "-s", "/nonexistent/x.json", "--r", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/x.json"), "{err}");
}

#[test]
fn bad_formula_names_position() {
    let (code, _, err) = run(&["pairing", "-s", &fixture("p10.json"), "-f", "adj(x1,"]);
    assert_eq!(code, 1);
    assert!(err.contains("column"), "{err}");
    let (code, _, err) = run(&["pairing", "-s", &fixture("p10.json"), "-f", "arc(x1,x2)"]);
    assert_eq!(code, 1);
    assert!(err.contains("arc"), "{err}");
}

#[test]
fn work_cap_can_be_lowered_and_lifted() {
    let f = "E x3. E x4. adj(x1,x3) & adj(x2,x4)";
    let (code, _, _) = run(&["--max-work", "100", "pairing", "-s", &fixture("rt40.json"), "-f", f]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["--max-work", "0", "pairing", "-s", &fixture("rt40.json"), "-f", f]);
    assert_eq!(code, 0);
}

#[test]
fn json_mode_emits_json_lines() {
    for line in CORPUS.iter().filter(|l| l.starts_with("--json")) {
        let text = transcript(line, "2");
        let body: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with("[exit")).collect();
        assert!(!body.is_empty(), "{line}");
        for l in body {
            serde_json::from_str::<serde_json::Value>(l).unwrap_or_else(|e| panic!("{line}: {e}: {l}"));
        }
    }
}

#[test]
fn split_writes_part_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, _, _) = run(&["split", "-s", &fixture("p10.json"), "--centers", "0,9", "--d", "1", "--out-dir", d]);
    assert_eq!(code, 0);
    for name in ["part_0.json", "part_1.json", "residue.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let (_, out, _) = run(&["pairing", "-s", dir.path().join("residue.json").to_str().unwrap(), "-f", "true"]);
    assert!(out.starts_with("1/1"));
}

#[test]
fn interpret_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let y = dir.path().join("y.json");
    let (code, _, _) = run(&["interpret", "--scheme", "builtin:y_to_f", "-s", &fixture("rt40.json"), "--out", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["interpret", "--scheme", "builtin:f_to_y", "-s", f.to_str().unwrap(), "--out", y.to_str().unwrap()]);
    assert_eq!(code, 0);
    let a = fostat_core::Structure::from_json_str(&fs::read_to_string(fixture("rt40.json")).unwrap()).unwrap();
    let b = fostat_core::Structure::from_json_str(&fs::read_to_string(y).unwrap()).unwrap();
    assert_eq!(a, b);
}

/// Set `FOSTAT_BLESS=1` to rewrite the expected transcript.
#[test]
fn golden_corpus_matches() {
    let got: String = CORPUS.iter().map(|l| transcript(l, "2")).collect();
    let path = golden_dir().join("expected.txt");
    if std::env::var_os("FOSTAT_BLESS").is_some() {
        fs::write(&path, &got).unwrap();
    }
    let want = fs::read_to_string(&path).unwrap();
    for (g, w) in got.split("$ ").zip(want.split("$ ")) {
        assert_eq!(g, w);
    }
    assert_eq!(got, want);
}
