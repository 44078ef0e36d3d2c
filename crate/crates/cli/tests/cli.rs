use std::path::PathBuf;
use std::process::{Command, Output};

fn loopsoup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopsoup")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("loopsoup-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn lemma1_suite_passes_on_t2() {
    let o = loopsoup(&["verify", "lemma1", "--graph", "t2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("check,tolerance,worst,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn malformed_graph_file_reports_its_line() {
    let path = scratch("bad.json", "{\"vertices\": [\"a\", \"b\"],\n \"edges\": [oops]}\n");
    let o = loopsoup(&["check", "--graph", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = loopsoup(&["check", "--graph", "/nonexistent/graph.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn invalid_input_exits_with_validation_status() {
    let unit_free = scratch("tree.json", r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","c":1.0}],"killing":{}}"#);
    assert_eq!(loopsoup(&["check", "--graph", unit_free.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(loopsoup(&["sample", "--graph", "t2"]).status.code(), Some(1));
    assert_eq!(loopsoup(&["check", "--graph", "nosuch"]).status.code(), Some(1));
    assert_eq!(loopsoup(&["yangmills", "--graph", "path3"]).status.code(), Some(1));
    assert_eq!(loopsoup(&["verify", "nosuite"]).status.code(), Some(1));
}

#[test]
fn homology_law_on_circle4() {
    let o = loopsoup(&["homology", "--graph", "circle4", "--alpha", "1", "--jmax", "8", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 17);
    let total: f64 = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-6);
}

#[test]
fn outputs_are_reproducible_per_seed() {
    let args = ["sample", "--graph", "t3", "--seed", "11", "--samples", "50", "--what", "occupation"];
    let a = loopsoup(&args);
    let b = loopsoup(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = loopsoup(&["sample", "--graph", "t3", "--seed", "12", "--samples", "50", "--what", "occupation"]);
    assert_ne!(a.stdout, c.stdout);
    let args = ["holonomy", "--graph", "cycle4", "--group", "s3", "--assignment", "random", "--seed", "5", "--samples", "500", "--format", "json"];
    let a = loopsoup(&args);
    assert_eq!(a.stdout, loopsoup(&args).stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let total: f64 = parsed.as_array().unwrap().iter().map(|r| r["expected"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn covering_suite_with_assignment_file() {
    let assignment = scratch(
        "flip.json",
        r#"{"assignment":[{"from":"a","to":"b","element":"1"},{"from":"b","to":"c","element":"1"}]}"#,
    );
    for suite in ["covering", "decomp"] {
        let o = loopsoup(&["verify", suite, "--graph", "k4", "--group", "z2", "--assignment", assignment.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
}

#[test]
fn yangmills_table_has_one_row_per_epsilon() {
    let o = loopsoup(&["yangmills", "--graph", "cycle4", "--group", "z2", "--assignment", "random", "--seed", "3", "--epsilons", "0.2,0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = loopsoup(&["yangmills", "--graph", "circle4", "--theta", "0.25", "--format", "json"]);
    let parsed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 4);
}

#[test]
fn report_collects_sections() {
    let o = loopsoup(&["report", "--graph", "t3", "--group", "s3", "--assignment", "random", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for section in ["# graph", "# lemma1", "# prop1", "# homology", "# holonomy", "# yangmills"] {
        assert!(text.contains(section), "missing {section}");
    }
}
