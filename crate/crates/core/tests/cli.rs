use std::path::PathBuf;
use std::process::{Command, Output};

fn pstlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pstlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("pstlab-{}-{name}", std::process::id()))
}

#[test]
fn ese_reports_two_events() {
    let o = pstlab(&["ese", "-s", "0,±3,±4,±5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("count: 2\n"), "{text}");
    assert!(text.contains("method: exact-sturm\n"));
    assert_eq!(text.matches("root ").count(), 2);
}

#[test]
fn ese_json_schema() {
    let o = pstlab(&["ese", "-s", "0,+-3,+-4,+-5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 2);
    assert_eq!(v["method"], "exact-sturm");
    assert!((v["T"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-15);
    let roots = v["roots"].as_array().unwrap();
    assert!(roots.iter().all(|r| r["lo"].as_f64() <= r["tau"].as_f64() && r["tau"].as_f64() <= r["hi"].as_f64()));
}

#[test]
fn pst_equidistant_chain() {
    let o = pstlab(&["pst", "-s", "0,±1,±2,±3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("T: 3.14159265358979\n"), "{text}");
    assert!(text.contains("fidelity: 1.000000000\n"));
    assert!(text.contains("perfect: yes\n"));
}

#[test]
fn reconstruct_inadmissible_still_builds_matrix() {
    let o = pstlab(&["reconstruct", "-s", "0,±1,±2,±4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("pst: not admissible"));
    assert!(text.contains("b: "));
    let json = text.lines().find_map(|l| l.strip_prefix("json: ")).unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["n"], 7);
}

#[test]
fn reconstruct_json_has_exact_squares() {
    let o = pstlab(&["reconstruct", "-s", "0,±1,±2,±3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["b_squared"][0], "3/2");
    assert_eq!(v["pst"]["admissible"], true);
}

#[test]
fn family_certifies() {
    let o = pstlab(&["family", "--thm", "3.4", "-m", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("certified: 10") && text.contains("verified: yes"));
    let o = pstlab(&["family", "--thm", "3.2", "-m", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 0);
    assert_eq!(v["verified"], true);
}

#[test]
fn scan_writes_csv_and_json() {
    let csv = scratch("scan.csv");
    let o = pstlab(&["scan", "--zmax", "11", "--format", "csv", "-o", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    std::fs::remove_file(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,c,divisible,ese_count,agrees"));
    assert!(text.contains("\n1,4,7,true,0,true\n"));
    assert!(text.contains("\n3,6,11,false,"));

    let o = Command::new(env!("CARGO_BIN_EXE_pstlab"))
        .args(["scan", "--zmax", "9", "--format", "json"])
        .env("PSTLAB_THREADS", "1")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &v.as_array().unwrap()[0];
    assert_eq!((first["a"].as_i64(), first["b"].as_i64(), first["c"].as_i64()), (Some(1), Some(2), Some(3)));

    let o = pstlab(&["scan", "--zmax", "9"]);
    assert!(stdout(&o).contains("counterexamples: none"));
}

#[test]
fn plot_data_csv() {
    let path = scratch("plot.csv");
    let o = pstlab(&["plot-data", "-s", "0,±3,±4,±5", "--grid", "2000", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,p_first,p_last"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), 2000);
    let last = rows.last().unwrap();
    assert!((last[0] - std::f64::consts::PI).abs() < 1e-15 && last[2] >= 0.999);
    // p_first dips to zero twice before π.
    let dips = rows
        .windows(3)
        .filter(|w| w[1][0] < 3.0 && w[1][1] <= w[0][1] && w[1][1] <= w[2][1] && w[1][1] < 1e-5)
        .count();
    assert_eq!(dips, 2);
}

#[test]
fn amplitude_csv_compares_paths() {
    let o = pstlab(&["amplitude", "-s", "0,±1,±2,±3", "--grid", "50", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("t,series,eigen\n"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() < 1e-10);
    }
}

#[test]
fn output_is_deterministic() {
    let a = pstlab(&["ese", "-s", "0,±5,±6,±7"]);
    let b = pstlab(&["ese", "-s", "0,±5,±6,±7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validation_and_usage_errors_exit_two() {
    for args in [
        vec!["ese", "-s", "0,1,1"],
        vec!["ese", "-s", "0,±1,±2,±4"],
        vec!["pst", "-s", "zero"],
        vec!["amplitude", "-s", "0,1,3"],
        vec!["family", "--thm", "9.9", "-m", "1"],
        vec!["scan", "--zmax", "2"],
        vec!["unknown"],
        vec![],
    ] {
        let o = pstlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
