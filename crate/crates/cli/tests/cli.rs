use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_core-entropy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("core-entropy-{}-{name}", std::process::id()))
}

#[test]
fn entropy_examples() {
    let o = run(&["entropy", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("h=0.693147\n"));
    let o = run(&["entropy", "1/7"]);
    assert!(stdout(&o).starts_with("h=0.000000\n"));
    let o = run(&["entropy", "3/7", "--method", "both"]);
    assert_eq!(stdout(&o), "pairs 0.481212\ntree 0.481212\n");
}

#[test]
fn entropy_json_record() {
    let o = run(&["entropy", "7/12", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["angle"], "7/12");
    assert_eq!(v["method"], "pairs");
    assert_eq!(v["preperiod"], 2);
    assert!((v["h"].as_f64().unwrap() - 0.5 * std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["entropy", "abc"]).status.code(), Some(1));
    assert_eq!(run(&["entropy", "1/0"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["entropy", "1/2", "--method", "x"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["scan"]).status.code(), Some(1));
    assert_eq!(run(&["scan", "--period-max", "2", "--jobs", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tune_examples() {
    let o = run(&["tune", "--root", "1/3", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("tuned 7/12, 5/12\n"));
    assert!(s.contains("h=0.346574\n"));
    assert!(s.contains("formula PASS"));
    let s = stdout(&run(&["tune", "--root", "3/7", "1/2"]));
    assert!(s.contains("31/56"));
    assert!(s.contains("h=0.481212\n"));
    assert_eq!(run(&["tune", "--root", "1/6", "1/2"]).status.code(), Some(1));
    assert_eq!(run(&["tune", "--root", "1/3", "0"]).status.code(), Some(1));
}

#[test]
fn scan_examples() {
    let s = stdout(&run(&["scan", "--period-max", "1"]));
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("angle_num,angle_den,preperiod,period,h,method,residual,minor_lo,minor_hi,satellite"));
    assert!(lines[1].starts_with("0,1,0,1,0.0000000000,"));

    let s = stdout(&run(&["scan", "--period-max", "3"]));
    let angles: Vec<String> = s
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{}/{}", f[0], f[1])
        })
        .collect();
    assert_eq!(angles, ["0/1", "1/3", "2/3", "1/7", "2/7", "3/7", "4/7", "5/7", "6/7"]);
    for l in s.lines().skip(1) {
        let h: f64 = l.split(',').nth(4).unwrap().parse().unwrap();
        assert!(h.abs() < 1e-9 || (h - 0.481212).abs() < 1e-6);
    }

    let s = stdout(&run(&["scan", "--preperiodic-denominator-max", "12"]));
    assert!(s.lines().any(|l| l.starts_with("7,12,2,2,0.3465735903,pairs,")));
}

#[test]
fn scan_writes_file_and_rejects_bad_path() {
    let p = temp_path("scan.csv");
    let o = run(&["scan", "--period-max", "4", "--method", "both", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    std::fs::remove_file(&p).ok();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.iter().any(|l| l.starts_with("3,7,") && l.contains(",tree,")));
    assert!(rows.iter().any(|l| l.starts_with("3,7,") && l.contains(",pairs,")));
    let bad = run(&["scan", "--period-max", "2", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn tree_formats() {
    let s = stdout(&run(&["tree", "3/7"]));
    assert!(s.starts_with("tree of 3/7: 3 vertices, 2 edges"));
    let s = stdout(&run(&["tree", "1/4", "--format", "dot"]));
    assert!(s.starts_with("graph hubbard {"));
    let o = run(&["tree", "1/4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["theta"], "1/4");
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn dimension_report() {
    let s = stdout(&run(&["dimension", "3/7", "--depth", "12"]));
    assert!(s.starts_with("dim=0.694242\n"));
    assert!(s.contains("depth=12"));
    assert_eq!(run(&["dimension", "3/7", "--depth", "0"]).status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    let o = run(&["verify", "--suite", "iterate", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("iterate:"));
    let o = run(&["verify", "--suite", "tuning", "--samples", "20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    // The depth-22 cylinder estimate misses the 0.02 tolerance for 7/12 and 1/6.
    let o = run(&["verify", "--suite", "survivor", "--samples", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL survivor |log 2 dim - h| at 7/12, 6142 cylinders"));
}
