use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CONSTANT: &str = r#"{
  "geometry": { "length": 1.0, "horizon": 0.3 },
  "grid": { "cells": 40 },
  "data": {
    "s0": { "family": "constant", "value": 1.0 },
    "s1": { "family": "constant", "value": 1.0 },
    "v_in": { "family": "constant", "value": 1.0 },
    "v_l": { "family": "constant", "value": 2.0 }
  },
  "output": { "stride": 5 }
}"#;

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.json");
    fs::write(&path, text).unwrap();
    path
}

fn fiberdraw(mode: &str, config: &Path, out: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fiberdraw"));
    cmd.arg(mode).arg("--config").arg(config).arg("--out").arg(out);
    if let Some(n) = threads {
        cmd.env("FIBERDRAW_THREADS", n);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_succeeds_and_writes_csv() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, CONSTANT);
    let out = dir.path().join("out");
    let o = fiberdraw("simulate", &config, &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let snapshots = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    let mut lines = snapshots.lines();
    assert_eq!(lines.next(), Some("t,x,A,v"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 1.0, 1.0]);

    let bounds = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert!(bounds.starts_with("t,check,bound,observed,margin,pass\n"));
    assert!(bounds.lines().skip(1).all(|l| l.ends_with(",true")));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("all checks passed"));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, CONSTANT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    fiberdraw("verify", &config, &a, Some("1"));
    fiberdraw("verify", &config, &b, Some("3"));
    for name in ["snapshots.csv", "series.csv", "bounds.csv", "iterates.csv", "report.txt", "config.resolved.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn resolved_config_reproduces_run() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, CONSTANT);
    let first = dir.path().join("first");
    fiberdraw("simulate", &config, &first, None);
    let second = dir.path().join("second");
    let o = fiberdraw("simulate", &first.join("config.resolved.json"), &second, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read(first.join("series.csv")).unwrap(),
        fs::read(second.join("series.csv")).unwrap()
    );
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &CONSTANT.replace(r#""stride": 5"#, r#""stride": 5, "strid": 2"#));
    let o = fiberdraw("simulate", &config, &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("output.strid"), "{}", stderr(&o));
}

#[test]
fn invalid_data_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let text = CONSTANT.replace(r#""value": 2.0"#, r#""value": 0.5"#);
    let config = write_config(&dir, &text);
    let o = fiberdraw("simulate", &config, &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ordering"), "{}", stderr(&o));
}

#[test]
fn missing_data_for_simulate() {
    let dir = TempDir::new().unwrap();
    let text = r#"{ "geometry": { "length": 1.0, "horizon": 1.0 }, "grid": { "cells": 20 } }"#;
    let config = write_config(&dir, text);
    let o = fiberdraw("simulate", &config, &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`data`"), "{}", stderr(&o));
}

#[test]
fn missing_config_file() {
    let dir = TempDir::new().unwrap();
    let o = fiberdraw("simulate", &dir.path().join("nope.json"), &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unconverged_fixed_point_exits_two() {
    let dir = TempDir::new().unwrap();
    let text = CONSTANT.replace(
        r#""output": { "stride": 5 }"#,
        r#""output": { "stride": 5 }, "tolerances": { "max_iter": 1 }"#,
    );
    let config = write_config(&dir, &text);
    let out = dir.path().join("out");
    let o = fiberdraw("picard", &config, &out, None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let iterates = fs::read_to_string(out.join("iterates.csv")).unwrap();
    assert_eq!(iterates.lines().count(), 3);
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("converged: false"));
}

#[test]
fn sweep_is_thread_count_independent() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, CONSTANT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = fiberdraw("sweep-delta", &config, &a, Some("1"));
    let ob = fiberdraw("sweep-delta", &config, &b, Some("4"));
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stdout));
    assert_eq!(ob.status.code(), Some(0));
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
}

#[test]
fn steady_mode_reports_drift() {
    let dir = TempDir::new().unwrap();
    let text = r#"{
      "geometry": { "length": 1.0, "horizon": 1.0 },
      "grid": { "cells": 50, "cfl": 2.0 },
      "steady": { "draw_ratio": 3.0, "residence_times": 2.0 },
      "output": { "stride": 50 }
    }"#;
    let config = write_config(&dir, text);
    let out = dir.path().join("out");
    let o = fiberdraw("steady", &config, &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("relative drift from the stationary profile"));
}

#[test]
fn converge_mode_writes_table() {
    let dir = TempDir::new().unwrap();
    let text = r#"{
      "geometry": { "length": 1.0, "horizon": 1.0 },
      "grid": { "cells": 20 },
      "converge": { "cells": [25, 50, 100], "residence_times": 1.0, "advection_t_end": 0.5 }
    }"#;
    let config = write_config(&dir, text);
    let out = dir.path().join("out");
    let o = fiberdraw("converge", &config, &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(table.starts_with("study,N,error,order\n"));
    assert_eq!(table.lines().count(), 7);
}
