use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env_remove("CASIMIR_WORKERS")
        .output()
        .expect("binary runs")
}

fn record(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn ok(args: &[&str]) -> Value {
    let out = casimir(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    record(&out)
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn pair_closed_record_has_schema_fields() {
    let rec = ok(&["pair", "--r", "1", "--alpha", "1", "--route", "closed"]);
    assert_eq!(rec["schema_version"], 1);
    assert!(rec["diagnostics"].is_object());
    assert_eq!(rec["inputs"]["job"]["command"], "pair");
    let v = rec["results"]["value"].as_f64().unwrap();
    assert!((v + 23.0 / (4.0 * PI)).abs() < 1e-15);
    assert!((v + 1.830_28).abs() < 1e-5);
}

#[test]
fn pair_routes_agree() {
    let closed = ok(&["pair", "--r", "2", "--alpha", "0.5", "--route", "closed"])["results"]["value"]
        .as_f64()
        .unwrap();
    let rspace = ok(&["pair", "--r", "2", "--alpha", "0.5", "--route", "rspace"])["results"]["value"]
        .as_f64()
        .unwrap();
    let cold = ok(&["pair", "--r", "2", "--alpha", "0.5", "--beta", "2e6", "--route", "rspace"])["results"]["value"]
        .as_f64()
        .unwrap();
    let kspace = ok(&["pair", "--r", "2", "--alpha", "0.5", "--route", "kspace"])["results"]["value"]
        .as_f64()
        .unwrap();
    assert!(((rspace - closed) / closed).abs() < 1e-8);
    assert!(((cold - closed) / closed).abs() < 1e-4);
    assert!(((kspace - closed) / closed).abs() < 1e-3);
}

#[test]
fn energies_scale_with_units() {
    let base = ok(&["pair", "--r", "1", "--alpha", "1", "--route", "closed"])["results"]["value"]
        .as_f64()
        .unwrap();
    let scaled = ok(&[
        "--hbar-c", "3", "--length-unit", "2", "pair", "--r", "1", "--alpha", "1", "--route", "closed",
    ])["results"]["value"]
        .as_f64()
        .unwrap();
    assert!((scaled - 1.5 * base).abs() < 1e-15 * base.abs());
}

#[test]
fn self_energy_value() {
    let rec = ok(&["self-energy", "--gamma", "0.1", "--volume", "1", "--lambda", "1"]);
    let v = rec["results"]["value"].as_f64().unwrap();
    assert!((v + 0.3 / (2.0 * PI * PI)).abs() < 1e-16);
    assert_eq!(rec["results"]["included_in_sphere_energy"], false);
}

#[test]
fn sphere_hardcore_fit_matches_prediction() {
    let rec = ok(&["sphere", "--a", "1", "--eps-minus-1", "0.1", "--cutoff", "hardcore:1e-3", "--fit"]);
    let res = &rec["results"];
    let fitted = res["fit"]["fitted"]["finite_1_over_a"].as_f64().unwrap_or_else(|| panic!("{res}"));
    let theory = res["prediction"]["finite_theory"].as_f64().unwrap();
    assert!(((fitted - theory) / theory).abs() < 1e-2);
    assert!((theory - 23.0 * 0.01 / (1536.0 * PI)).abs() < 1e-18);
}

#[test]
fn round_trip_replay_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["pair", "--r", "0.7", "--alpha", "1.3", "--beta", "5"],
        &["sphere", "--a", "1", "--eps-minus-1", "0.05", "--cutoff", "hardcore:0.001"],
        &["self-energy", "--gamma", "0.2", "--volume", "3", "--lambda", "0.5"],
        &["dielectric", "--theta", "0", "--rho-alpha", "0.02"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let path = dir.path().join(format!("rec{i}.json"));
        let p = path.to_str().unwrap();
        let mut full = vec!["-o", p];
        full.extend_from_slice(args);
        let out = casimir(&full);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let first: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let again = ok(&["replay", p]);
        assert_eq!(first, again, "{args:?}");
        // results must agree to the last bit, not just after JSON parsing
        assert_eq!(first["results"].to_string(), again["results"].to_string());
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# units\nhbar_c = 2\nrel_tol = 1e-9\n").unwrap();
    let c = cfg.to_str().unwrap();
    let rec = ok(&["--config", c, "pair", "--r", "1", "--alpha", "1", "--route", "closed"]);
    assert_eq!(rec["inputs"]["settings"]["hbar_c"], 2.0);
    assert_eq!(rec["inputs"]["settings"]["rel_tol"], 1e-9);
    let rec = ok(&["--config", c, "--hbar-c", "5", "pair", "--r", "1", "--alpha", "1", "--route", "closed"]);
    assert_eq!(rec["inputs"]["settings"]["hbar_c"], 5.0);

    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let out = casimir(&["--config", c, "pair", "--r", "1", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2_with_machine_readable_error() {
    let bad: [&[&str]; 5] = [
        &["pair", "--r", "-1", "--alpha", "1"],
        &["pair", "--alpha", "1"],
        &["pair", "--r", "1", "--alpha", "1", "--bogus"],
        &["sweep", "--vary", "a=", "--eps-minus-1", "0.1"],
        &["sweep", "--vary", "a=1,2", "--vary", "r_min=1e-3,1e-2", "--vary", "eps_minus_1=0.1,0.2"],
    ];
    for args in bad {
        let out = casimir(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = casimir(&["pair", "--r", "-1", "--alpha", "1"]);
    let rec = record(&out);
    assert_eq!(rec["error"]["exit_code"], 2);
    assert!(rec["error"]["kind"].is_string());
    assert!(!out.stderr.is_empty());
}

#[test]
fn numerical_failure_exits_1() {
    // a Matsubara cap far too small for a cold sum
    let out = casimir(&["--max-index", "10", "pair", "--r", "1", "--alpha", "1", "--beta", "1e6"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let rec = record(&out);
    assert_eq!(rec["error"]["exit_code"], 1);
}

#[test]
fn sweep_over_a_scales_as_one_over_a() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let out = casimir(&[
        "-o",
        path.to_str().unwrap(),
        "sweep",
        "--vary",
        "a=0.5,1,2,4",
        "--eps-minus-1",
        "0.1",
        "--cutoff",
        "hardcore:1e-3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&path);
    assert_eq!(rows.len(), 4);
    let ia = column(&header, "a");
    let ifit = column(&header, "finite_fitted");
    let products: Vec<f64> = rows
        .iter()
        .map(|r| r[ia].parse::<f64>().unwrap() * r[ifit].parse::<f64>().unwrap())
        .collect();
    let c = products.iter().sum::<f64>() / 4.0;
    for p in &products {
        assert!(((p - c) / c).abs() < 1e-3, "{products:?}");
    }
    // rows in grid order
    let a: Vec<f64> = rows.iter().map(|r| r[ia].parse().unwrap()).collect();
    assert_eq!(a, vec![0.5, 1.0, 2.0, 4.0]);
}

#[test]
fn r_min_sweep_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rmin.csv");
    let summary = dir.path().join("fit.json");
    let out = casimir(&[
        "-o",
        path.to_str().unwrap(),
        "sweep",
        "--vary",
        "r_min=1e-4:1e-2:9:log",
        "--a",
        "1",
        "--eps-minus-1",
        "0.1",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&path);
    assert_eq!(rows.len(), 9);
    for name in ["total", "c_vol", "c_surf", "c_lin", "finite_1_over_a"] {
        column(&header, name);
    }
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let text = rec.to_string();
    let theory = 23.0 * 0.01 / (1536.0 * PI);
    let fitted = find_number(&rec, "finite_1_over_a").unwrap_or_else(|| panic!("{text}"));
    assert!(((fitted - theory) / theory).abs() < 1e-2);
}

fn find_number(v: &Value, key: &str) -> Option<f64> {
    match v {
        Value::Object(m) => m
            .get(key)
            .and_then(Value::as_f64)
            .or_else(|| m.values().find_map(|x| find_number(x, key))),
        Value::Array(a) => a.iter().find_map(|x| find_number(x, key)),
        _ => None,
    }
}

#[test]
fn two_dimensional_pair_sweep_is_ordered_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("one.csv");
    let p2 = dir.path().join("two.csv");
    let args = |p: &Path| {
        vec![
            "-o".to_string(),
            p.to_str().unwrap().to_string(),
            "sweep".into(),
            "--vary".into(),
            "r=0.5,1,2".into(),
            "--vary".into(),
            "beta=0.1:10:3:log".into(),
            "--alpha".into(),
            "1".into(),
        ]
    };
    let a1 = args(&p1);
    let a2 = args(&p2);
    let o1 = casimir(&a1.iter().map(String::as_str).collect::<Vec<_>>());
    let o2 = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(&a2)
        .env("CASIMIR_WORKERS", "1")
        .output()
        .unwrap();
    assert!(o1.status.success() && o2.status.success());
    let t1 = std::fs::read_to_string(&p1).unwrap();
    assert_eq!(t1, std::fs::read_to_string(&p2).unwrap());
    let (header, rows) = csv_rows(&p1);
    assert_eq!(rows.len(), 9);
    let ir = column(&header, "r");
    let ib = column(&header, "beta");
    let iv = column(&header, "value");
    let first: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[ir].parse().unwrap(), r[ib].parse().unwrap()))
        .collect();
    let mut sorted = first.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert_eq!(first, sorted);
    // a colder pair at fixed r is never more strongly bound than a warmer one
    for chunk in rows.chunks(3) {
        let v: Vec<f64> = chunk.iter().map(|r| r[iv].parse().unwrap()).collect();
        assert!(v[0] <= v[1] && v[1] <= v[2], "{v:?}");
    }
}

#[test]
fn verify_suites_pass() {
    for suite in ["kernels", "matsubara", "dielectric", "self-energy"] {
        let out = casimir(&["verify", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn verify_table_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("oracle.csv");
    let out = casimir(&["verify", "kernels", "--table", table.to_str().unwrap()]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&table);
    assert_eq!(rows.len(), 100);
}
