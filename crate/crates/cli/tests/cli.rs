use std::process::{Command, Output};

fn solvegeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvegeo")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().expect("number")).collect()).collect();
    (header, rows)
}

#[test]
fn period_of_sol_loop() {
    let o = solvegeo(&["period", "--alpha", "1", "--beta", "0.999"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["alpha", "beta", "x0", "period"]);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][3] - 4.44622).abs() < 5e-4, "{}", rows[0][3]);
}

#[test]
fn period_over_x0_range_as_json() {
    let o = solvegeo(&["period", "--alpha", "0.5", "--x0-range", "0.6:0.9:4", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let p: Vec<f64> = rows.iter().map(|r| r[3].as_f64().unwrap()).collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]), "periods increase with x0: {p:?}");
}

#[test]
fn alpha_table_has_ten_rows() {
    let o = solvegeo(&["table"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["alpha", "period", "pi_sqrt2_over_sqrt_alpha"]);
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0][0], 0.1);
    assert!((rows[0][1] - 14.0792).abs() < 5e-3);
    assert!(rows.iter().all(|r| r[1] > r[2]));
}

#[test]
fn verify_half_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = solvegeo(&["verify", "--alpha", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    for name in ["bounding_box", "boundary_monotone", "g_function_negative", "g_ratio_below_one", "half_period_zbar"] {
        let c = checks.iter().find(|c| c["check_name"] == name).unwrap_or_else(|| panic!("{name} missing"));
        assert_eq!(c["pass"], true, "{name}");
        assert_eq!(c["exploratory"], false, "{name}");
        assert!(c["worst_margin"].as_f64().unwrap() > 0.0);
        assert!(c["grid"].is_array() && c["location"].is_object());
    }
    let bars = checks.iter().find(|c| c["check_name"] == "half_period_end_bars_closed_values").unwrap();
    assert_eq!(bars["exploratory"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["period", "--alpha", "1", "--beta", "0.5", "--x0", "0.8"][..],
        &["period", "--alpha", "2", "--beta", "0.5"],
        &["period", "--beta", "0.5"],
        &["period", "--alpha", "1"],
        &["cutlocus", "--alpha", "0.5", "--x0-range", "0.6:0.9"],
        &["sphere", "--alpha", "0.5", "--res", "4,6"],
        &["g-function", "--alpha", "0.3"],
        &["table", "--format", "obj"],
        &["frobnicate"],
        &["period", "--alpha", "1", "--beta", "0.5", "--stray"],
    ] {
        let o = solvegeo(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["cutlocus", "--alpha", "0.5", "--samples", "12"];
    let a = solvegeo(&args);
    let b = solvegeo(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_solvegeo")).args(args).env("SOLVEGEO_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn csv_uses_twelve_significant_digits() {
    let o = solvegeo(&["g-function", "--samples", "3"]);
    let text = stdout(&o);
    let significant = |v: &str| {
        let mantissa = v.split('e').next().unwrap();
        mantissa.chars().filter(|c| c.is_ascii_digit()).collect::<String>().trim_start_matches('0').len()
    };
    let counts: Vec<usize> = text.lines().skip(1).flat_map(|l| l.split(',')).map(significant).collect();
    assert!(counts.iter().all(|&n| n <= 12), "{text}");
    assert!(counts.contains(&12), "{text}");
}

#[test]
fn sphere_writes_obj() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.obj");
    let o = solvegeo(&["sphere", "--alpha", "0.5", "--radius", "2", "--res", "4,8", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let (verts, faces) = solvegeo::sphere::parse_obj(&text).unwrap();
    assert_eq!(verts.len(), 4 * 8 + 2);
    assert_eq!(faces.len(), 8 * 2 + 3 * 8);
    assert!(text.starts_with("# solvegeo geodesic sphere\n# alpha 0.5 radius 2\n"));
}

#[test]
fn curve_commands_emit_expected_columns() {
    for (args, header) in [
        (&["cylinder", "--alpha", "0.5", "--beta", "0.7", "--samples", "8"][..], "w,z"),
        (&["flow", "--alpha", "0.5", "--x0", "0.8", "--samples", "5"], "t,u1,u2,u3,level"),
        (&["flowline", "--alpha", "0.75", "--x0", "0.8", "--samples", "5"], "x0,t,a,b,aprime,bprime"),
        (&["bprime", "--alpha", "0.5", "--beta", "0.5", "--samples", "5"], "x0,t,bprime"),
        (&["cutlocus", "--alpha", "1", "--samples", "5"], "x0,a,b,da,db"),
    ] {
        let o = solvegeo(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert_eq!(text.lines().next(), Some(header), "{args:?}");
        assert!(text.lines().count() > 5, "{args:?}");
    }
}

#[test]
fn flow_conserves_level() {
    let o = solvegeo(&["flow", "--alpha", "0.5", "--beta", "0.6", "--samples", "50"]);
    let (_, rows) = csv_rows(&stdout(&o));
    let h0 = rows[0][4];
    assert!(rows.iter().all(|r| (r[4] - h0).abs() < 1e-9));
    let last = rows.last().unwrap();
    assert!((last[1] - rows[0][1]).abs() < 1e-8 && (last[3] - rows[0][3]).abs() < 1e-8, "one period returns");
}
