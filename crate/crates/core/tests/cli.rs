use std::fs;
use std::process::{Command, Output};

use optoeit::cli::CSV_HEADER;

fn optoeit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optoeit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const FIG3: [&str; 8] = [
    "--preset",
    "weis",
    "--power-mw",
    "20",
    "--n",
    "5",
    "--temp-mk",
    "20",
];

#[test]
fn spectrum_csv_layout() {
    let mut args = vec!["spectrum"];
    args.extend(FIG3);
    args.extend(["--grid", "-1:1:11"]);
    let out = optoeit(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 12);
    let omegas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(omegas.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(omegas[0], -1.0);
    assert_eq!(omegas[10], 1.0);
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 5);
        let sum = fields[2] + fields[3] + fields[4];
        assert!((fields[1] - sum).abs() <= 1e-10 * fields[1].abs());
    }
    // parameters are echoed on stderr for CSV output
    let echo: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(echo["parameters"]["n_photons"], 5.0);
}

#[test]
fn spectrum_json_and_atomic_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.json");
    let mut args = vec!["spectrum"];
    args.extend(FIG3);
    args.extend([
        "--grid",
        "-0.5:0.5:5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    let out = optoeit(&args);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["stable"], true);
    assert!(v["rows"][2]["x_total"].as_f64().unwrap() > 0.0);
    assert_eq!(
        fs::read_dir(dir.path()).unwrap().count(),
        1,
        "no temp file left"
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    fs::write(
        &path,
        r#"{"preset": "weis", "power_mw": 10, "n": 5, "m": "zero", "temp_mk": 20}"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let base = optoeit(&["x0", "--config", cfg]);
    assert!(base.status.success());
    let v: serde_json::Value = serde_json::from_slice(&base.stdout).unwrap();
    assert_eq!(v["parameters"]["power_w"], 0.01);
    assert_eq!(v["parameters"]["m_correlation"], 0.0);
    let overridden = optoeit(&["x0", "--config", cfg, "--power-mw", "20"]);
    let v: serde_json::Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!(v["parameters"]["power_w"], 0.02);
}

#[test]
fn inline_parameters_roundtrip() {
    let out = optoeit(&["presets", "--format", "json"]);
    let list: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let weis = &list[0]["parameters"];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inline.json");
    fs::write(
        &path,
        serde_json::json!({ "parameters": weis, "power_mw": 20 }).to_string(),
    )
    .unwrap();
    let a = optoeit(&["x0", "--config", path.to_str().unwrap()]);
    let b = optoeit(&["x0", "--preset", "weis", "--power-mw", "20"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failures_exit_nonzero() {
    assert!(!optoeit(&["spectrum"]).status.success());
    let unknown = optoeit(&["x0", "--preset", "nope"]);
    assert!(!unknown.status.success());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("aspelmeyer"));
    assert!(
        !optoeit(&["x0", "--preset", "weis", "--n", "1", "--m", "5"])
            .status
            .success()
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"preset": "weis", "powr_mw": 3}"#).unwrap();
    assert!(!optoeit(&["x0", "--config", path.to_str().unwrap()])
        .status
        .success());

    let unstable = [
        "x0",
        "--preset",
        "weis",
        "--power-mw",
        "20",
        "--delta",
        "-3.2e8",
    ];
    assert!(!optoeit(&unstable).status.success());
    let mut allowed = unstable.to_vec();
    allowed.push("--allow-unstable");
    assert!(optoeit(&allowed).status.success());
}

#[test]
fn dip_and_stability_reports() {
    let mut args = vec!["dip"];
    args.extend(FIG3);
    let v: serde_json::Value = serde_json::from_slice(&optoeit(&args).stdout).unwrap();
    let width = v["dip"]["width_over_omega_m"].as_f64().unwrap();
    assert!((0.2..0.3).contains(&width), "{width}");

    let out = optoeit(&[
        "stability",
        "--preset",
        "weis",
        "--power-mw",
        "20",
        "--delta",
        "self-consistent:361719602.8828103",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let states = v["steady_states"].as_array().unwrap();
    assert_eq!(states.len(), 3);
    let stable: Vec<bool> = states
        .iter()
        .map(|s| s["stable"].as_bool().unwrap())
        .collect();
    assert_eq!(stable, [false, false, true]);
}

#[test]
fn verify_passes_for_presets() {
    for name in ["weis", "aspelmeyer"] {
        let out = optoeit(&["verify", "--preset", name]);
        assert!(out.status.success(), "{}", stdout(&out));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let mut args = vec!["spectrum"];
    args.extend(FIG3);
    let a = optoeit(&args);
    let b = optoeit(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1602);
}
