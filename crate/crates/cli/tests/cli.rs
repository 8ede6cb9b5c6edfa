use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str], config: Option<&Path>, env_tol: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_palais-lab"));
    cmd.args(args).env_remove("PALAIS_LAB_TOL");
    if let Some(path) = config {
        cmd.arg("--config").arg(path);
    }
    if let Some(tol) = env_tol {
        cmd.env("PALAIS_LAB_TOL", tol);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, name: &str, value: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn params_config(a: u32, b: u32, m: u32, n: u32, f: Value, g: Value) -> Value {
    json!({ "version": 1, "params": { "a": a, "b": b, "m": m, "n": n, "f": f, "g": g } })
}

#[test]
fn classify_unit_g_is_univalent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &params_config(2, 1, 1, 1, json!([]), json!([[0, 1.0, 0.0]])));
    let out = run(&["classify"], Some(&cfg), None);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"]["status"], "univalent");
}

#[test]
fn classify_quadratic_g_names_the_homogeneous_component() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &params_config(2, 1, 1, 1, json!([]), json!([[2, 1.0, 0.0]])));
    let out = run(&["classify"], Some(&cfg), None);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    let failed: Vec<&str> = v["verdict"]["reasons"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"homogeneous component l=2"), "{failed:?}");
    assert!(v["witness"]["integral"].is_array());
}

#[test]
fn classify_degenerate_exponents_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &params_config(1, 1, 1, 1, json!([]), json!([[0, 1.0, 0.0]])));
    assert_eq!(code(&run(&["classify"], Some(&cfg), None)), 2);
}

#[test]
fn monodromy_sigma1_is_the_identity() {
    let out = run(&["monodromy", "--generator", "sigma1"], None, None);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!(v["error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["generator"], "sigma1");
}

#[test]
fn monodromy_sigma2_basic_pair_translates_s_by_two_pi_i() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &params_config(2, 1, 1, 1, json!([]), json!([[0, 1.0, 0.0]])));
    let out = run(&["monodromy", "--generator", "sigma2"], Some(&cfg), None);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let closed = &v["closed_form"];
    assert_eq!(closed[0], json!([0.0, 0.0]));
    assert!((closed[1][1].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-15);
    assert_eq!(v["numeric"][1]["classification"], "translation");
}

#[test]
fn monodromy_holonomy_is_parabolic_when_f0_is_nonzero() {
    let out = run(&["monodromy", "--generator", "holonomy_D"], None, None);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["numeric"][0]["classification"], "parabolic");
    let c = &v["closed_form"];
    for i in 0..2 {
        assert!((c["c"][i].as_f64().unwrap() - c["fitted_c"][i].as_f64().unwrap()).abs() <= 1e-8);
    }
}

#[test]
fn monodromy_reports_missing_cylinder_as_input_error() {
    // g(0) = 0: S_y carries no translation
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &params_config(2, 1, 1, 1, json!([]), json!([[1, 1.0, 0.0]])));
    assert_eq!(code(&run(&["monodromy", "--generator", "sy"], Some(&cfg), None)), 2);
}

#[test]
fn leafspace_emits_table_and_json() {
    let out = run(&["leafspace", "--format", "table"], None, None);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("stratum | condition"));
    assert!(table.contains("C/<s -> s + 3.141593i>"));
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["leafspace", "--out", dir.path().to_str().unwrap()], None, None);
    assert_eq!(code(&out), 0);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("leafspace.json")).unwrap()).unwrap();
    assert_eq!(written, stdout_json(&out));
    assert_eq!(written["strata"].as_array().unwrap().len(), 4);
}

#[test]
fn witness_finds_all_connecting_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("w");
    let out = run(
        &["witness-prop26", "--epsilon", "0.5", "--delta", "0.1,0.05,0.01", "--out", out_dir.to_str().unwrap()],
        None,
        None,
    );
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let leaves = v["u2"].as_array().unwrap();
    assert_eq!(leaves.len(), 3);
    for l in leaves {
        assert!((l["t_star"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() <= 1e-6);
    }
    assert_eq!(v["non_hausdorff_witness"], true);
    for i in 0..3 {
        let csv = std::fs::read_to_string(out_dir.join(format!("merging_leaf_{i}.csv"))).unwrap();
        assert!(csv.starts_with("k,re_0,im_0,re_1,im_1,re_2,im_2,local_error\n"));
    }
}

#[test]
fn witness_csv_headers_are_stable() {
    let header = |out: &Output| String::from_utf8(out.stdout.clone()).unwrap().lines().next().unwrap().to_string();
    let a = run(&["witness-prop26", "--format", "csv"], None, None);
    let b = run(&["witness-prop26", "--format", "csv", "--delta", "0.05,0.02"], None, None);
    assert_eq!(header(&a), "delta,c,t_star,endpoint_error,max_radius_sq,inside_ball,max_h_drift");
    assert_eq!(header(&a), header(&b));
}

#[test]
fn witness_u1_mode_reports_hausdorff_chart() {
    let out = run(&["witness-prop26", "--u1-mode"], None, None);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["hausdorff"], true);
    assert_eq!(v["u1"]["h_levels"].as_array().unwrap().len(), 4);
}

#[test]
fn witness_rejects_large_delta() {
    let out = run(&["witness-prop26", "--epsilon", "0.5", "--delta", "0.2"], None, None);
    assert_eq!(code(&out), 2);
    let out = run(&["witness-prop26", "--delta", "0.01,0.05"], None, None);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_all_default_passes_every_criterion() {
    let out = run(&["verify-all"], None, None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 12);
    assert!(criteria.iter().all(|c| c["passed"] == true && c["margin"].as_f64().is_none_or(|m| m >= 1.0)));
}

#[test]
fn verify_all_loose_ode_tolerance_stays_within_report_tol() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = params_config(2, 1, 1, 1, json!([]), json!([[0, 1.0, 0.0]]));
    cfg["tolerances"] = json!({ "ode_tol": 1e-5, "fit_tol": 1e-4, "report_tol": 1e-4 });
    let path = write_config(dir.path(), "loose.json", &cfg);
    let out = run(&["verify-all"], Some(&path), None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["settings"]["ode_tol"], 1e-6);
    for c in v["criteria"].as_array().unwrap() {
        if c["bound"] == "at_most" && c["id"] != 10 {
            let measured = c["measured"].as_f64().unwrap();
            assert!(measured <= 1e-4, "{c}");
        }
    }
}

#[test]
fn verify_all_failure_names_the_first_criterion() {
    // a 1e-6 integrator cannot meet a 1e-8 agreement tolerance
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = params_config(2, 1, 1, 1, json!([]), json!([[0, 1.0, 0.0]]));
    cfg["tolerances"] = json!({ "ode_tol": 1e-5 });
    let path = write_config(dir.path(), "tight.json", &cfg);
    let out = run(&["verify-all"], Some(&path), None);
    assert_eq!(code(&out), 3);
    let v = stdout_json(&out);
    assert_eq!(v["passed"], false);
    let first = v["first_failure"].as_str().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("first failing criterion: {}", &first[..12])));
}

#[test]
fn corrupted_or_invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"version\": 1, \"params\": ").unwrap();
    assert_eq!(code(&run(&["verify-all"], Some(&broken), None)), 2);
    let mut cfg = params_config(2, 1, 1, 1, json!([]), json!([[0, 1.0, 0.0]]));
    cfg["version"] = json!(7);
    let wrong_version = write_config(dir.path(), "v.json", &cfg);
    assert_eq!(code(&run(&["classify"], Some(&wrong_version), None)), 2);
    cfg["version"] = json!(1);
    cfg["tolerances"] = json!({ "ode_tol": 1e-3 });
    let loose = write_config(dir.path(), "t.json", &cfg);
    assert_eq!(code(&run(&["classify"], Some(&loose), None)), 2);
    cfg["tolerances"] = json!({});
    cfg["extra"] = json!(1);
    let unknown = write_config(dir.path(), "u.json", &cfg);
    assert_eq!(code(&run(&["classify"], Some(&unknown), None)), 2);
    assert_eq!(code(&run(&["classify"], Some(&dir.path().join("missing.json")), None)), 2);
}

#[test]
fn tolerance_flag_and_environment_override_report_tol() {
    let out = run(&["monodromy"], None, Some("1e-6"));
    assert_eq!(stdout_json(&out)["report_tol"], 1e-6);
    let out = run(&["monodromy", "--tol", "1e-7"], None, Some("1e-6"));
    assert_eq!(stdout_json(&out)["report_tol"], 1e-7);
    assert_eq!(code(&run(&["monodromy"], None, Some("1e-20"))), 2);
    assert_eq!(code(&run(&["monodromy"], None, Some("tight"))), 2);
}
