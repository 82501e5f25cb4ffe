//! End-to-end runs of the binary: exit codes, report shape and golden reports.
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

const MU3: &str = "(z*zbar-1)/(2 pi D)";

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn lab(args: &[&str]) -> (i32, String, String) {
    lab_env(args, &[])
}

fn lab_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fedosov-lab"));
    cmd.args(args).current_dir(dir().join("configs")).env_remove("FEDOSOV_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON report")
}

fn golden(name: &str, actual: &str) {
    let path = dir().join("golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

fn rows(v: &Value) -> &Vec<Value> {
    v["rows"].as_array().unwrap()
}

#[test]
fn diagram_levels_1_to_5_gives_15_passing_rows() {
    let (code, out, _) = lab(&["bt-verify", "--levels", "1..5", "--suite", "diagram", "--no-timings"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(rows(&v).len(), 15);
    assert!(rows(&v).iter().all(|r| r["status"] == "pass" && r["defect"] == "0"));
    assert_eq!(rows(&v)[0]["case"], "rot1 k=1");
    assert_eq!(rows(&v)[14]["case"], "rot3 k=5");
    golden("bt_verify_diagram.json", &out);
}

#[test]
fn all_identity_suites_pass_through_level_10() {
    let (code, out, _) = lab(&["bt-verify", "--levels", "1..10", "--format", "csv", "--no-timings"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "suite,case,status,defect");
    // 3 single-generator suites and 2 pair suites over 10 levels.
    assert_eq!(lines.len() - 1, 3 * 3 * 10 + 2 * 9 * 10);
    assert!(lines[1..].iter().all(|l| l.ends_with(",pass,0")));
}

#[test]
fn non_killing_without_force_is_an_error_row() {
    let (code, out, _) = lab(&["classify-degree1", "--f0", "(z^2+zbar^2)*z*zbar", "--no-timings"]);
    assert_eq!(code, 1);
    let v = json(&out);
    assert_eq!(rows(&v).len(), 1);
    assert_eq!(rows(&v)[0]["status"], "error");
    assert!(rows(&v)[0]["defect"].as_str().unwrap().starts_with("not-Killing"));
    assert_eq!(v["data"]["verdict"], "not-Killing");
    golden("classify_not_killing.json", &out);
}

#[test]
fn forced_non_killing_control_has_high_ybar_degree() {
    let (code, out, _) = lab(&["classify-degree1", "--f0", "(z^2+zbar^2)*z*zbar", "--force", "--no-timings"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["data"]["killing"], false);
    assert_eq!(v["data"]["verdict"], "not-degree-1");
    assert!(v["data"]["ybar_degree"].as_u64().unwrap() >= 2);
}

#[test]
fn killing_moment_is_degree_one() {
    let (code, out, _) = lab(&["classify-degree1", "--f0", MU3, "--no-timings"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["data"]["killing"], true);
    assert_eq!(v["data"]["ybar_degree"], 1);
    assert_eq!(v["data"]["hbar_degree"], 1);
    assert_eq!(v["data"]["verdict"], "degree-1");
}

#[test]
fn star_product_expansion() {
    let (code, out, _) = lab(&["star-product", "--geometry", "cp1-fs", "--alpha", "ricci", "--order", "6", "--f", "z/D", "--g", "zbar/D", "--no-timings"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let data = v["data"].as_object().unwrap();
    assert_eq!(data.keys().cloned().collect::<Vec<_>>(), ["order_0", "order_1", "order_2", "order_3"]);
    assert_eq!(data["order_0"], "(z*zbar)*D^-2");
    golden("star_product_cp1.json", &out);

    let (code, out, _) = lab(&["star-product", "--geometry", "flat:1", "--alpha", "zero", "--f", "z", "--g", "zbar", "--no-timings"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["data"]["order_0"], "z*zbar");
    assert_eq!(v["data"]["order_1"], "(-1)");
}

#[test]
fn asymptotics_needs_three_levels() {
    let (code, out, err) = lab(&["bt-asymptotics", "--f", MU3, "--g", MU3, "--levels", "8,16", "--order", "1"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("at least 3 levels"));
}

#[test]
fn asymptotic_slopes() {
    for (order, target) in [("0", -1.0), ("1", -2.0)] {
        let (code, out, _) = lab(&["bt-asymptotics", "--f", MU3, "--g", MU3, "--levels", "8,16,32,64", "--order", order]);
        assert_eq!(code, 0, "order {order}");
        let v = json(&out);
        let slope = v["data"]["slope"].as_f64().unwrap();
        assert!((slope - target).abs() <= 0.15, "slope {slope}");
        assert_eq!(rows(&v).len(), 5);
    }
    // Far from the asymptotic regime the fit misses its target: a fail row, exit 1.
    let (code, out, _) = lab(&["bt-asymptotics", "--f", MU3, "--g", MU3, "--levels", "1,2,3", "--format", "csv"]);
    assert_eq!(code, 1);
    assert!(out.lines().last().unwrap().starts_with("asymptotics,slope,fail,"));
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["star-product", "--f", "z/(1+z)", "--g", "z"],
        vec!["star-product", "--f", "z", "--g", "z", "--order", "2"],
        vec!["bt-verify", "--levels", "3,2"],
        vec!["bt-verify", "--geometry", "flat:1"],
        vec!["bt-verify", "--suite", "nope"],
        vec!["bt-verify", "--format", "xml"],
        vec!["moment-map", "--alpha", "zero"],
        vec!["classify-degree1"],
        vec!["quantum-hamiltonian", "--field", "rot9"],
        vec!["bt-verify", "--config", "bad_levels.toml"],
        vec!["bt-verify", "--config", "missing.toml"],
        vec!["no-such-command"],
    ] {
        let (code, out, _) = lab(&args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty(), "{args:?}");
    }
    let (code, _, err) = lab_env(&["bt-verify", "--levels", "1"], &[("FEDOSOV_LAB_THREADS", "zero")]);
    assert_eq!(code, 2);
    assert!(err.contains("FEDOSOV_LAB_THREADS"));
}

#[test]
fn parse_errors_report_a_column() {
    let (_, _, err) = lab(&["star-product", "--f", "z + w", "--g", "z"]);
    assert!(err.contains("column 5"), "{err}");
}

#[test]
fn reports_are_deterministic_and_thread_independent() {
    let args = ["report", "--config", "report.toml", "--no-timings"];
    let (c1, a, _) = lab(&args);
    let (c2, b, _) = lab_env(&args, &[("FEDOSOV_LAB_THREADS", "1")]);
    let (c3, c, _) = lab_env(&args, &[("FEDOSOV_LAB_THREADS", "4")]);
    assert_eq!((c1, c2, c3), (0, 0, 0));
    assert_eq!(a, b);
    assert_eq!(a, c);
    golden("report.json", &a);
}

#[test]
fn timings_present_unless_disabled() {
    let (_, out, _) = lab(&["bt-verify", "--levels", "1", "--suite", "tuynman"]);
    assert!(rows(&json(&out)).iter().all(|r| r["runtime_ms"].is_number()));
    let (_, out, _) = lab(&["bt-verify", "--levels", "1", "--suite", "tuynman", "--no-timings"]);
    assert!(!out.contains("runtime_ms"));
}

#[test]
fn flags_override_config_file() {
    let (code, out, _) = lab(&["report", "--config", "report.toml", "--commands", "bt-verify", "--levels", "4", "--suite", "diagram", "--no-timings"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["config"]["levels"], serde_json::json!([4]));
    assert_eq!(v["config"]["commands"], serde_json::json!(["bt-verify"]));
    assert_eq!(rows(&v).len(), 3);
}

#[test]
fn markdown_and_output_file() {
    let out_path = std::env::temp_dir().join(format!("fedosov-lab-{}.md", std::process::id()));
    let p = out_path.to_str().unwrap();
    let (code, out, err) = lab(&["moment-map", "--action", "su2", "--levels", "1..2", "--format", "md", "--output", p, "--no-timings"]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert!(err.contains("9 pass, 0 fail, 0 error"));
    let md = std::fs::read_to_string(&out_path).unwrap();
    std::fs::remove_file(&out_path).ok();
    assert!(md.contains("| suite | case | status | defect |"));
    assert!(md.contains("| homomorphism | rot1/rot2 | pass | 0 |"));
    assert!(md.contains("((3/2*i)*z*zbar + (-3/2*i))*D^-1"));
}

#[test]
fn exported_matrices_are_exact_strings() {
    let path = std::env::temp_dir().join(format!("fedosov-lab-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, _, _) = lab(&["bt-verify", "--levels", "2", "--suite", "toeplitz-beta", "--export-matrices", p]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    // β_2(ξ₃) is diagonal with entries i(b − 1).
    let rot3 = v["beta"].as_array().unwrap().iter().find(|b| b["generator"] == "rot3").unwrap();
    assert_eq!(rot3["matrix"], serde_json::json!([["(-1*i)", "0", "0"], ["0", "0", "0"], ["0", "0", "(1*i)"]]));
    assert_eq!(v["defects"].as_array().unwrap().len(), 3);
}

#[test]
fn quantum_hamiltonian_rejects_non_killing_fields() {
    let (code, out, _) = lab(&["quantum-hamiltonian", "--field", "rot3", "--no-timings"]);
    assert_eq!(code, 0);
    assert_eq!(rows(&json(&out)).len(), 3);
    let (code, out, _) = lab(&["quantum-hamiltonian", "--field", "ham:(z^2+zbar^2)*z*zbar", "--no-timings"]);
    assert_eq!(code, 1);
    assert!(rows(&json(&out))[0]["defect"].as_str().unwrap().starts_with("not-Killing"));
}

#[test]
fn jet_and_custom_alpha_files() {
    let (code, out, _) = lab(&["flatness-check", "--geometry", "jet:jet.toml", "--order", "4", "--f", "z*zbar", "--format", "csv"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = lab(&["star-product", "--geometry", "flat:1", "--alpha", "custom:alpha_zero.toml", "--f", "z", "--g", "zbar", "--format", "csv"]);
    assert_eq!(code, 0, "{out}");
}
