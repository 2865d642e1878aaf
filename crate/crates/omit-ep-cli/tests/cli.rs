//! End-to-end checks of the binary: exit codes, output files, determinism.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omit-ep"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("omit-ep-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn usage_error_exits_1() {
    let status = bin().arg("spectrum").status().unwrap(); // missing required flags
    assert_eq!(status.code(), Some(1));
    let status = bin().args(["figure", "fig9z", "--out", "/dev/null"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = bin().arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn invalid_config_exits_2() {
    let cfg = tmp("bad.toml");
    let text = include_str!("../../../configs/default.toml").replace("gamma_a_hz = 6.43e6", "gamma_a_hz = -1.0");
    std::fs::write(&cfg, text).unwrap();
    let out = tmp("bad.csv");
    let status = bin()
        .args(["ep-scan", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn validate_passes_with_exit_0() {
    let report = tmp("report.txt");
    let output = bin().args(["validate", "--out"]).arg(&report).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stdout));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("overall: PASS"));
}

#[test]
fn spectrum_writes_expected_columns_and_is_deterministic() {
    let out1 = tmp("spec1.csv");
    let out2 = tmp("spec2.csv");
    for (out, workers) in [(&out1, "1"), (&out2, "4")] {
        let status = bin()
            .args(["spectrum", "--beta", "0.2", "--delta-p", "0.0:0.3:31", "--workers", workers, "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let text1 = std::fs::read_to_string(&out1).unwrap();
    let text2 = std::fs::read_to_string(&out2).unwrap();
    assert_eq!(text1, text2, "output depends on worker count");
    assert_eq!(
        text1.lines().next().unwrap(),
        "delta_p_over_omega_m,transmission,re_tp,im_tp,group_delay_s"
    );
    assert_eq!(text1.lines().count(), 32);
}

#[test]
fn map_emits_long_form_with_error_column() {
    let out = tmp("map.csv");
    let status = bin()
        .args([
            "map",
            "--axis1",
            "beta=0.1:0.5:3",
            "--axis2",
            "delta_p_over_omega_m=0.0:0.26:2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "beta,delta_p_over_omega_m,transmission,re_tp,im_tp,group_delay_s,eta,x_bar_m,n_bar,branch_count,error"
    );
    assert_eq!(text.lines().count(), 7); // header + 3 x 2 nodes
}

#[test]
fn figure_recipe_runs_and_mirrors_json() {
    let out = tmp("fig2b.csv");
    let status = bin()
        .args(["figure", "fig2b", "--json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "beta,delta_p_over_omega_m,transmission,re_tp,im_tp,group_delay_s"
    );
    assert_eq!(text.lines().count(), 1 + 3 * 901);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3 * 901);
    assert!(json[0].get("transmission").is_some());
}
