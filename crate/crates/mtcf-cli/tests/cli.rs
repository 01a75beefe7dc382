//! Exit-code and file-format behavior of the `mtcf` binary.

use std::path::Path;
use std::process::Command;

fn mtcf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtcf"))
}

fn small_mc_config(seed: u64) -> String {
    format!(
        r#"{{
  "system": {{
    "hamiltonian": {{"qubit_omega": 2.0}},
    "coupling": "sigma_z",
    "coupling_scale": 1.0,
    "psi0": [[0.3779644730092272, 0.7559289460184544],
             [0.3779644730092272, 0.3779644730092272]]
  }},
  "bath": {{"modes": [{{"g": [1.0, 0.0], "omega": 6.0}},
                      {{"g": [1.0, 0.0], "omega": 2.0}}]}},
  "observables": ["sigma_x", "sigma_z"],
  "times": {{"grid": {{"t": 0.0, "t_prime_start": 0.0, "t_prime_end": 0.5, "step": 0.25}}}},
  "method": {{"mc": {{"n_traj": 100, "seed": {seed}, "dt": 0.005, "o_strategy": "commuting"}}}}
}}"#
    )
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn run_writes_expected_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sc.json");
    write(&cfg, &small_mc_config(5));
    let out = dir.path().join("out.csv");
    let status = mtcf().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("t,t_prime,re,im,stderr_re,stderr_im"));
    assert!(text.contains("# seed = 5"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 3);
}

#[test]
fn run_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sc.json");
    write(&cfg, &small_mc_config(7));
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        assert!(mtcf().arg("run").arg(&cfg).arg("--out").arg(out).status().unwrap().success());
    }
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn seed_env_variable_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sc.json");
    write(&cfg, &small_mc_config(7));
    let out_env = dir.path().join("env.csv");
    let out_cfg = dir.path().join("cfg.csv");
    assert!(mtcf()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_env)
        .env("MTCF_SEED", "99")
        .status()
        .unwrap()
        .success());
    assert!(mtcf().arg("run").arg(&cfg).arg("--out").arg(&out_cfg).status().unwrap().success());
    let env_text = std::fs::read_to_string(&out_env).unwrap();
    assert!(env_text.contains("# seed = 99"));
    assert_ne!(env_text, std::fs::read_to_string(&out_cfg).unwrap());
}

#[test]
fn missing_bath_block_exits_two_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(
        &cfg,
        r#"{
  "system": {
    "hamiltonian": {"qubit_omega": 2.0},
    "coupling": "sigma_z",
    "psi0": [[1.0, 0.0], [0.0, 0.0]]
  },
  "observables": ["sigma_z"],
  "times": {"list": [1.0]},
  "method": {"oracle": {"n_max": 4}}
}"#,
    );
    let out = mtcf().arg("run").arg(&cfg).arg("--out").arg(dir.path().join("x.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bath"), "stderr: {stderr}");
}

#[test]
fn invalid_json_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, "{\n  \"system\": [,]\n}");
    let out = mtcf().arg("run").arg(&cfg).arg("--out").arg(dir.path().join("x.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "stderr: {stderr}");
}

#[test]
fn compare_trace_with_itself_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sc.json");
    write(&cfg, &small_mc_config(3));
    let out = dir.path().join("t.csv");
    assert!(mtcf().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap().success());
    let res = mtcf()
        .arg("compare")
        .arg(&out)
        .arg(&out)
        .arg("--tol")
        .arg("1e-12")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("max |delta|: 0"), "stdout: {stdout}");
}

#[test]
fn compare_differing_traces_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write(
        &a,
        "t,t_prime,re,im,stderr_re,stderr_im\n0.0,1.0,0.5,0.0,0.0,0.0\n",
    );
    write(
        &b,
        "t,t_prime,re,im,stderr_re,stderr_im\n0.0,1.0,0.75,0.0,0.0,0.0\n",
    );
    let res = mtcf().arg("compare").arg(&a).arg(&b).arg("--tol").arg("0.1").output().unwrap();
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn compare_grid_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write(
        &a,
        "t,t_prime,re,im,stderr_re,stderr_im\n0.0,1.0,0.5,0.0,0.0,0.0\n",
    );
    write(
        &b,
        "t,t_prime,re,im,stderr_re,stderr_im\n0.0,2.0,0.5,0.0,0.0,0.0\n",
    );
    let res = mtcf().arg("compare").arg(&a).arg(&b).arg("--tol").arg("0.1").output().unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn preset_round_trips_and_unknown_name_fails() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig1a", "fig1b", "fig2", "fig3"] {
        let path = dir.path().join(format!("{name}.json"));
        assert!(mtcf().arg("preset").arg(name).arg("--out").arg(&path).status().unwrap().success());
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = mtcf::scenario::ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(cfg, mtcf::scenario::preset(name).unwrap());
    }
    let res = mtcf().arg("preset").arg("fig9").output().unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn fig1_preset_without_frequency_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1a.json");
    assert!(mtcf().arg("preset").arg("fig1a").arg("--out").arg(&path).status().unwrap().success());
    let res = mtcf()
        .arg("run")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("qubit_omega"));
}
