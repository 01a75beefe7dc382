//! Acceptance: fixed-seed runs are byte-identical regardless of the worker
//! count (criterion 10 of the suite; 1–9 live in the library crate).

use std::process::Command;

fn mtcf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtcf"))
}

#[test]
fn criterion_10_csv_determinism_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    std::fs::write(
        &cfg,
        r#"{
  "system": {
    "hamiltonian": {"qubit_omega": 2.0},
    "coupling": "sigma_z",
    "coupling_scale": 1.0,
    "psi0": [[0.3779644730092272, 0.7559289460184544],
             [0.3779644730092272, 0.3779644730092272]]
  },
  "bath": {"modes": [{"g": [1.0, 0.0], "omega": 6.0},
                     {"g": [1.0, 0.0], "omega": 2.0}]},
  "observables": ["sigma_x", "sigma_z"],
  "times": {"grid": {"t": 0.0, "t_prime_start": 0.0, "t_prime_end": 1.0, "step": 0.1}},
  "method": {"mc": {"n_traj": 2000, "seed": 314159, "dt": 0.002, "o_strategy": "commuting"}}
}"#,
    )
    .unwrap();

    let mut outputs = Vec::new();
    for threads in ["1", "4", "1"] {
        let out = dir.path().join(format!("run_{threads}_{}.csv", outputs.len()));
        let status = mtcf()
            .arg("run")
            .arg(&cfg)
            .arg("--threads")
            .arg(threads)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    let identical = outputs[0] == outputs[1] && outputs[1] == outputs[2];
    println!(
        "[{}] criterion 10: fixed-seed runs byte-identical across --threads 1/4 ({} bytes)",
        if identical { "PASS" } else { "FAIL" },
        outputs[0].len()
    );
    assert!(identical, "CSV output differed between thread counts");
}
