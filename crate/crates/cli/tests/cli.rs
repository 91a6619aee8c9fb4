use std::process::{Command, Output};

fn phasecap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasecap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn refs_json_round_trip() {
    let out = phasecap(&["refs", "--snr-db", "20", "--sigma-delta-sq", "1e-3"]);
    let v = stdout_json(&out);
    assert!((v["c_awgn"].as_f64().unwrap() - 101.0_f64.log2()).abs() < 1e-9);
    assert!((v["crossover_snr_db"].as_f64().unwrap() - 30.0).abs() < 3.0);
    assert!((v["sigma_w_sq"].as_f64().unwrap() - 5e-3).abs() < 1e-15);
}

#[test]
fn refs_csv_has_header() {
    let out = phasecap(&[
        "refs", "--snr-db", "10", "--sigma-delta-sq", "1e-2", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("snr_db,c_awgn,c_lapidoth,crossover_snr_db\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn solve_aux_matches_published_row() {
    let out = phasecap(&["solve-aux", "--sigma-delta-sq", "1e-3", "--sigma-w-sq", "5e-4"]);
    let v = stdout_json(&out);
    assert!((v["alpha_u"].as_f64().unwrap() - 0.05).abs() < 0.01);
    assert!((v["beta_u"].as_f64().unwrap() - 0.73).abs() < 0.01);
}

#[test]
fn config_errors_exit_2() {
    // neither noise flag
    let out = phasecap(&["solve-aux", "--sigma-delta-sq", "1e-3"]);
    assert_eq!(out.status.code(), Some(2));
    // both noise flags (clap conflict)
    let out = phasecap(&[
        "solve-aux", "--sigma-delta-sq", "1e-3", "--sigma-w-sq", "5e-4", "--snr-db", "30",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // unknown flag
    let out = phasecap(&["refs", "--nonsense", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // negative variance is a config error
    let out = phasecap(&["solve-aux", "--sigma-delta-sq", "1e-3", "--sigma-w-sq", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn module_errors_exit_1() {
    // sigma_delta_sq = 0 makes the high-SNR reference diverge
    let out = phasecap(&["refs", "--snr-db", "20", "--sigma-delta-sq", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_input_emits_block_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocks.csv");
    let out = phasecap(&[
        "sample-input",
        "--sigma-delta-sq", "1e-3",
        "--sigma-w-sq", "5e-2",
        "--m", "2",
        "--blocks", "50",
        "--seed", "3",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "block,r1,r2,theta1,theta2");
    assert_eq!(lines.count(), 50);
    // deterministic in the seed
    let again = phasecap(&[
        "sample-input",
        "--sigma-delta-sq", "1e-3",
        "--sigma-w-sq", "5e-2",
        "--m", "2",
        "--blocks", "50",
        "--seed", "3",
    ]);
    assert_eq!(String::from_utf8_lossy(&again.stdout).trim(), text.trim());
}

#[test]
fn lower_bound_gaussian_small_run() {
    let out = phasecap(&[
        "lower-bound",
        "--snr-db", "10",
        "--sigma-delta-sq", "1e-3",
        "--input", "gaussian",
        "--particles", "1000",
        "--uses", "200",
        "--seed", "4",
    ]);
    let v = stdout_json(&out);
    let bits = v["bits_per_use"].as_f64().unwrap();
    assert!(bits > 0.0 && bits < 11.0_f64.log2() + 1.0, "bits {bits}");
    assert!(v["std_err"].as_f64().unwrap() > 0.0);
    assert_eq!(v["input"], "gaussian");
}

#[test]
fn sweep_runs_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "[sweep]\nname = t\nsnr_db = 0, 10\nsigma_delta_sq = 1e-3\nbounds = c_u_tilde\n",
    )
    .unwrap();
    let prefix = dir.path().join("out_");
    let out = phasecap(&[
        "sweep",
        "--config", cfg.to_str().unwrap(),
        "--out", prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out_t.csv")).unwrap();
    assert!(csv.starts_with(
        "snr_db,c_awgn,c_lapidoth,c_u,c_u_tilde,lb_m2,lb_m2_stderr,lb_m3,lb_m3_stderr"
    ));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out_t.json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["name"], "t");
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);

    // malformed config exits 2
    std::fs::write(&cfg, "[sweep]\nsnr_db = 0\n").unwrap();
    let out = phasecap(&[
        "sweep",
        "--config", cfg.to_str().unwrap(),
        "--out", prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // missing config file exits 2
    let out = phasecap(&["sweep", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crossover_subcommand() {
    let out = phasecap(&["crossover", "--sigma-delta-sq", "1e-2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let val: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((17.0..=23.0).contains(&val), "crossover {val}");
}
