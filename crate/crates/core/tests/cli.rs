use std::process::{Command, Output};

fn snrloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snrloss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_argument_errors() {
    assert_eq!(snrloss(&["--help"]).status.code(), Some(0));
    assert_eq!(snrloss(&["pfa", "--help"]).status.code(), Some(0));
    assert_eq!(snrloss(&[]).status.code(), Some(1));
    assert_eq!(snrloss(&["bogus"]).status.code(), Some(1));
    assert_eq!(snrloss(&["snr-loss", "--k", "x"]).status.code(), Some(1));
    assert_eq!(snrloss(&["snr-loss", "--mu", "-2"]).status.code(), Some(1));
    assert_eq!(
        snrloss(&["snr-loss", "--nu", "12", "--trials", "10"]).status.code(),
        Some(1)
    );
    assert_eq!(snrloss(&["snr-loss", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(
        snrloss(&["find-k", "--out", "/nonexistent-dir/x.csv"]).status.code(),
        Some(1)
    );
}

#[test]
fn numerical_failure_exit_code() {
    let o = snrloss(&["find-k", "--nu", "18", "--k-cap", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("40"));
}

#[test]
fn find_k_table() {
    let o = snrloss(&["find-k"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("nu,K,mean_at_K,mean_at_K_minus_1"));
    assert!(lines.next().unwrap().starts_with("gaussian,30,"));
    let nu18: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(nu18[0], "18");
    assert!((94..=98).contains(&nu18[1].parse::<u32>().unwrap()));
}

#[test]
fn output_is_deterministic_across_workers() {
    let args = [
        "snr-loss", "--k", "32", "--nu", "32", "--trials", "20000", "--path", "both", "--bins", "20",
    ];
    let one = snrloss(&[&args[..], &["--workers", "1"]].concat());
    let four = snrloss(&[&args[..], &["--workers", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let other_seed = snrloss(&[&args[..], &["--seed", "5"]].concat());
    assert_ne!(one.stdout, other_seed.stdout);
}

#[test]
fn json_and_file_output() {
    let dir = std::env::temp_dir().join(format!("snrloss-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mean.json");
    let o = snrloss(&[
        "mean-vs-k",
        "--k",
        "24,32",
        "--nu",
        "32",
        "--trials",
        "50000",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["K"], 32);
    assert!((rows[1]["gaussian"].as_f64().unwrap() - 18.0 / 33.0).abs() < 1e-15);
    assert!((rows[1]["analytic_nu32"].as_f64().unwrap() - rows[1]["mc_nu32"].as_f64().unwrap()).abs() < 0.003);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn distribution_subcommands_share_layout() {
    for cmd in ["snr-loss", "beta", "ttilde"] {
        let o = snrloss(&[
            cmd,
            "--k",
            "32",
            "--nu",
            "32",
            "--trials",
            "5000",
            "--bins",
            "10",
            "--snr-bar",
            "5",
        ]);
        assert!(o.status.success(), "{cmd}");
        let text = stdout(&o);
        let header = text.lines().next().unwrap();
        assert!(
            header.contains("cdf_K32_nu32") && header.contains("cdf_se_K32_gaussian"),
            "{header}"
        );
        assert_eq!(text.lines().count(), 12);
    }
}

#[test]
fn pfa_table() {
    let o = snrloss(&["pfa", "--k", "32", "--nu", "18,160", "--trials", "200000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let header = r.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let eta: f64 = rows[0][col("eta_K32")].parse().unwrap();
    assert!((eta - (10f64.powf(3.0 / 17.0) - 1.0)).abs() < 1e-15);
    let pfa: f64 = rows[0][col("pfa_K32")].parse().unwrap();
    assert!(pfa > 1e-2);
}

#[test]
fn verify_exit_codes() {
    let ok = snrloss(&["verify", "--k", "32", "--nu", "32"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("CHOSEN"));
    // 1000 trials cannot meet a 0.01 KS bound.
    let bad = snrloss(&["verify", "--k", "32", "--nu", "32", "--trials", "1000"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("FAIL"));
}
