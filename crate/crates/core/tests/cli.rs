use std::path::Path;
use std::process::{Command, Output};

fn cdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdd")).args(args).output().unwrap()
}

fn simulate(path: &Path, n: usize, seed: u64) {
    let out = cdd(&[
        "simulate",
        "--family",
        "asymmetric",
        "--kappa",
        "8",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const QUICK: [&str; 8] = ["--n-boot", "200", "--n-iter", "2000", "--burn-in", "500", "--seed", "4"];

#[test]
fn simulate_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fgm.csv");
    let out = cdd(&[
        "simulate",
        "--family",
        "fgm",
        "--theta",
        "0.9",
        "--n",
        "50",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "U,V");
    assert_eq!(lines.len(), 51);
    for line in &lines[1..] {
        let xs: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(xs.iter().all(|x| *x > 0.0 && *x < 1.0));
    }
}

#[test]
fn analyze_text_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    simulate(&data, 120, 1);
    let mut args = vec!["analyze", "--input", data.to_str().unwrap(), "--pair", "U,V"];
    args.extend(QUICK);
    let out = cdd(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "Frequentist CDD",
        "LB(delta)",
        "Bayesian CDD",
        "rho2(U->V) > rho2(V->U)",
        "Direction summary",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn structured_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.tsv");
    simulate(&dir.path().join("tmp.csv"), 100, 2);
    let tsv = std::fs::read_to_string(dir.path().join("tmp.csv"))
        .unwrap()
        .replace(',', "\t");
    std::fs::write(&data, tsv).unwrap();
    let run = |name: &str| {
        let report = dir.path().join(name);
        let mut args = vec![
            "analyze",
            "--input",
            data.to_str().unwrap(),
            "--pair",
            "0:1",
            "--format",
            "structured",
            "--output",
            report.to_str().unwrap(),
        ];
        args.extend(QUICK);
        let out = cdd(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(report).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    simulate(&data, 60, 3);
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "input = {:?}\npairs = [\"U,V\"]\nmethod = \"bayesian\"\nn_iter = 1500\nburn_in = 500\nformat = \"structured\"\nseed = 1\n",
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = cdd(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "9",
        "--method",
        "frequentist",
        "--n-boot",
        "200",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["settings"]["seed"], 9);
    assert_eq!(json["settings"]["method"], "frequentist");
    assert_eq!(json["settings"]["n_iter"], 1500);
    assert!(json["records"][0]["bayesian"].is_null());
    assert!(json["records"][0]["frequentist"].is_object());
}

#[test]
fn chain_dump_written() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let dump = dir.path().join("chain.csv");
    simulate(&data, 60, 4);
    let out = cdd(&[
        "analyze",
        "--input",
        data.to_str().unwrap(),
        "--pair",
        "U,V",
        "--method",
        "bayesian",
        "--n-iter",
        "1500",
        "--burn-in",
        "500",
        "--thin",
        "2",
        "--kappa-mode",
        "link",
        "--chain-dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,direction,beta0,beta1,kappa,rho2"));
    // 500 retained draws per direction
    assert_eq!(lines.count(), 1000);
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    simulate(&data, 30, 5);
    let no_pairs = cdd(&["analyze", "--input", data.to_str().unwrap()]);
    assert_eq!(no_pairs.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_pairs.stderr).contains("no column pairs"));

    let bad_level = cdd(&[
        "analyze",
        "--input",
        data.to_str().unwrap(),
        "--pair",
        "U,V",
        "--level",
        "1.5",
    ]);
    assert_eq!(bad_level.status.code(), Some(2));

    let missing = cdd(&["analyze", "--input", "/nonexistent/x.csv", "--pair", "U,V"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn failing_pair_reported_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    simulate(&data, 40, 6);
    let out = cdd(&[
        "analyze",
        "--input",
        data.to_str().unwrap(),
        "--pair",
        "U,V",
        "--pair",
        "U,Nope",
        "--method",
        "frequentist",
        "--n-boot",
        "200",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["records"][0]["error"].is_null());
    assert!(json["records"][1]["error"].as_str().unwrap().contains("Nope"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Nope"));
}
