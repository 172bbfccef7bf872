use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

const CONFIG: &str = "prism_index = 1.5106\ntrials = 2000\nrepetitions = 100\nangle_steps = 6\n";

fn plasmosense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plasmosense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn angle_scan_writes_table_and_sidecar() {
    let dir = tempdir().unwrap();
    let config = write(dir.path(), "a.conf", CONFIG);
    let out_dir = dir.path().join("out");
    let out = plasmosense(&["angle-scan", "--config", &config, "--out", out_dir.to_str().unwrap(), "--raw"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("angle_scan: 12 rows"));
    assert!(stdout.contains("below shot-noise limit"));
    assert!(out_dir.join("angle_scan.csv").exists());
    assert!(out_dir.join("angle_scan.meta.json").exists());
    let samples = fs::read_to_string(out_dir.join("angle_scan_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 18 * 100);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempdir().unwrap();
    let config = write(dir.path(), "a.conf", CONFIG);
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let o = plasmosense(&[
            "concentration-scan",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert_eq!(code(&o), 0);
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("concentration_scan.meta.json")).unwrap()).unwrap();
        assert_eq!(meta["seed"].as_u64().unwrap().to_string(), seed);
        fs::read(out_dir.join("concentration_scan.csv")).unwrap()
    };
    assert_ne!(run("5", "a"), run("6", "b"));
    assert_eq!(run("5", "c"), run("5", "d"));
}

#[test]
fn zero_noise_flag() {
    let dir = tempdir().unwrap();
    let config = write(dir.path(), "a.conf", CONFIG);
    let out_dir = dir.path().join("z");
    let o = plasmosense(&["angle-scan", "--config", &config, "--out", out_dir.to_str().unwrap(), "--zero-noise"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out_dir.join("angle_scan.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let sd = rdr.headers().unwrap().iter().position(|h| h == "sd_t_total").unwrap();
    for rec in rdr.records() {
        assert!(rec.unwrap()[sd].parse::<f64>().unwrap() < 1e-12);
    }
}

#[test]
fn config_errors_exit_3() {
    let dir = tempdir().unwrap();
    let bad = write(dir.path(), "bad.conf", "prism_index = 1.51\ngold_thicknes_nm = 50\n");
    let o = plasmosense(&["angle-scan", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("gold_thicknes_nm") && err.contains("line 2"), "{err}");

    let mismatch = write(dir.path(), "m.conf", "prism_index = 1.51\nexperiment = calibrate\n");
    let o = plasmosense(&["angle-scan", "--config", &mismatch, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);

    let o = plasmosense(&["calibrate", "--config", &mismatch, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "missing input file is a config error");
}

#[test]
fn parse_errors_exit_4() {
    let dir = tempdir().unwrap();
    let config = write(dir.path(), "a.conf", CONFIG);
    let empty = write(dir.path(), "empty.csv", "");
    let o = plasmosense(&["calibrate", "--config", &config, "--out", dir.path().to_str().unwrap(), "--input", &empty]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 1"));
}

#[test]
fn non_convergence_exits_5_and_still_writes_outputs() {
    let dir = tempdir().unwrap();
    let scan_conf = write(dir.path(), "a.conf", CONFIG);
    let scan_dir = dir.path().join("scan");
    assert_eq!(code(&plasmosense(&["angle-scan", "--config", &scan_conf, "--out", scan_dir.to_str().unwrap()])), 0);
    let tight = write(dir.path(), "t.conf", &format!("{CONFIG}fit_max_iterations = 1\n"));
    let cal_dir = dir.path().join("cal");
    let input = scan_dir.join("angle_scan.csv");
    let o = plasmosense(&[
        "calibrate",
        "--config",
        &tight,
        "--out",
        cal_dir.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(cal_dir.join("calibrate.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["calibration"]["converged"], false);

    let o = plasmosense(&[
        "calibrate",
        "--config",
        &scan_conf,
        "--out",
        cal_dir.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn rejected_computation_exits_6() {
    let dir = tempdir().unwrap();
    let config = write(dir.path(), "a.conf", CONFIG);
    let three = write(dir.path(), "three.csv", "label,angle_deg,t_prism\nw,67,0.3\nw,67.5,0.1\nw,68,0.2\n");
    let o = plasmosense(&["calibrate", "--config", &config, "--out", dir.path().to_str().unwrap(), "--input", &three]);
    assert_eq!(code(&o), 6);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&plasmosense(&["angle-scan"])), 2);
    assert_eq!(code(&plasmosense(&["sweep"])), 2);
}

#[test]
fn missing_config_file_is_io_error() {
    let o = plasmosense(&["angle-scan", "--config", "/nonexistent/x.conf"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stderr).unwrap().contains("/nonexistent/x.conf"));
}
