//! End-to-end runs of the `srng` binary.

use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "\
variant = iid
n = 3
pmf = 3/4 1/4
curves = variational, hellinger, e_gamma:2
delta = 0.1 0.3
gamma = 0.05 0.2
eps = 0.1 0.5
smooth = 0.1
m = 1 2 3 4
distortion = hamming
d = 0.05 0.2
";

fn srng(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srng")).args(args).arg("--config").arg(config).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn every_command_succeeds_on_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    for (cmd, files) in [
        ("analyze", &["spectrum.csv", "rates.json"][..]),
        ("construct", &["construct.csv", "smooth_set.csv", "traces.json"]),
        ("oracle", &["oracle.csv", "min_set.csv"]),
        ("rdp", &["rdp.csv", "rdp.json"]),
        ("sweep", &["sweep.csv"]),
    ] {
        let out = dir.path().join(cmd);
        let run = srng(&[cmd, "--out", out.to_str().unwrap()], &config);
        assert_eq!(run.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&run.stderr));
        for f in files {
            assert!(out.join(f).is_file(), "{cmd} did not write {f}");
        }
    }
}

#[test]
fn construct_rows_all_pass_the_sandwich() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let run = srng(&["construct"], &config);
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    let rows: Vec<&str> =
        stdout.lines().filter(|l| l.starts_with("variational,") || l.starts_with("hellinger,")).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{rows:#?}");
}

#[test]
fn bits_rescale_rates_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let read = |units: &str| {
        let out = dir.path().join(units);
        assert!(srng(&["analyze", "--units", units, "--out", out.to_str().unwrap()], &config).status.success());
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("rates.json")).unwrap()).unwrap();
        json.as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect::<Vec<f64>>()
    };
    let (nats, bits) = (read("nats"), read("bits"));
    assert_eq!(nats.len(), bits.len());
    for (a, b) in nats.iter().zip(&bits) {
        assert!((a / std::f64::consts::LN_2 - b).abs() < 1e-12);
    }
}

#[test]
fn float_mode_agrees_with_exact_mode() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let exact = srng(&["oracle"], &config);
    let float = srng(&["oracle", "--float"], &config);
    assert!(exact.status.success() && float.status.success());
    let column = |o: &Output| -> Vec<f64> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| l.contains(",variational,") || l.contains(",hellinger,"))
            .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
            .collect()
    };
    let (a, b) = (column(&exact), column(&float));
    assert!(!a.is_empty() && a.len() == b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn bad_config_exits_with_one_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "variant = iid\nn = 2\npmf = 1/2 1/3\n");
    let run = srng(&["analyze"], &config);
    assert_eq!(run.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&run.stderr).is_empty());

    let config = write_config(dir.path(), "variant = iid\nn = 2\npmf = 1/2 1/2\nwidth = 3\n");
    let run = srng(&["analyze"], &config);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn missing_config_is_an_error() {
    let run = Command::new(env!("CARGO_BIN_EXE_srng")).arg("analyze").output().unwrap();
    assert_eq!(run.status.code(), Some(1));
}
