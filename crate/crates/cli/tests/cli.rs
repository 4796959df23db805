use std::path::Path;
use std::process::{Command, Output};

fn sfdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfdm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = sfdm(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_flag_value_is_a_usage_error() {
    assert_eq!(sfdm(&["jumps", "--n", "eight"]).status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_runtime_errors() {
    let out = sfdm(&["jumps", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    // delay beyond the prefix
    let out = sfdm(&["channel-nmse", "--n", "16", "--paths", "1,0,9.5,0", "--tcpp", "8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_round_trips_and_records_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synth.csv");
    let p = path.to_str().unwrap();
    let out = sfdm(&["synth", "--n", "16", "--alpha", "1.3", "--data", "random:7", "--oversample", "3", "--out", p]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# sfdm synth"));
    assert!(first.contains("n=16") && first.contains("alpha=1.3") && first.contains("seed=7"));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["t", "re", "im", "inst_freq"]);
    assert_eq!(rows.len(), 48);
    // every value is written so that reformatting reproduces the text
    let body: Vec<&str> = text.lines().skip(2).collect();
    for (line, row) in body.iter().zip(&rows) {
        let again: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        assert_eq!(*line, again.join(","));
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let args = ["evm-mc", "--n", "16", "--trials", "12", "--seed", "5", "--out", path.to_str().unwrap()];
        assert!(sfdm(&args).status.success());
        let summary = dir.path().join(name.replace(".csv", "_summary.csv"));
        texts.push((std::fs::read(&path).unwrap(), std::fs::read(summary).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
    let other = dir.path().join("c.csv");
    let args = ["evm-mc", "--n", "16", "--trials", "12", "--seed", "6", "--out", other.to_str().unwrap()];
    assert!(sfdm(&args).status.success());
    assert_ne!(std::fs::read(other).unwrap(), texts[0].0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("block.cfg");
    std::fs::write(&cfg, "# test block\nn = 8\nalpha = 0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = sfdm(&["jumps", "--config", cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n=8") && text.contains("alpha=0.5"));
    // alpha = 0.5 is continuous: no wrap carries a jump
    assert!(text.lines().skip(2).all(|l| l.ends_with(",0.0") || l.contains("e-")));
    let out = sfdm(&["jumps", "--config", cfg, "--n", "16"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n=16") && text.contains("alpha=0.5"));
}

#[test]
fn channel_nmse_reports_both_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nmse.csv");
    let args = ["channel-nmse", "--n", "32", "--paths", "1,0,2.0,0;0.3,0.1,3.0,0.01", "--out", path.to_str().unwrap()];
    assert!(sfdm(&args).status.success());
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["nmse", "delta_h_fro"]);
    // integer delays: both realizations give the same matrix
    assert!(rows[0][0] < 1e-20 && rows[0][1] < 1e-9);
}

#[test]
fn selftest_passes() {
    let out = sfdm(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn threads_flag_is_accepted() {
    let out = sfdm(&["--threads", "2", "jumps", "--n", "8"]);
    assert!(out.status.success());
}
