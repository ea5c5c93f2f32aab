use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dsac_cli::{cmd_channel, cmd_eval_ber, cmd_train, load_config, CliError, System};

fn smoke() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.json")
}

fn dsac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsac")).args(args).output().unwrap()
}

#[test]
fn channel_outputs_are_reproducible() {
    let config = load_config(&smoke(), None, None).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = cmd_channel(&config, a.path()).unwrap();
    let mb = cmd_channel(&config, b.path()).unwrap();
    assert_eq!(ma.outputs, mb.outputs);
    for name in ["response.csv", "impulse.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    let impulse = fs::read_to_string(a.path().join("impulse.csv")).unwrap();
    assert_eq!(impulse.lines().filter(|l| !l.starts_with('#')).count(), 1 + config.l);
}

#[test]
fn ofdm_sweep_is_reproducible_and_seed_sensitive() {
    let config = load_config(&smoke(), None, Some("2:2:6")).unwrap();
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_eval_ber(&config, System::Ofdm, None, a.path()).unwrap();
    cmd_eval_ber(&config, System::Ofdm, None, b.path()).unwrap();
    let other = load_config(&smoke(), Some(9), Some("2:2:6")).unwrap();
    cmd_eval_ber(&other, System::Ofdm, None, c.path()).unwrap();
    let read = |d: &tempfile::TempDir| fs::read_to_string(d.path().join("ber.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(read(&a).lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn manifest_records_alpha_and_hash() {
    let mut config = load_config(&smoke(), None, None).unwrap();
    config.alpha = 0.005;
    let dir = tempfile::tempdir().unwrap();
    let manifest = cmd_train(&config, dir.path(), |_| {}).unwrap();
    assert_eq!(manifest.alpha, 0.005);
    let text = fs::read_to_string(dir.path().join("train_manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["alpha"], 0.005);
    assert_eq!(json["config_hash"], config.hash());
    let report = fs::read_to_string(dir.path().join("train_report.csv")).unwrap();
    assert!(report.starts_with(&format!("# config_hash: {}", config.hash())));
}

#[test]
fn model_for_another_geometry_is_rejected() {
    let config = load_config(&smoke(), None, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cmd_train(&config, dir.path(), |_| {}).unwrap();
    let model = dir.path().join("model.json");

    let mut shifted = config.clone();
    shifted.drillstring.n_pipes += 1;
    shifted.drillstring.n_joints += 1;
    let err = cmd_eval_ber(&shifted, System::Ae, Some(&model), dir.path()).unwrap_err();
    assert_eq!(err.kind(), "model_mismatch", "{err}");

    let mut wider = config.clone();
    wider.m = 80;
    wider.n = 64;
    assert!(cmd_eval_ber(&wider, System::Ae, Some(&model), dir.path()).is_err());
}

#[test]
fn ae_without_model_is_a_usage_error() {
    let config = load_config(&smoke(), None, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_eval_ber(&config, System::Ae, None, dir.path()).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn bad_config_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(smoke()).unwrap()).unwrap();
    value["u"] = serde_json::json!(0);
    fs::write(&path, value.to_string()).unwrap();
    let out = dsac(&["channel", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains('u'));

    fs::write(&path, "{ \"m\": 72, ").unwrap();
    let out = dsac(&["channel", "--config", path.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("line"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.json");
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(smoke()).unwrap()).unwrap();
    value["carrier"] = serde_json::json!(900.0);
    fs::write(&path, value.to_string()).unwrap();
    assert!(load_config(&path, None, None).is_err());
}
