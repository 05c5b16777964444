use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use tempfile::TempDir;

fn spe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spe"))
        .args(args)
        .env_remove("SPE_OUTPUT_DIR")
        .output()
        .expect("spawn spe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

const CONSTANT_SPEC: &str = r#"{
  "dataset": {"kind": "constant_image", "size": 16, "value": 0.25},
  "encoder": {"kind": "pe", "octaves": 2},
  "model": {"hidden_widths": [16, 16], "seed": 1},
  "optim": {"iterations": 200, "learning_rate": 0.01}
}"#;

const SIGNAL_SPEC: &str = r#"{
  "dataset": {"kind": "signal1d", "n_samples": 32, "n_modes": 2, "max_frequency": 4},
  "encoder": {"kind": "spe", "octaves": 4},
  "model": {"hidden_widths": [16]},
  "optim": {"iterations": 20}
}"#;

/// Binary 8-bit PGM.
fn write_pgm(path: &Path, w: usize, h: usize, pixels: &[u8]) {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    fs::write(path, bytes).unwrap();
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["gen-data", "train", "compare", "spectrum", "theory-check", "metrics"] {
        let o = spe(&[sub, "--help"]);
        assert!(o.status.success(), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
    assert!(spe(&["--help"]).status.success());
}

#[test]
fn gen_data_signal_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = spe(&["gen-data", "--kind", "signal1d", "--seed", "7", "--output-dir", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("signal1d_seed7.csv")).unwrap()
    };
    let a = run("a");
    let text = String::from_utf8(a.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y"));
    assert_eq!(lines.count(), 256);
    assert_eq!(a, run("b"));
}

#[test]
fn gen_data_image_and_env_output_dir() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spe"))
        .args(["gen-data", "--kind", "image", "--size", "32"])
        .env("SPE_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = fs::read(dir.path().join("image_seed0.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n32 32\n255\n"));
}

#[test]
fn gen_data_invalid_kind_is_usage_error() {
    let o = spe(&["gen-data", "--kind", "audio"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_constant_smoke() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "spec.json", CONSTANT_SPEC);
    let out = dir.path().join("run");
    let start = Instant::now();
    let o = spe(&["train", "--config", s(&cfg), "--output-dir", s(&out)]);
    assert!(start.elapsed().as_secs() < 30);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("final train loss"));
    for name in ["report.json", "record.csv", "checkpoint.json", "spec.json", "prediction.pgm"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn zero_iteration_override_records_initial_eval_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "spec.json", CONSTANT_SPEC);
    let out = dir.path().join("run");
    let o = spe(&["train", "--config", s(&cfg), "--override", "optim.iterations=0", "--output-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("record.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = spe(&["train", "--config", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));

    let cfg = write_config(dir.path(), "spec.json", CONSTANT_SPEC);
    let out = dir.path().join("run");
    for bad in ["optim.bogus=1", "optim.iterations=\"many\"", "noequals"] {
        let o = spe(&["train", "--config", s(&cfg), "--override", bad, "--output-dir", s(&out)]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    assert!(!out.exists());
}

#[test]
fn divergence_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "spec.json", CONSTANT_SPEC);
    let out = dir.path().join("run");
    let o = spe(&[
        "train",
        "--config",
        s(&cfg),
        "--override",
        "optim.algorithm=sgd",
        "--override",
        "optim.learning_rate=1e9",
        "--output-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diverged"));
    assert!(out.join("record.csv").exists());
}

#[test]
fn compare_two_encoders_one_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "spec.json", SIGNAL_SPEC);
    let out = dir.path().join("cmp");
    let o = spe(&["compare", "--config", s(&cfg), "--encoders", "pe,spe", "--seeds", "3", "--output-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("comparison.txt")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| l.trim_start().starts_with("pe") || l.trim_start().starts_with("spe")).collect();
    assert_eq!(rows.len(), 2, "{table}");
    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("comparison.json").exists());
    assert!(out.join("spe/seed-3/record.csv").exists());
}

#[test]
fn compare_empty_encoder_list_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "spec.json", SIGNAL_SPEC);
    for list in ["", "pe,unknown"] {
        let o = spe(&["compare", "--config", s(&cfg), "--encoders", list, "--output-dir", s(&dir.path().join("x"))]);
        assert_eq!(o.status.code(), Some(2), "{list:?}");
    }
}

#[test]
fn compare_variant_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "spec.json", SIGNAL_SPEC);
    let variants = write_config(
        dir.path(),
        "variants.json",
        r#"[{"encoder": {"kind": "pe", "octaves": 4}, "first_activation": "sine"},
            {"label": "plain", "encoder": {"kind": "pe", "octaves": 4}}]"#,
    );
    let out = dir.path().join("cmp");
    let arg = format!("@{}", s(&variants));
    let o = spe(&["compare", "--config", s(&cfg), "--encoders", &arg, "--seeds", "1,2", "--output-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("comparison.json")).unwrap()).unwrap();
    let labels: Vec<&str> = json["rows"].as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["pe+sine", "pe+sine", "plain", "plain"]);
}

fn train_checkpoint(dir: &Path, encoder: &str) -> PathBuf {
    let spec = SIGNAL_SPEC.replace(r#"{"kind": "spe", "octaves": 4}"#, encoder);
    let cfg = write_config(dir, "spec.json", &spec);
    let out = dir.join("run");
    let o = spe(&["train", "--config", s(&cfg), "--override", "optim.iterations=0", "--output-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out.join("checkpoint.json")
}

#[test]
fn spectrum_of_fresh_spe_within_init_bound() {
    let dir = TempDir::new().unwrap();
    let ckpt = train_checkpoint(dir.path(), r#"{"kind": "spe", "octaves": 4}"#);
    let out = dir.path().join("spec_out");
    let o = spe(&["spectrum", "--checkpoint", s(&ckpt), "--output-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(fs::read_to_string(out.join("spectrum.csv")).unwrap(), text);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("component,octave,omega_star"));
    // First sine layer is drawn from U(-1/fan_in, 1/fan_in) with fan_in = 8.
    let bound = 1.0 / 8.0;
    let mut prev = f64::INFINITY;
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let octave: i32 = f[1].parse().unwrap();
        let omega: f64 = f[2].parse().unwrap();
        assert!(omega.abs() / 2f64.powi(octave - 1) <= bound, "{line}");
        assert!(omega.abs() <= prev);
        prev = omega.abs();
        rows += 1;
    }
    assert_eq!(rows, 16);
}

#[test]
fn spectrum_of_pe_checkpoint_is_an_error() {
    let dir = TempDir::new().unwrap();
    let ckpt = train_checkpoint(dir.path(), r#"{"kind": "pe", "octaves": 4}"#);
    let o = spe(&["spectrum", "--checkpoint", s(&ckpt)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("encoder has no learned spectrum"));
}

#[test]
fn theory_check_default_grid_passes() {
    let o = spe(&["theory-check"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.contains("delta_pe_exact"));
}

#[test]
fn theory_check_failure_exits_1() {
    let o = spe(&["theory-check", "--small-omega", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL theorem3_small_weight"));
}

fn metrics_json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["metrics"];
    full.extend_from_slice(args);
    let o = spe(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn metrics_self_comparison() {
    let dir = TempDir::new().unwrap();
    let img = dir.path().join("a.pgm");
    let pixels: Vec<u8> = (0..64u32).map(|i| ((i * 37) % 256) as u8).collect();
    write_pgm(&img, 8, 8, &pixels);
    let v = metrics_json(&["--true", s(&img), "--syn", s(&img), "--train", s(&img)]);
    assert_eq!(v["psnr"], "inf");
    assert_eq!(v["ssim"], 1.0);
    assert!(v["wdpr"].as_array().unwrap().iter().all(|w| w == 0.0));
    assert!(v["power_ratio"].as_array().unwrap().iter().all(|w| w == 1.0));
    // Identical syn and true histograms: zero denominator.
    assert_eq!(v["rwde"], "inf");
}

#[test]
fn metrics_rwde_train_equals_true() {
    let dir = TempDir::new().unwrap();
    let (t, syn) = (dir.path().join("t.pgm"), dir.path().join("s.pgm"));
    write_pgm(&t, 2, 2, &[0, 64, 128, 255]);
    write_pgm(&syn, 2, 2, &[10, 64, 100, 200]);
    let v = metrics_json(&["--true", s(&t), "--syn", s(&syn), "--train", s(&t), "--levels", "1"]);
    assert_eq!(v["rwde"], 1.0);
}

#[test]
fn metrics_two_by_two_by_hand() {
    let dir = TempDir::new().unwrap();
    let (t, syn) = (dir.path().join("t.pgm"), dir.path().join("s.pgm"));
    write_pgm(&t, 2, 2, &[255, 0, 0, 0]);
    write_pgm(&syn, 2, 2, &[0, 0, 0, 0]);
    let v = metrics_json(&["--true", s(&t), "--syn", s(&syn), "--levels", "1", "--window", "2"]);
    // MSE 1/4.
    let psnr = 10.0 * 4f64.log10();
    assert!((v["psnr"].as_f64().unwrap() - psnr).abs() < 1e-12);
    // One window: μa = 1/4, σa² = 3/16, everything of b is zero.
    let (c1, c2) = (1e-4, 9e-4);
    let ssim = c1 * c2 / ((1.0 / 16.0 + c1) * (3.0 / 16.0 + c2));
    assert!((v["ssim"].as_f64().unwrap() - ssim).abs() < 1e-15);
    assert_eq!(v["wdpr"][0], 1.0);
    assert_eq!(v["power_ratio"][0], 0.0);
    assert!(v.get("rwde").is_none());
}

#[test]
fn metrics_size_mismatch_fails() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    write_pgm(&a, 2, 2, &[0; 4]);
    write_pgm(&b, 4, 2, &[0; 8]);
    let o = spe(&["metrics", "--true", s(&a), "--syn", s(&b)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("differ"));
}
