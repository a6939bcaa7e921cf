use clap::Parser;
use gravitas::cli::config::{CommandConfig, OutputFormat};
use gravitas::cli::{resolve, run_config, self_test, Cli};
use std::path::Path;
use std::process::Command;

fn parse(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("gravitas").chain(args.iter().copied())).unwrap()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gravitas"));
    c.env_remove("GRAVITAS_SEED");
    c
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 5\nformat = \"json\"\n[box_cut]\nn_samples = 1234\ns_values = [5.0]\n[box_cut.params]\nmu = 0.01\n");
    let cfg = cfg.to_str().unwrap();

    let r = resolve(&parse(&["--config", cfg, "box-cut"]), Some("9")).unwrap();
    assert_eq!(r.seed, Some(5));
    assert_eq!(r.format, OutputFormat::Json);
    let CommandConfig::BoxCut(b) = &r.command else { panic!() };
    assert_eq!((b.n_samples, b.s_values.clone(), b.params.mu), (1234, vec![5.0], 0.01));
    assert_eq!(b.params.epsilon, 1e-12);

    let r = resolve(&parse(&["--config", cfg, "--seed", "7", "box-cut", "--n-samples", "99", "--mu", "0.02"]), Some("9")).unwrap();
    assert_eq!(r.seed, Some(7));
    let CommandConfig::BoxCut(b) = &r.command else { panic!() };
    assert_eq!((b.n_samples, b.params.mu), (99, 0.02));

    let r = resolve(&parse(&["box-cut"]), Some("9")).unwrap();
    assert_eq!(r.seed, Some(9));
    assert_eq!(r.format, OutputFormat::Csv);
    assert!(resolve(&parse(&["box-cut"]), Some("nine")).is_err());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[box_cut]\nn_sample = 3\n");
    assert!(resolve(&parse(&["--config", cfg.to_str().unwrap(), "box-cut"]), None).is_err());
}

#[test]
fn missing_seed_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["--out", dir.path().to_str().unwrap(), "optical-tree"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn invalid_parameters_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["--out", dir.path().to_str().unwrap(), "entangle", "--d", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["--seed", "1", "--out", dir.path().to_str().unwrap(), "optical-tree", "--tolerance", "1e-9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn zero_interaction_time_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["--out", dir.path().to_str().unwrap(), "entangle", "--dt", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("entangle.manifest.json").exists());
}

#[test]
fn env_seed_is_used_by_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("GRAVITAS_SEED", "3")
        .args(["--out", dir.path().to_str().unwrap(), "phase-space-check", "--n-samples", "20000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn help_states_units() {
    for sub in ["box-cut", "entangle", "deflection", "compare"] {
        let out = bin().args([sub, "--help"]).output().unwrap();
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        assert!(out.status.success());
        assert!(text.contains("units") || text.contains("(s)") || text.contains("(m)") || text.contains("kg"), "{sub}: {text}");
    }
}

#[test]
fn manifest_lists_hashed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let r = resolve(&parse(&["--seed", "4", "--out", d, "box-cut", "--n-samples", "5000", "--s-values", "3.9,5"]), None).unwrap();
    let m = run_config(&r).unwrap();
    assert_eq!(m.config, r);
    assert!(!m.outputs.is_empty());
    for o in &m.outputs {
        let bytes = std::fs::read(dir.path().join(&o.path)).unwrap();
        assert_eq!(gravitas::cli::output::sha256_hex(&bytes), o.sha256);
        assert!(o.schema.ends_with("/v1"));
    }
    let text = std::fs::read_to_string(dir.path().join("box_cut.manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["seed"], 4);
    let csv = std::fs::read_to_string(dir.path().join(&m.outputs[0].path)).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("s,im_box,mc_err_box"));
    assert!(csv.contains("below_threshold"));
}

#[test]
fn self_test_outputs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let rows = self_test(11, Some(3), dir.path()).unwrap();
    assert_eq!(rows.len(), 7);
    for (name, ok) in rows {
        assert!(ok, "{name}");
    }
}
