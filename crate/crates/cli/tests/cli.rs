use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use slowcav_cli::{execute, scenarios, EmitOptions, Format, ScenarioConfig, Stage};

fn slowcav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowcav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr holds a JSON report")
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> String {
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_json()).unwrap();
    path.display().to_string()
}

fn small_config() -> ScenarioConfig {
    let mut cfg = scenarios::load("fig1c").unwrap();
    cfg.grid.points = 4096;
    cfg.modes.target_linewidth_hz = None;
    cfg
}

#[test]
fn shipped_configs_round_trip() {
    for name in scenarios::NAMES {
        let cfg = scenarios::load(name).unwrap();
        let again = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{name}");
        assert_eq!(cfg.name, name);
        assert!(!cfg.comment.is_empty(), "{name} has no comment");
    }
}

#[test]
fn shipped_configs_are_valid() {
    for name in scenarios::NAMES {
        let report = scenarios::load(name).unwrap().validate();
        assert!(report.is_valid(), "{name}: {:?}", report.errors);
    }
}

#[test]
fn list_names_every_scenario() {
    let out = slowcav(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, scenarios::NAMES);
}

#[test]
fn zero_width_hole_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.profile.holes[0].width_hz = 0.0;
    let path = write_config(dir.path(), &cfg);
    let out = slowcav(&["modes", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report = stderr_json(&out);
    assert_eq!(report["kind"], "invalid");
    let errors = report["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e["field"] == "profile.holes[0].width_hz"
        && e["message"].as_str().unwrap().contains("hole.width must be positive")));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn validate_reports_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.profile.holes[0].width_hz = -1.0;
    let path = write_config(dir.path(), &cfg);
    let out = slowcav(&["validate", "--config", &path]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "invalid");

    let ok = slowcav(&["validate", "fig1b"]);
    assert!(ok.status.success());
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["status"], "valid");
}

#[test]
fn coarse_grid_is_a_warning_not_an_error() {
    let mut cfg = small_config();
    cfg.modes.target_linewidth_hz = Some(1e3);
    let report = cfg.validate();
    assert!(report.is_valid());
    assert!(report.warnings.iter().any(|w| w.field == "grid.points"));
}

#[test]
fn unparsable_and_unknown_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let out = slowcav(&["profile", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "unparsable");

    let unknown = dir.path().join("unknown.json");
    let mut v: Value = serde_json::from_str(&small_config().to_json()).unwrap();
    v["grid"]["pointz"] = Value::from(10);
    fs::write(&unknown, v.to_string()).unwrap();
    let out = slowcav(&["profile", "--config", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = slowcav(&["scenario", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "unknown-scenario");

    let out = slowcav(&["profile", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "unreadable");
}

#[test]
fn pulse_command_needs_a_pulse_section() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &small_config());
    let out = slowcav(&["pulse", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["errors"][0]["field"], "pulse");
}

#[test]
fn manifest_lists_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("run");
    let out = slowcav(&["spectrum", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["scenario"], "fig1c");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    for f in ["config.json", "transmission.csv", "modes.csv", "summary.json"] {
        assert!(files.contains(&f), "{f} missing from {files:?}");
    }
    for f in &files {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let header = fs::read_to_string(out_dir.join("modes.csv")).unwrap();
    assert!(header.starts_with("center_Hz,fwhm_Hz,peak_T,spacing_Hz,mode_number\n"));
}

#[test]
fn json_format_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let opts = EmitOptions {
        out: Some(dir.path().to_path_buf()),
        normalize: false,
        format: Format::Json,
    };
    let m = execute(&small_config(), Stage::Dispersion, &opts).unwrap();
    assert!(m.files.contains(&"dispersion.json".to_string()));
    let rows: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dispersion.json")).unwrap()).unwrap();
    let first = &rows.as_array().unwrap()[0];
    for key in ["detuning_Hz", "delta_n", "group_index"] {
        assert!(first[key].is_number(), "{key}");
    }
}

#[test]
fn normalized_pulse_traces_peak_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let opts = EmitOptions {
        out: Some(dir.path().to_path_buf()),
        normalize: true,
        format: Format::Csv,
    };
    execute(&scenarios::load("fig3b").unwrap(), Stage::Pulse, &opts).unwrap();
    for f in ["pulse_input.csv", "pulse_output.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        let peak = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12, "{f}: {peak}");
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["fig1c", "fig3b", "tb-sweep"] {
        let cfg = scenarios::load(name).unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&a, &b] {
            let opts = EmitOptions {
                out: Some(d.path().to_path_buf()),
                ..EmitOptions::default()
            };
            execute(&cfg, Stage::All, &opts).unwrap();
        }
        assert_eq!(snapshot(a.path()), snapshot(b.path()), "{name}");
    }
}
