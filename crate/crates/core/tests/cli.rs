use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ddos5g");

fn ddos5g(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("DDOS5G_OUTPUT_DIR").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn quick_config(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("run");
    let text = format!(
        r#"version = 1
master_seed = 3
output_dir = "{}"
k_best = 12
rfe_final = 6

[generate]
divisor = 400

[[models]]
kind = "decision_tree"

[[models]]
kind = "gaussian_nb"
"#,
        out.display()
    );
    let path = dir.join("quick.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_without_config_is_a_usage_error() {
    let o = ddos5g(&["run"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--config"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(ddos5g(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "k_best = 5\nrfe_final = 10\n\n[generate]\ndivisor = 400\n").unwrap();
    let o = ddos5g(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rfe_final"));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    assert_eq!(ddos5g(&["run", "--config", "/nonexistent/x.toml"]).status.code(), Some(1));
}

#[test]
fn generate_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = ddos5g(&["generate", "--seed", "7", "--output-dir", d, "--file-name", name]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn generate_rejects_zero_divisor() {
    let dir = tempfile::tempdir().unwrap();
    let o = ddos5g(&["generate", "--divisor", "0", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inspect_lists_all_labels_with_webddos_share() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(ddos5g(&["generate", "--seed", "1", "--divisor", "10", "--output-dir", d]).status.code(), Some(0));
    let o = ddos5g(&["inspect", dir.path().join("flows.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("13 labels"), "{text}");
    let web = text.lines().find(|l| l.contains("WebDDoS")).expect("WebDDoS row");
    let share: f64 = web.split_whitespace().last().unwrap().trim_end_matches('%').parse().unwrap();
    assert!((share - 0.01).abs() < 0.005, "{web}");
}

#[test]
fn inspect_missing_file_is_a_runtime_error() {
    assert_eq!(ddos5g(&["inspect", "/nonexistent/flows.csv"]).status.code(), Some(2));
}

#[test]
fn run_then_score_matches_recorded_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let o = ddos5g(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let run_dir = dir.path().join("run");
    for f in ["results.json", "plot_data.csv", "chart_ddos.svg", "chart_latency.svg", "transforms.json"] {
        assert!(run_dir.join(f).is_file(), "missing {f}");
    }
    let o = ddos5g(&["score", "--run-dir", run_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.matches("match").count(), 4, "{text}");
    assert!(!text.contains("DIFFERS"));

    let o = ddos5g(&["score", "--run-dir", run_dir.to_str().unwrap(), "--task", "ddos", "--model", "gaussian_nb"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("match").count(), 1);
}

#[test]
fn score_with_unknown_model_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    assert_eq!(ddos5g(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(0));
    let run_dir = dir.path().join("run");
    let o = ddos5g(&["score", "--run-dir", run_dir.to_str().unwrap(), "--model", "svm"]);
    assert_eq!(o.status.code(), Some(1));
}
